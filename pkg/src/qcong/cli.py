"""The `qcong` command line: compute, verify and discover."""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass
from pathlib import Path

from . import forms as fm
from . import hecke
from . import moments as mo
from . import partitions as pt
from . import series as qs

OK, FAILED, USAGE = 0, 1, 2


@dataclass(frozen=True)
class CliConfig:
    cache_dir: Path
    trunc: int = 60
    output: str = "text"
    threads: int = 1

    def __post_init__(self):
        if self.trunc < 1 or self.threads < 1:
            raise ValueError("trunc and threads must be positive")


class UsageError(Exception):
    pass


class Reporter:
    def __init__(self, cfg: CliConfig, out=None):
        self.cfg = cfg
        self.out = out or sys.stdout

    def json(self, rec):
        print(rec if isinstance(rec, str) else json.dumps(rec), file=self.out)

    def text(self, msg: str):
        if self.cfg.output == "text":
            print(msg, file=self.out)


# -- compute ----------------------------------------------------------------------------------

_NAMED = re.compile(r"^(?:(P|E|Delta|spt)|E(\d+)|eta(\d+)|(crank|rank)(\d+))$")


def named_series(name: str, terms: int, modulus: int | None) -> qs.QSeries:
    """P, E, Delta, spt, E<n> (Eisenstein), eta<r> (E(q)^r) or crank<2k>/rank<2k>."""
    m = _NAMED.match(name)
    if not m:
        raise UsageError(f"unknown series {name!r}")
    ring = qs.Zmod(modulus) if modulus else qs.ZZ
    plain, eis, eta, stat, k2 = m.groups()
    if plain == "P":
        s = qs.partition_series(terms, ring)
    elif plain == "E":
        s = qs.euler_E(1, terms, ring)
    elif plain == "Delta":
        s = fm.Delta.series(terms, ring)
    elif plain == "spt":
        s = qs.QSeries(pt.spt_series(terms, modulus), ring)
    elif eis:
        n = int(eis)
        if n < 2 or n % 2:
            raise UsageError("Eisenstein index must be even and >= 2")
        s = fm.eisenstein_series(n, terms, ring)
    elif eta:
        s = qs.euler_E(int(eta), terms, ring)
    else:
        k2 = int(k2)
        if k2 < 2 or k2 % 2:
            raise UsageError("moment order must be even and >= 2")
        build = mo.crank_moment_series if stat == "crank" else mo.rank_moment_series
        s = build(k2 // 2, terms).series.change_ring(ring)
    return s


def _series_text(s: qs.QSeries) -> str:
    parts = []
    for n, c in sorted(s.nonzero().items()):
        mono = "1" if n == 0 else ("q" if n == 1 else f"q^{n}")
        parts.append(mono if c == 1 and n else f"{c}" if n == 0 else f"{c}*{mono}")
    return (" + ".join(parts) or "0") + f" + O(q^{s.trunc})"


def cmd_compute(args, rep: Reporter) -> int:
    if args.what == "spt":
        v = pt.spt_of(args.n)
        rep.json({"spt": args.n, "value": v})
        rep.text(f"spt({args.n}) = {v}")
    elif args.what == "pn":
        v = pt.p_of(args.n)
        rep.json({"p": args.n, "value": v})
        rep.text(f"p({args.n}) = {v}")
    elif args.what == "series":
        key = f"{args.name}_m{args.mod or 0}"
        s = qs.cached_series(key, args.terms,
                             lambda t: named_series(args.name, t, args.mod),
                             directory=rep.cfg.cache_dir)
        rep.json({"series": args.name, "mod": args.mod, "terms": args.terms,
                  "coeffs": [str(c) for c in s.tolist()]})
        rep.text(_series_text(s))
    elif args.what == "moments":
        vals = [pt.moment(n, args.k, args.kind) for n in range(args.max_n + 1)]
        rep.json({"moments": args.kind, "k": args.k, "values": [str(v) for v in vals]})
        label = "N" if args.kind == "rank" else "M"
        rep.text(", ".join(f"{label}_{args.k}({n}) = {v}" for n, v in enumerate(vals)))
    return OK


# -- verify -----------------------------------------------------------------------------------

def _emit_verdicts(rep: Reporter, verdicts) -> int:
    ok = True
    for v in verdicts:
        rep.json(v.line())
        ok &= v.ok
    return OK if ok else FAILED


def cmd_verify(args, rep: Reporter) -> int:
    if args.what == "theorem1":
        if args.t not in (5, 7, 13):
            raise UsageError("--t must be 5, 7 or 13")
        r = pt.theorem1_check(args.t, args.max_n)
        for line in r.lines():
            rep.json(line)
        rep.text(f"theorem1 t={args.t}: {'ok' if r.ok else 'FAILED'} ({r.checked} values)")
        return OK if r.ok else FAILED
    if args.what == "conjecture":
        r = pt.conjecture_scan(args.max_k, args.max_n)
        for line in r.lines():
            rep.json(line)
        rep.text(f"conjecture: {'ok' if r.ok else 'FAILED'} ({r.checked} pairs)")
        return OK if r.ok else FAILED
    if args.what == "sptgen":
        cong = mo.spt_derive(args.ell, args.terms)
        v = mo.verify_spt_congruence(cong, args.terms)
        rep.json({"congruence": cong.to_json(), "status": "ok" if v.ok else "violation"})
        rep.text(cong.describe())
        return OK if v.ok else FAILED
    if args.what == "rankmod11":
        code = _emit_verdicts(rep, mo.rank_mod11_suite(args.terms))
        rep.text(f"rank mod 11 suite: {'ok' if code == OK else 'FAILED'}")
        return code
    if args.what == "rcrel":
        v = mo.rcrel_check(args.k, args.terms)
        rep.json(v.line())
        rep.text(f"rank-crank identity k={args.k}: {'ok' if v.ok else 'FAILED'}")
        return OK if v.ok else FAILED
    if args.what == "certificate":
        try:
            cert = hecke.CongruenceCertificate.from_json(Path(args.file).read_text())
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(f"cannot read certificate: {exc}") from exc
        if cert.statistic != "spt":
            raise UsageError("only spt certificates can be re-verified from file")
        v = hecke.verify_certificate(cert, args.samples)
        rep.json({"certificate": json.loads(cert.to_json()), "ok": v.ok, "mode": v.mode,
                  "samples": v.samples, "direct": v.direct_checked, "witness": v.witness})
        rep.text(f"{cert.describe()}: {'verified' if v.ok else 'FAILED'}")
        return OK if v.ok else FAILED
    raise UsageError(args.what)


# -- discover ---------------------------------------------------------------------------------

def cmd_discover(args, rep: Reporter) -> int:
    if args.what == "spt":
        if not qs.is_prime(args.ell) or not 5 <= args.ell <= 37:
            raise UsageError("--ell must be a prime between 5 and 37")
        try:
            d = hecke.discover_spt(args.ell, args.qmax, args.samples)
        except mo.PipelineError as exc:
            rep.json({"ell": args.ell, "status": "failed", "step": "spt congruence", "error": str(exc)})
            return FAILED
        rep.text(d.congruence.describe())
        rec = {"ell": args.ell, "congruence": d.congruence.to_json(), "outcome": d.outcome}
        if d.certificate is not None:
            if d.verdict is not None and not d.verdict.ok:
                rec.update(status="failed", step="certificate verification", witness=d.verdict.witness)
                rep.json(rec)
                return FAILED
            rec["certificate"] = json.loads(d.certificate.to_json())
            if args.out:
                Path(args.out).write_text(d.certificate.to_json() + "\n")
        rep.json(rec)
        rep.text(d.message)
        return OK
    if args.what == "rank11":
        try:
            report = hecke.rank_certificates_mod11()
        except hecke.CertificateFailure as exc:
            rep.json({"status": "failed", "step": "rank certificates", "error": str(exc)})
            return FAILED
        for cert in report.certificates:
            rep.json(cert.to_json())
            rep.text(cert.describe())
        if args.out:
            Path(args.out).write_text("".join(c.to_json() + "\n" for c in report.certificates))
        return OK
    raise UsageError(args.what)


# -- parser -----------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qcong", description="partition statistic congruences",
                                allow_abbrev=False)
    p.add_argument("--cache-dir", default=None, help="series cache (default $QCONG_CACHE)")
    p.add_argument("--json", action="store_true", help="JSON lines only")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--trunc", type=int, default=60, help="default truncation")
    sub = p.add_subparsers(dest="cmd", required=True)

    c = sub.add_parser("compute").add_subparsers(dest="what", required=True)
    c.add_parser("spt").add_argument("n", type=int)
    c.add_parser("pn").add_argument("n", type=int)
    s = c.add_parser("series")
    s.add_argument("name")
    s.add_argument("--terms", type=int, default=None)
    s.add_argument("--mod", type=int, default=None)
    m = c.add_parser("moments")
    m.add_argument("--kind", choices=("rank", "crank"), required=True)
    m.add_argument("--k", type=int, required=True)
    m.add_argument("--max-n", type=int, default=20)

    v = sub.add_parser("verify").add_subparsers(dest="what", required=True)
    t1 = v.add_parser("theorem1")
    t1.add_argument("--t", type=int, required=True)
    t1.add_argument("--max-n", type=int, default=2000)
    sg = v.add_parser("sptgen")
    sg.add_argument("--ell", type=int, required=True)
    sg.add_argument("--terms", type=int, default=60)
    v.add_parser("rankmod11").add_argument("--terms", type=int, default=20)
    rc = v.add_parser("rcrel")
    rc.add_argument("--k", type=int, required=True)
    rc.add_argument("--terms", type=int, default=40)
    cj = v.add_parser("conjecture")
    cj.add_argument("--max-k", type=int, default=10)
    cj.add_argument("--max-n", type=int, default=200)
    ce = v.add_parser("certificate")
    ce.add_argument("--file", required=True)
    ce.add_argument("--samples", type=int, default=100)

    d = sub.add_parser("discover").add_subparsers(dest="what", required=True)
    ds = d.add_parser("spt")
    ds.add_argument("--ell", type=int, required=True)
    ds.add_argument("--qmax", type=int, default=100)
    ds.add_argument("--samples", type=int, default=100)
    ds.add_argument("--out", default=None, help="write the certificate JSON here")
    dr = d.add_parser("rank11")
    dr.add_argument("--out", default=None)
    return p


def _check_positive(args):
    for name in ("n", "terms", "max_n", "k", "samples", "max_k", "qmax", "mod"):
        v = getattr(args, name, None)
        if v is not None and v < (0 if name == "n" else 1):
            raise UsageError(f"--{name.replace('_', '-')} out of range")
    if getattr(args, "mod", None) is not None and args.mod < 2:
        raise UsageError("--mod must be at least 2")
    if getattr(args, "what", None) == "rcrel" and args.k < 2:
        raise UsageError("--k must be at least 2")


def main(argv=None, out=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    try:
        try:
            cfg = CliConfig(Path(args.cache_dir) if args.cache_dir else qs.cache_dir(),
                            args.trunc, "json" if args.json else "text", args.threads)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        if getattr(args, "terms", 0) is None:
            args.terms = cfg.trunc
        _check_positive(args)
        rep = Reporter(cfg, out)
        handler = {"compute": cmd_compute, "verify": cmd_verify, "discover": cmd_discover}[args.cmd]
        return handler(args, rep)
    except UsageError as exc:
        print(f"qcong: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
