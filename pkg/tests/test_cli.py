import io
import json

import pytest

from qcong import forms as fm
from qcong import hecke
from qcong import moments as mo
from qcong.cli import FAILED, OK, USAGE, main


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def json_lines(text):
    return [json.loads(line) for line in text.splitlines() if line.startswith("{")]


def test_compute_spt():
    code, out = run("compute", "spt", "4")
    assert code == OK and "spt(4) = 10" in out


def test_compute_spt_json():
    code, out = run("--json", "compute", "spt", "4")
    assert code == OK and json.loads(out) == {"spt": 4, "value": 10}


def test_compute_pn():
    code, out = run("compute", "pn", "6")
    assert code == OK and "p(6) = 11" in out


def test_compute_series_text(tmp_path):
    code, out = run("--cache-dir", str(tmp_path), "compute", "series", "E", "--terms", "8")
    assert code == OK
    assert out.splitlines()[-1] == "1 + -1*q + -1*q^2 + q^5 + q^7 + O(q^8)"


def test_compute_series_mod(tmp_path):
    code, out = run("--json", "--cache-dir", str(tmp_path), "compute", "series", "P",
                    "--terms", "10", "--mod", "5")
    rec = json.loads(out)
    assert code == OK and rec["coeffs"][4] == "0" and rec["coeffs"][9] == "0"


def test_compute_uses_default_truncation(tmp_path):
    code, out = run("--json", "--trunc", "12", "--cache-dir", str(tmp_path), "compute", "series", "Delta")
    rec = json.loads(out)
    assert rec["terms"] == 12 and rec["coeffs"][:3] == ["0", "1", "-24"]


def test_series_output_is_deterministic_on_a_warm_cache(tmp_path):
    argv = ("--json", "--cache-dir", str(tmp_path), "compute", "series", "crank4", "--terms", "30")
    cold = run(*argv)
    warm = run(*argv)
    assert cold == warm and cold[0] == OK
    assert any(tmp_path.iterdir())


def test_compute_moments():
    code, out = run("--json", "compute", "moments", "--kind", "crank", "--k", "2", "--max-n", "4")
    # M_2(n) = 2 n p(n)
    assert code == OK and json.loads(out)["values"] == ["0", "2", "8", "18", "40"]


@pytest.mark.parametrize("argv", [
    ("compute", "series", "nonsense"),
    ("compute", "series", "E3"),
    ("compute", "series", "P", "--terms", "0"),
    ("compute", "series", "P", "--mod", "1"),
    ("compute", "spt", "-1"),
    ("verify", "theorem1", "--t", "11"),
    ("verify", "rcrel", "--k", "1"),
    ("discover", "spt", "--ell", "4"),
    ("discover", "spt", "--ell", "41"),
    ("--trunc", "0", "compute", "pn", "3"),
    ("compute",),
    ("frobnicate",),
])
def test_usage_errors(argv):
    assert run(*argv)[0] == USAGE


def test_verify_theorem1():
    code, out = run("--json", "verify", "theorem1", "--t", "7", "--max-n", "300")
    assert code == OK
    assert json_lines(out) == [{"check": "theorem1", "params": {"t": 7, "max_n": 300}, "status": "ok"}]


def test_verify_conjecture_small():
    code, out = run("verify", "conjecture", "--max-k", "4", "--max-n", "30")
    assert code == OK and "conjecture: ok" in out


def test_verify_rcrel():
    code, out = run("verify", "rcrel", "--k", "3", "--terms", "25")
    assert code == OK and "ok" in out


def test_verify_rankmod11():
    code, out = run("--json", "verify", "rankmod11", "--terms", "12")
    assert code == OK and json_lines(out)


def _cert17(tmp_path, **change):
    cert = hecke.derive_certificate(mo.SptCongruence(17, 5, 7, fm.E6, 14), 7, lam=-24959264)
    for k, v in change.items():
        setattr(cert, k, v)
    path = tmp_path / "cert.json"
    path.write_text(cert.to_json())
    return path


def test_verify_certificate_file(tmp_path):
    code, out = run("verify", "certificate", "--file", str(_cert17(tmp_path)), "--samples", "50")
    assert code == OK and "spt(40817n + 243) = 0 (mod 17): verified" in out


def test_verify_certificate_file_failure(tmp_path):
    path = _cert17(tmp_path, mu=243 + 17)
    code, out = run("--json", "verify", "certificate", "--file", str(path), "--samples", "50")
    rec = json_lines(out)[0]
    assert code == FAILED and not rec["ok"] and rec["witness"]


def test_verify_certificate_missing_file(tmp_path):
    assert run("verify", "certificate", "--file", str(tmp_path / "nope.json"))[0] == USAGE


def test_discover_rank11(tmp_path):
    out_file = tmp_path / "rank.jsonl"
    code, out = run("discover", "rank11", "--out", str(out_file))
    assert code == OK
    mus = [json.loads(line)["mu"] for line in out_file.read_text().splitlines()]
    assert mus == [4322599, 172904]


@pytest.mark.slow
def test_discover_spt17(tmp_path):
    out_file = tmp_path / "c17.json"
    code, out = run("discover", "spt", "--ell", "17", "--out", str(out_file))
    assert code == OK and "spt(40817n + 243) = 0 (mod 17)" in out
    cert = hecke.CongruenceCertificate.from_json(out_file.read_text())
    assert (cert.Q, cert.c, cert.mu, cert.status) == (7, 1, 243, "verified")


@pytest.mark.slow
def test_discover_spt23_reports_no_certificate():
    code, out = run("discover", "spt", "--ell", "23")
    assert code == OK and "no eigenform; no AP certificate" in out


@pytest.mark.slow
def test_discover_json_is_deterministic():
    a = run("--json", "discover", "spt", "--ell", "19", "--samples", "20")
    b = run("--json", "discover", "spt", "--ell", "19", "--samples", "20")
    assert a == b and a[0] == OK
    assert json_lines(a[1])[0]["certificate"]["mu"] == 99
