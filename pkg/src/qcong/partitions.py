"""Ground-truth partition statistics.

Small n are handled by brute-force enumeration; moderate n by dynamic
programming.  Everything here is independent of the modular-forms
machinery so it can serve as the oracle for it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .series import legendre, pentagonal_terms

ENUMERATE_MAX = 40
DP_MAX = 2000
# every count is at most p(n) and p(405) < 2^63
_INT64_SAFE_N = 405


def partitions(n: int):
    """Yield the partitions of n as weakly decreasing tuples."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        yield ()
        return

    def rec(remaining, largest):
        if remaining == 0:
            yield ()
            return
        for part in range(min(remaining, largest), 0, -1):
            for rest in rec(remaining - part, part):
                yield (part,) + rest

    yield from rec(n, n)


def _check_partition(part):
    if not part:
        raise ValueError("empty partition")
    if any(p <= 0 for p in part) or any(a < b for a, b in zip(part, part[1:])):
        raise ValueError(f"{part} is not a partition")


def rank_of(part) -> int:
    """Largest part minus the number of parts."""
    _check_partition(part)
    return part[0] - len(part)


def crank_of(part) -> int:
    _check_partition(part)
    ones = part.count(1)
    if ones == 0:
        return part[0]
    return sum(1 for p in part if p > ones) - ones


def spt_of_partition(part) -> int:
    return part.count(part[-1]) if part else 0


@lru_cache(maxsize=None)
def _p_table(n: int) -> tuple:
    vals = [1] + [0] * n
    pent = [(g, s) for g, s in pentagonal_terms(n + 1) if g > 0]
    for k in range(1, n + 1):
        acc = 0
        for g, s in pent:
            if g > k:
                break
            acc -= s * vals[k - g]
        vals[k] = acc
    return tuple(vals)


def p_of(n: int) -> int:
    """p(n) by Euler's pentagonal recurrence."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    size = 1 << max(6, n.bit_length())
    return _p_table(size)[n]


N1_CRANK = {-1: 1, 0: -1, 1: 1}


@dataclass
class PartitionStats:
    n: int
    p: int
    rank_counts: dict = field(default_factory=dict)
    crank_counts: dict = field(default_factory=dict)
    spt: int = 0


def _stats_by_enumeration(n):
    ranks, cranks, spt, count = {}, {}, 0, 0
    for part in partitions(n):
        count += 1
        if n == 0:
            continue
        r, c = rank_of(part), crank_of(part)
        ranks[r] = ranks.get(r, 0) + 1
        cranks[c] = cranks.get(c, 0) + 1
        spt += spt_of_partition(part)
    if n == 1:
        cranks = dict(N1_CRANK)
    return PartitionStats(n, count, ranks, cranks, spt)


@lru_cache(maxsize=4)
def rank_table(N: int) -> np.ndarray:
    """R[n, m + N] = N(m, n) for 0 <= n <= N.

    DP over (largest part, number of parts): F[n, c] counts partitions of n
    into exactly c parts, all at most the current bound a.  A partition with
    largest part exactly a and c parts is a partition of n - a into c - 1
    parts bounded by a, and has rank a - c.
    """
    dtype = np.int64 if N <= _INT64_SAFE_N else object
    F = np.zeros((N + 1, N + 1), dtype=dtype)
    R = np.zeros((N + 1, 2 * N + 1), dtype=dtype)
    F[0, 0] = 1
    for a in range(1, N + 1):
        for n in range(a, N + 1):
            width = n - a + 1
            F[n, 1:width + 1] += F[n - a, :width]
        K = N - a + 1
        # rank index a - 1 - c' + N for c' = 0 .. K-1, i.e. columns N+a-1 down to 2a-1
        R[a:N + 1, 2 * a - 1:N + a][:, ::-1] += F[0:K, 0:K]
    R[0, N] = 0  # the empty partition carries no rank
    R.flags.writeable = False
    return R


@lru_cache(maxsize=4)
def crank_table(N: int) -> np.ndarray:
    """C[n, m + N] = M(m, n) for 0 <= n <= N.

    For each m, sum_n M(m, n) q^n = P(q) sum_{k>=1} (-1)^(k-1) q^(k(k-1)/2 + k|m|) (1 - q^k).
    This reproduces the signed convention at n = 1.
    """
    P = np.array(_p_table(N), dtype=object)
    C = np.zeros((N + 1, 2 * N + 1), dtype=object)
    C[:] = 0
    for m in range(N + 1):
        col = np.zeros(N + 1, dtype=object)
        col[:] = 0
        k = 1
        while k * (k - 1) // 2 + k * m <= N:
            e = k * (k - 1) // 2 + k * m
            sign = 1 if k % 2 else -1
            col[e:] += sign * P[: N + 1 - e]
            if e + k <= N:
                col[e + k:] -= sign * P[: N + 1 - e - k]
            k += 1
        C[:, N + m] = col
        C[:, N - m] = col
    C[0, N] = 0
    C.flags.writeable = False
    return C


def _table_size(n):
    return max(32, 1 << (max(n, 1) - 1).bit_length())


def _counts_row(table, n, N):
    row = table[n]
    return {m - N: int(v) for m, v in enumerate(row) if v != 0}


def count_stats(n: int, method: str = "dp") -> PartitionStats:
    if n < 0:
        raise ValueError("n must be nonnegative")
    if method == "enumerate":
        if n > ENUMERATE_MAX:
            raise ValueError(f"enumeration is limited to n <= {ENUMERATE_MAX}")
        return _stats_by_enumeration(n)
    if method != "dp":
        raise ValueError(f"unknown method {method!r}")
    if n > DP_MAX:
        raise ValueError(f"dp is limited to n <= {DP_MAX}")
    N = _table_size(n)
    ranks = _counts_row(rank_table(N), n, N)
    cranks = _counts_row(crank_table(N), n, N)
    if n == 1:
        cranks = dict(N1_CRANK)
    return PartitionStats(n, p_of(n), ranks, cranks, spt_of(n, "series") if n else 0)


def _counts(n, kind):
    if kind not in ("rank", "crank"):
        raise ValueError(f"kind must be 'rank' or 'crank', not {kind!r}")
    if n == 0:
        return {}
    if n <= 12:
        st = _stats_by_enumeration(n)
    else:
        N = _table_size(n)
        table = rank_table(N) if kind == "rank" else crank_table(N)
        return _counts_row(table, n, N)
    return st.rank_counts if kind == "rank" else st.crank_counts


def moment(n: int, k: int, kind: str) -> int:
    """Sum of m^k times the number of partitions of n with rank/crank m."""
    if k <= 0 or k % 2:
        raise ValueError("only even positive moments are exposed")
    return sum(m ** k * c for m, c in _counts(n, kind).items())


def residue_counts(n: int, t: int, kind: str) -> dict:
    """r -> number of partitions of n whose statistic is r mod t."""
    if t < 2:
        raise ValueError("t must be at least 2")
    out = {r: 0 for r in range(t)}
    for m, c in _counts(n, kind).items():
        out[m % t] += c
    return out


# -- spt ----------------------------------------------------------------------

def _geometric_pass(a, k, m):
    """In place: a <- a / (1 - q^k), blockwise."""
    N = len(a)
    for s in range(k, N, k):
        e = min(s + k, N)
        a[s:e] += a[s - k:e - k]
    if m is not None:
        np.mod(a, m, out=a)


def spt_series(N: int, modulus: int | None = None) -> np.ndarray:
    """spt(0..N-1) from sum_k q^k/(1-q^k)^2 prod_{j>k} 1/(1-q^j).

    The tail product is built incrementally from k = N-1 down to 1.
    """
    dtype = object if modulus is None or (modulus - 1) * N > 2**62 else np.int64
    tail = np.zeros(N, dtype=dtype)
    acc = np.zeros(N, dtype=dtype)
    if N:
        tail[0] = 1
    for k in range(N - 1, 0, -1):
        width = N - k
        term = tail[:width].copy()
        _geometric_pass(term, k, modulus)
        _geometric_pass(term, k, modulus)
        acc[k:] += term
        if modulus is not None:
            np.mod(acc[k:], modulus, out=acc[k:])
        _geometric_pass(tail, k, modulus)
    return acc


@lru_cache(maxsize=8)
def _spt_exact(N):
    return tuple(int(v) for v in spt_series(N))


def spt_of(n: int, method: str = "series") -> int:
    if n < 0:
        raise ValueError("n must be nonnegative")
    if method == "enumerate":
        if n > ENUMERATE_MAX:
            raise ValueError(f"enumeration is limited to n <= {ENUMERATE_MAX}")
        return sum(spt_of_partition(p) for p in partitions(n))
    if method != "series":
        raise ValueError(f"unknown method {method!r}")
    return _spt_exact(_table_size(n + 1))[n]


def spt_mod(n: int, modulus: int) -> int:
    """spt(n) mod `modulus` without carrying exact values."""
    return int(spt_series(n + 1, modulus)[n]) % modulus


# -- scans ----------------------------------------------------------------------

def report_line(check, params, status, witness=None) -> str:
    rec = {"check": check, "params": params, "status": status}
    if witness is not None:
        rec["witness"] = witness
    return json.dumps(rec)


@dataclass
class ScanReport:
    check: str
    params: dict
    violations: list = field(default_factory=list)
    checked: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    def lines(self):
        if self.ok:
            return [report_line(self.check, self.params, "ok")]
        return [report_line(self.check, self.params, "violation", w) for w in self.violations]


def conjecture_scan(max_k: int = 10, max_n: int = 200) -> ScanReport:
    """Check M_k(n) > N_k(n) for even 2 <= k <= max_k and 1 <= n <= max_n."""
    rep = ScanReport("conjecture", {"max_k": max_k, "max_n": max_n})
    N = _table_size(max_n)
    R, C = rank_table(N), crank_table(N)
    ms = [m - N for m in range(2 * N + 1)]
    for n in range(1, max_n + 1):
        rrow = [(m, int(v)) for m, v in zip(ms, R[n]) if v]
        crow = [(m, int(v)) for m, v in zip(ms, C[n]) if v]
        if n == 1:
            crow = sorted(N1_CRANK.items())
        for k in range(2, max_k + 1, 2):
            Nk = sum(m ** k * v for m, v in rrow)
            Mk = sum(m ** k * v for m, v in crow)
            rep.checked += 1
            if not Mk > Nk:
                rep.violations.append({"n": n, "k": k, "M_k": Mk, "N_k": Nk})
    return rep


def theorem1_check(t: int, max_n: int) -> ScanReport:
    """spt(n) = -2(n + (t^2-1)/24) p(n) mod t whenever 1-24n is not a nonzero square mod t."""
    if t not in (5, 7, 13):
        raise ValueError("t must be 5, 7 or 13")
    rep = ScanReport("theorem1", {"t": t, "max_n": max_n})
    spt = spt_series(max_n + 1, t)
    c = (t * t - 1) // 24
    for n in range(max_n + 1):
        if legendre(1 - 24 * n, t) == 1:
            continue
        rep.checked += 1
        lhs = int(spt[n]) % t
        rhs = -2 * (n + c) * p_of(n) % t
        if lhs != rhs:
            rep.violations.append({"n": n, "spt": lhs, "rhs": rhs})
    return rep
