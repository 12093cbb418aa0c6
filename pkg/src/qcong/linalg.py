"""Exact linear algebra over Q and Z/p.

`nullspace_exact` is fraction-free (Bareiss) elimination on integer
matrices.  `nullspace_multimodular` handles the large, badly scaled
systems of the moment pipeline: it eliminates mod several word-size
primes, rebuilds the rational kernel vector by CRT plus rational
reconstruction, and then checks it exactly over Z.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .series import is_prime


class InconsistentSystem(ValueError):
    pass


def _to_integer_rows(rows):
    """Scale each rational row by its common denominator."""
    out = []
    for row in rows:
        den = 1
        for v in row:
            if isinstance(v, Fraction):
                den = den * v.denominator // math.gcd(den, v.denominator)
        out.append([int(v * den) for v in row])
    return out


def bareiss_echelon(rows):
    """Fraction-free row echelon form.

    Returns (matrix, pivot_columns).  Pivots are chosen by smallest bit
    length within the column to limit growth.
    """
    M = [list(r) for r in _to_integer_rows(rows)]
    if not M:
        return M, []
    nrows, ncols = len(M), len(M[0])
    pivots = []
    prev = 1
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        best = None
        for i in range(r, nrows):
            v = M[i][c]
            if v and (best is None or abs(v).bit_length() < abs(M[best][c]).bit_length()):
                best = i
        if best is None:
            continue
        M[r], M[best] = M[best], M[r]
        piv = M[r][c]
        for i in range(r + 1, nrows):
            a = M[i][c]
            row_i, row_r = M[i], M[r]
            for j in range(c + 1, ncols):
                row_i[j] = (piv * row_i[j] - a * row_r[j]) // prev
            row_i[c] = 0
        # rows above r keep their scale; only the trailing block is divided
        prev = piv
        pivots.append(c)
        r += 1
    return M, pivots


def _back_substitute(M, pivots, ncols):
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for i in range(len(pivots) - 1, -1, -1):
            c = pivots[i]
            s = sum((M[i][j] * x[j] for j in range(c + 1, ncols) if x[j]), Fraction(0))
            x[c] = -s / M[i][c]
        basis.append(x)
    return basis


def nullspace_exact(rows):
    """Basis of {x : A x = 0} over Q, as lists of Fractions."""
    if not rows:
        return []
    ncols = len(rows[0])
    M, pivots = bareiss_echelon(rows)
    return _back_substitute(M, pivots, ncols)


def rank_exact(rows) -> int:
    return len(bareiss_echelon(rows)[1])


def solve_exact(A, b):
    """Unique-or-any solution x of A x = b over Q; raises InconsistentSystem."""
    aug = [list(row) + [-bv] for row, bv in zip(A, b)]
    ncols = len(A[0])
    M, pivots = bareiss_echelon(aug)
    if ncols in pivots:
        raise InconsistentSystem("right-hand side is not in the column span")
    basis = _back_substitute(M, pivots, ncols + 1)
    for x in basis:
        if x[ncols] != 0:
            return [v / x[ncols] for v in x[:ncols]]
    raise InconsistentSystem("no solution")


# -- modular ------------------------------------------------------------------

def echelon_mod_p(A, p: int):
    """Reduced row echelon form of an int matrix mod p (p < 2^31)."""
    M = np.array(A, dtype=np.int64) % p
    nrows, ncols = M.shape
    pivots = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.flatnonzero(M[r:, c])
        if not len(nz):
            continue
        i = r + int(nz[0])
        if i != r:
            M[[r, i]] = M[[i, r]]
        inv = pow(int(M[r, c]), -1, p)
        M[r] = (M[r] * inv) % p
        col = M[:, c].copy()
        col[r] = 0
        hit = np.flatnonzero(col)
        if len(hit):
            M[hit] = (M[hit] - np.outer(col[hit], M[r])) % p
        pivots.append(c)
        r += 1
    return M, pivots


def nullspace_mod_p(A, p: int):
    M, pivots = echelon_mod_p(A, p)
    ncols = M.shape[1]
    pset = set(pivots)
    basis = []
    for f in (c for c in range(ncols) if c not in pset):
        x = np.zeros(ncols, dtype=np.int64)
        x[f] = 1
        for i, c in enumerate(pivots):
            x[c] = (-M[i, f]) % p
        basis.append(x)
    return basis


def solve_mod_p(A, b, p: int):
    """A solution of A x = b mod p; raises InconsistentSystem."""
    aug = np.concatenate([np.array(A, dtype=object) % p,
                          (np.array(b, dtype=object) % p).reshape(-1, 1)], axis=1)
    M, pivots = echelon_mod_p(aug.astype(np.int64), p)
    ncols = len(A[0])
    if ncols in pivots:
        raise InconsistentSystem(f"system has no solution mod {p}")
    x = [0] * ncols
    for i, c in enumerate(pivots):
        x[c] = int(M[i, ncols])
    return x


def rational_reconstruction(a: int, m: int):
    """Fraction n/d with n/d = a mod m and |n|, d <= sqrt(m/2), or None."""
    a %= m
    bound = math.isqrt(m // 2)
    r0, r1 = m, a
    s0, s1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if s1 == 0 or abs(s1) > bound or math.gcd(r1, abs(s1)) != 1:
        return None
    return Fraction(r1, s1)


def _prime_stream(start=2**31 - 1):
    p = start
    while True:
        if is_prime(p):
            yield p
        p -= 2


class MultimodularFailure(RuntimeError):
    pass


def nullspace_multimodular(rows, max_primes: int = 4000):
    """Rational kernel vector of an integer matrix with one-dimensional kernel.

    Returns (vector, nullity).  The vector is normalised to last coordinate
    1 and verified exactly over Z.  If the kernel mod the first few primes
    is not one dimensional, or its last coordinate vanishes, the vector is
    empty and `nullity` reports what the primes showed.
    """
    A = _to_integer_rows(rows)
    crt_val = None
    modulus = 1
    last = None
    seen = []
    primes = _prime_stream()
    good = 0
    for used in range(1, max_primes + 1):
        p = next(primes)
        ker = nullspace_mod_p([[v % p for v in row] for row in A], p)
        seen.append(len(ker))
        if len(ker) != 1:
            # nullity over Q is at most the nullity mod p
            if used >= 3 and good == 0:
                return [], min(seen)
            continue
        good += 1
        v = ker[0]
        if v[-1] == 0:
            return [], 1
        inv = pow(int(v[-1]), -1, p)
        v = [int(x) * inv % p for x in v]
        if crt_val is None:
            crt_val, modulus = v, p
        else:
            minv = pow(modulus, -1, p)
            crt_val = [c + modulus * ((x - c) * minv % p) for c, x in zip(crt_val, v)]
            modulus *= p
        if good % 4 and good > 2:
            continue
        rec = [rational_reconstruction(c, modulus) for c in crt_val]
        if any(x is None for x in rec):
            continue
        if rec == last and _kernel_check(A, rec):
            return rec, 1
        last = rec
    raise MultimodularFailure("rational reconstruction did not stabilise")


def _kernel_check(A, x):
    den = 1
    for v in x:
        den = den * v.denominator // math.gcd(den, v.denominator)
    xi = [int(v * den) for v in x]
    return all(sum(a * b for a, b in zip(row, xi) if a and b) == 0 for row in A)
