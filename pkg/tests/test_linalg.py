from fractions import Fraction
import random

import pytest
from hypothesis import given, settings, strategies as st

from qcong import linalg as la


def _apply(rows, x):
    return [sum(Fraction(a) * b for a, b in zip(r, x)) for r in rows]


matrices = st.integers(1, 6).flatmap(lambda n: st.integers(1, 7).flatmap(
    lambda m: st.lists(st.lists(st.integers(-9, 9), min_size=m, max_size=m), min_size=n, max_size=n)))


@settings(max_examples=80, deadline=None)
@given(matrices)
def test_nullspace_vectors_are_kernel(rows):
    basis = la.nullspace_exact(rows)
    assert len(basis) == len(rows[0]) - la.rank_exact(rows)
    for v in basis:
        assert all(x == 0 for x in _apply(rows, v))


@settings(max_examples=80, deadline=None)
@given(matrices, st.integers(0, 3))
def test_mod_p_rank_bounded_by_exact(rows, i):
    p = (101, 10007, 2**31 - 1, 3)[i]
    ech, piv = la.echelon_mod_p(rows, p)
    assert len(piv) <= la.rank_exact(rows)


def test_solve_exact_and_inconsistent():
    A = [[1, 2], [3, 4]]
    assert la.solve_exact(A, [5, 6]) == [Fraction(-4), Fraction(9, 2)]
    with pytest.raises(la.InconsistentSystem):
        la.solve_exact([[1, 1], [2, 2]], [1, 3])


def test_solve_mod_p():
    x = la.solve_mod_p([[1, 2], [3, 4]], [5, 6], 7)
    assert [(1 * x[0] + 2 * x[1]) % 7, (3 * x[0] + 4 * x[1]) % 7] == [5, 6]


@settings(max_examples=60, deadline=None)
@given(st.integers(-10**6, 10**6), st.integers(1, 10**6))
def test_rational_reconstruction(a, b):
    m = (2**61 - 1) * (2**31 - 1)
    if b % (2**61 - 1) == 0 or b % (2**31 - 1) == 0:
        return
    x = Fraction(a, b)
    r = la.rational_reconstruction(x.numerator * pow(x.denominator, -1, m) % m, m)
    assert r == x


def _one_dim_kernel(n, seed):
    rnd = random.Random(seed)
    v = [Fraction(rnd.randint(-10**12, 10**12), rnd.randint(1, 10**6)) for _ in range(n - 1)] + [Fraction(1)]
    rows = []
    for _ in range(n + 5):
        r = [rnd.randint(-50, 50) for _ in range(n - 1)]
        s = -sum(Fraction(a) * b for a, b in zip(r, v[:-1]))
        den = s.denominator
        rows.append([a * den for a in r] + [s.numerator])
    return rows, v


@pytest.mark.parametrize("n,seed", [(5, 1), (12, 2), (30, 3)])
def test_multimodular_matches_bareiss(n, seed):
    rows, v = _one_dim_kernel(n, seed)
    vec, nullity = la.nullspace_multimodular(rows)
    assert nullity == 1 and vec == v
    exact = la.nullspace_exact(rows)
    assert len(exact) == 1
    assert [x / exact[0][-1] for x in exact[0]] == v


def test_multimodular_reports_bigger_kernel():
    vec, nullity = la.nullspace_multimodular([[1, 1, 1], [2, 2, 2]])
    assert nullity == 2 and not vec
