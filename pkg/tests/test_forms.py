from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from qcong import forms as fm
from qcong import series as qs
from qcong.linalg import InconsistentSystem
from qcong.series import QQ, ZZ, Zmod

# sympy values, frozen
BERNOULLI = {0: Fraction(1), 2: Fraction(1, 6), 4: Fraction(-1, 30), 6: Fraction(1, 42),
             8: Fraction(-1, 30), 10: Fraction(5, 66), 12: Fraction(-691, 2730), 14: Fraction(7, 6)}
PRIMES = (5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def test_bernoulli():
    for n, v in BERNOULLI.items():
        assert fm.bernoulli(n) == v
    with pytest.raises(ValueError):
        fm.bernoulli(5)


def test_phi():
    assert fm.phi(1, 10)[6] == 12
    assert fm.phi(9, 10)[1] == 1


def test_sigma_table_against_divisor_sums():
    for j in (1, 3, 7):
        t = fm.sigma_table(j, 400)
        for n in range(1, 400):
            assert t[n] == sum(d**j for d in range(1, n + 1) if n % d == 0)


def test_eisenstein_leading_coefficients():
    assert fm.eisenstein_series(4, 3).tolist() == [1, 240, 2160]
    assert fm.eisenstein_series(6, 2).tolist() == [1, -504]


def test_e10_is_1_minus_264_phi9():
    assert fm.eisenstein_series(10, 50) == qs.constant(1, 50) - fm.phi(9, 50).scale(264)
    assert (fm.E4 * fm.E6).series(50) == fm.eisenstein_series(10, 50)


def test_e12_is_rational():
    e12 = fm.eisenstein(12)
    assert e12.terms == {(0, 3, 0, 0): 1, (0, 0, 0, 1): Fraction(-432000, 691)}


def test_eisenstein_as_polynomials():
    assert fm.eisenstein(8).terms == {(0, 2, 0, 0): 1}
    assert fm.eisenstein(2) == fm.E2
    assert fm.eisenstein(14).series(30, QQ) == fm.eisenstein_series(14, 30).change_ring(QQ)


def test_delta_is_e4_cubed_minus_e6_squared():
    lhs = fm.Delta.series(40)
    rhs = ((fm.E4 ** 3 - fm.E6 ** 2).series(40, QQ)).scale(Fraction(1, 1728))
    assert lhs.change_ring(QQ) == rhs
    assert lhs[1] == 1 and lhs[2] == -24


def test_weight_check():
    with pytest.raises(ValueError):
        fm.Level1Form({(0, 1, 0, 0): 1, (0, 0, 1, 0): 1}, 4)


@pytest.mark.parametrize("w", range(4, 61, 2))
def test_dim_full_is_dim_cusp_plus_one(w):
    assert len(fm.level1_basis(w, "full")) == len(fm.level1_basis(w, "cusp")) + 1


def test_dimensions():
    assert fm.dim_M(6) == 1
    assert fm.dim_S(16) == 1
    assert fm.dim_S(60) == 5
    assert fm.dim_M(2) == 0 and fm.dim_M(0) == 1


def test_to_basis_delta():
    basis = fm.level1_basis(12, "full")
    f = fm.combine(fm.to_basis(fm.Delta.series(20), basis), basis, 12)
    assert f.series(30) == fm.Delta.series(30)


def test_to_basis_rejects_non_forms():
    with pytest.raises(InconsistentSystem):
        fm.to_basis(fm.E2.series(20), fm.level1_basis(2, "full") or [])
    with pytest.raises(InconsistentSystem):
        fm.as_level1(fm.eisenstein_series(4, 20), 6)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([12, 24, 36, 48]), st.data())
def test_to_basis_roundtrip(w, data):
    basis = fm.level1_basis(w, "full")
    coords = data.draw(st.lists(st.integers(-20, 20), min_size=len(basis), max_size=len(basis)))
    f = fm.combine(coords, basis, w)
    assert fm.to_basis(f.series(fm.sturm_bound(w) + 10), basis) == [Fraction(c) for c in coords]


def test_sturm_verify():
    v = fm.sturm_verify((fm.E4 * fm.E6).series(5), fm.eisenstein_series(10, 5), 10)
    assert v.status == "proved" and v.bound == 1
    short = fm.sturm_verify(fm.E4.series(1), fm.E4.series(1), 4)
    assert short.status == "checked only"
    bad = fm.sturm_verify(fm.E4.series(5), fm.E6.series(5), 4)
    assert bad.status == "mismatch" and bad.index == 1


@pytest.mark.parametrize("ell", PRIMES)
def test_e_ell_minus_1_is_one_mod_ell(ell):
    assert fm.eisenstein_series(ell - 1, 200, Zmod(ell)) == qs.constant(1, 200, Zmod(ell))


def test_e2_is_e12_mod_11():
    ring = Zmod(11)
    assert fm.E2.series(200, ring) == fm.eisenstein_series(12, 200, ring)
    assert fm.eisenstein_series(10, 200, ring) == qs.constant(1, 200, ring)


def test_e16_is_one_mod_17():
    v = fm.sturm_verify(fm.eisenstein_series(16, 5), qs.constant(1, 5), 16, 17)
    assert v.status == "proved"


def test_quasimodular_flags():
    assert (fm.E2 * fm.E4).is_quasimodular()
    assert not (fm.E4 * fm.E6).is_quasimodular()
    with pytest.raises(ValueError):
        fm.hecke_T_integer(fm.E2 * fm.E4, 5, 10)


def test_delta_e4_hecke_11():
    s = fm.hecke_T_integer(fm.Delta * fm.E4, 11, 20)
    assert all(c % 11 == 0 for c in s.tolist())


@pytest.mark.parametrize("ell", [2, 3, 5, 7])
def test_hecke_on_delta_is_tau_multiple(ell):
    tau = fm.Delta.series(40)
    s = fm.hecke_T_integer(fm.Delta, ell, 30)
    assert s == tau.truncate(30).scale(tau[ell])


@pytest.mark.parametrize("f,ell", [(fm.Delta, 5), (fm.Delta * fm.E4, 7), (fm.Delta ** 2, 5),
                                   (fm.Delta * fm.E6, 3)])
def test_hecke_T_is_U_mod_ell_power(f, ell):
    m = ell ** (f.weight - 1)
    T = fm.hecke_T_integer(f, ell, 25)
    U = qs.U_op(f.series(ell * 25), ell)
    assert all((a - b) % m == 0 for a, b in zip(T.tolist(), U.tolist()))


def test_hecke_linear():
    a = fm.hecke_T_integer(fm.Delta * fm.E4, 5, 20)
    b = fm.hecke_T_integer(fm.Delta * fm.E4 + fm.Delta * fm.E4 * 3, 5, 20)
    assert b == a.scale(4)


def test_psi_chain_mod_121():
    ring = Zmod(121)
    f = fm.Delta ** 5 - fm.Delta ** 5 * fm.E4 * fm.E6
    lhs = qs.U_op(f.series(11 * 10), 11).change_ring(ring)
    assert lhs == (fm.E4 ** 2 * fm.Delta).series(10, ring).scale(22)


@pytest.mark.parametrize("ell,beta,r,lam", [(5, 4, 19, 1), (7, 5, 17, 1), (11, 6, 13, 1), (13, 6, 11, 1),
                                            (17, 5, 7, 1), (23, 1, 1, 1), (37, 17, 11, 2)])
def test_pfcong_params(ell, beta, r, lam):
    p = fm.PFcongParams.for_prime(ell)
    assert (p.beta, p.r, p.lambda_exp) == (beta, r, lam)
    assert 24 * p.lambda_exp - ell == p.r and (24 * p.beta) % ell == 1


@pytest.mark.parametrize("ell,v", [(5, 1), (7, 2), (11, 5)])
def test_h_ell_valuation(ell, v):
    h = fm.h_ell(ell, 30)
    assert h.valuation() == v and h[v] == 1


@pytest.mark.parametrize("ell", [5, 7, 11, 13])
@pytest.mark.parametrize("F", [fm.ONE, fm.E4, fm.E6], ids=["1", "E4", "E6"])
def test_chua_lift_and_pfcong(ell, F):
    j = fm.chua_lift(ell, F)
    assert j.weight == F.weight + ell - 1
    G = fm.pfcong_G(ell, F, check_terms=100)
    assert G.weight in (0, F.weight + ell - 1 - 12 * fm.PFcongParams.for_prime(ell).lambda_exp)


def test_chua_small_cases_vanish():
    assert fm.chua_lift(5, fm.ONE).is_zero()
    assert fm.chua_lift(11, fm.ONE).is_zero()
    j13 = fm.chua_lift(13, fm.ONE)
    assert set(j13.terms) <= {(0, 0, 0, 1)}


@pytest.mark.parametrize("ell", [5, 7, 11])
def test_pfcong_recovers_ramanujan(ell):
    assert fm.pfcong_G(ell, fm.ONE).is_zero()


def test_pfcong_13():
    G = fm.pfcong_G(13, fm.ONE)
    assert G.weight == 0 and G.terms[(0, 0, 0, 0)] % 13 == 11


def test_pfcong_17_e4():
    G = fm.pfcong_G(17, fm.ONE)
    assert G.reduce_coefficients(17).terms == {(0, 1, 0, 0): 7}


def test_pfcong_detects_a_wrong_g():
    with pytest.raises(fm.CongruenceFailure):
        fm.verify_pfcong(13, fm.ONE, fm.Level1Form({(0, 0, 0, 0): 1}, 0), 40)


def test_reduce_quasimodular():
    poly = fm.E2 * fm.E4 + fm.E2 ** 2
    red = fm.reduce_quasimodular(poly, 11)
    assert not red.is_quasimodular()
    ring = Zmod(11)
    assert red.series(200, ring) == poly.series(200, ring)
