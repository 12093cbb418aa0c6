import json
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from conftest import CERT_PRIMES
from qcong import forms as fm
from qcong import hecke
from qcong import moments as mo
from qcong import series as qs

# (ell, Q, c, mu) of the expected certificates
EXPECTED = {
    11: (19, 7, 22006),
    17: (7, 1, 243),
    19: (5, 1, 99),
    29: (13, 7, 18583),
    31: (29, 13, 409532),
    37: (5, 7, 1349),
}


def test_chi12():
    assert [hecke.chi12(n) for n in (1, 5, 6, 7, 11, 19, 25)] == [1, -1, 0, -1, 1, -1, 1]


def test_chi12_of_a_square_is_one():
    assert all(hecke.chi12(Q * Q) == 1 for Q in qs.primes_between(5, 100))


def test_eta_form_validation():
    with pytest.raises(ValueError):
        hecke.EtaQuotientForm(6, fm.ONE)
    with pytest.raises(ValueError):
        hecke.EtaQuotientForm(25, fm.ONE)
    g = hecke.EtaQuotientForm(7, fm.E6)
    assert (g.m, g.k) == (6, 9)


def test_eta_form_series_lives_on_one_class():
    g = hecke.EtaQuotientForm(13, fm.E4)
    s = g.series(24 * 20)
    assert all(e % 24 == 13 for e in s.nonzero())
    assert s[13] == 1 and s[37] == -13 + 240


def test_eta13_eigenvalue_19():
    rec = hecke.eigenvalue(hecke.EtaQuotientForm(13, fm.ONE), 19, verify_terms=50)
    assert rec.lam == -2901404 and rec.lambda_ == rec.lam
    assert rec.verified_terms >= 50
    assert rec.lam % 11 == 0


def test_eta7_e6_eigenvalue_7():
    rec = hecke.eigenvalue(hecke.EtaQuotientForm(7, fm.E6), 7, verify_terms=50)
    assert rec.lam == -24959264 and rec.lam % 17 == 0


@pytest.mark.parametrize("F,Q,lam", [(fm.ONE, 5, 11730), (fm.E4, 5, 5849490), (fm.E6, 5, 35483250)])
def test_eta13_eigenvalues_at_5(F, Q, lam):
    assert hecke.eigenvalue(hecke.EtaQuotientForm(13, F), Q).lam == lam


def test_t_q2_is_lambda_times_input():
    g = hecke.EtaQuotientForm(13, fm.ONE)
    trunc = 24 * 50
    out = hecke.t_Q2(g, 19, trunc)
    assert out == g.series(trunc).scale(-2901404)
    assert all(e % 24 == 13 for e in out.nonzero())


def test_weight_one_half_is_rejected():
    with pytest.raises(ValueError):
        hecke.eigenvalue(hecke.EtaQuotientForm(1, fm.ONE), 5)


def test_t_q2_rejects_small_q():
    with pytest.raises(ValueError):
        hecke.t_Q2(hecke.EtaQuotientForm(1, fm.ONE), 3, 100)


@settings(max_examples=12, deadline=None)
@given(r=st.sampled_from([1, 5, 7, 11, 13, 17, 19, 23]),
       F=st.sampled_from([fm.ONE, fm.E4, fm.E6, fm.E4 ** 2, fm.E4 * fm.E6]),
       Q=st.sampled_from([5, 7, 11, 13, 17, 19, 23]))
def test_one_dimensional_spaces_give_eigenforms(r, F, Q):
    g = hecke.EtaQuotientForm(r, F)
    assume(g.k >= 1)
    rec = hecke.eigenvalue(g, Q, verify_terms=20)
    assert hecke.t_Q2(g, Q, 24 * 20) == g.series(24 * 20).scale(rec.lam)


def test_not_an_eigenform_when_dim_exceeds_one():
    with pytest.raises(hecke.NotAnEigenform):
        hecke.eigenvalue(hecke.EtaQuotientForm(1, fm.E4 ** 3), 5)


def test_hecke_image_stays_in_the_eta_span():
    g = hecke.EtaQuotientForm(5, fm.Delta * fm.E4 ** 3)
    assert g.m == 24
    assert hecke.hecke_image_in_span(g, 5, 12)


@pytest.mark.parametrize("ell,r,F,Q", [(11, 13, fm.ONE, 19), (17, 7, fm.E6, 7), (19, 5, fm.E4 ** 2, 5)])
def test_scan_finds_the_first_q(ell, r, F, Q):
    res = hecke.scan_Q(hecke.EtaQuotientForm(r, F), ell)
    assert res.Q == Q and not res.exhausted
    assert res.record.lam % ell == 0
    assert res.residues[Q] == 0
    assert all(res.residues[p] for p in res.residues if p < Q)


def test_scan_exhausts_a_tiny_bound():
    res = hecke.scan_Q(hecke.EtaQuotientForm(13, fm.ONE), 11, q_max=17)
    assert res.exhausted and res.Q is None


def test_smallest_offset():
    assert hecke.smallest_offset(11 * 19, 19) == 7
    assert hecke.smallest_offset(17 * 7, 7) == 1
    assert hecke.smallest_offset(31 * 29, 29) == 13


def test_derive_certificate_ell17():
    cong = mo.SptCongruence(17, 5, 7, fm.E6, 14)
    cert = hecke.derive_certificate(cong, 7)
    assert (cert.Q, cert.c, cert.mu, cert.A) == (7, 1, 243, 17 * 7 ** 4)
    assert cert.lam == -24959264 and cert.status == "derived"


def test_derive_certificate_refuses_a_bad_q():
    cong = mo.SptCongruence(17, 5, 7, fm.E6, 14)
    with pytest.raises(hecke.NotAnEigenform):
        hecke.derive_certificate(cong, 5)


@pytest.mark.parametrize("ell", sorted(EXPECTED))
def test_certificate_arithmetic(ell):
    Q, c, mu = EXPECTED[ell]
    assert (ell * Q * c) % 24 == 23 and math.gcd(c, Q) == 1
    assert 24 * mu == ell * Q ** 3 * c + 1
    assert (24 * mu) % ell == 1


def test_certificate_json_roundtrip():
    cong = mo.SptCongruence(17, 5, 7, fm.E6, 14)
    cert = hecke.derive_certificate(cong, 7, lam=-24959264)
    text = cert.to_json()
    d = json.loads(text)
    assert d["lambda"] == "-24959264" and d["mu"] == 243
    back = hecke.CongruenceCertificate.from_json(text)
    assert back == cert


def test_verify_certificate_ell17():
    cert = hecke.derive_certificate(mo.SptCongruence(17, 5, 7, fm.E6, 14), 7, lam=-24959264)
    v = hecke.verify_certificate(cert, 100)
    assert v.ok and v.mode == "progression" and v.direct_checked
    assert cert.status == "verified" and cert.samples_verified == 100


def test_verify_certificate_rejects_a_shifted_offset():
    cert = hecke.derive_certificate(mo.SptCongruence(17, 5, 7, fm.E6, 14), 7, lam=-24959264)
    bad = hecke.CongruenceCertificate(**{**cert.__dict__, "mu": cert.mu + 17})
    v = hecke.verify_certificate(bad, 100)
    assert not v.ok and v.witness is not None


def test_verify_certificate_rejects_a_wrong_class():
    cert = hecke.derive_certificate(mo.SptCongruence(17, 5, 7, fm.E6, 14), 7, lam=-24959264)
    bad = hecke.CongruenceCertificate(**{**cert.__dict__, "mu": cert.mu + 1})
    assert not hecke.verify_certificate(bad, 10).ok


def test_trivial_certificate_ell5():
    cong = mo.SptCongruence(5, 4, 19, fm.zero_form(0), 0)
    cert = hecke.trivial_certificate(cong)
    assert (cert.Q, cert.A, cert.mu) == (1, 5, 4)
    assert hecke.verify_certificate(cert, 100).ok


def test_rank_certificates_mod11():
    rep = hecke.rank_certificates_mod11()
    assert rep.eigenvalues["1"] == -2901404
    assert all(v % 11 == 0 for v in rep.eigenvalues.values())
    assert all(rep.annihilation.values())
    got = [(c.Q, c.c, c.mu) for c in rep.certificates]
    assert got == [(19, 11, 4322599), (19, 5, 172904)]
    assert rep.certificates[0].A == 5 ** 4 * 11 * 19 ** 4
    assert rep.certificates[1].A == 11 ** 2 * 19 ** 4


def test_u11_annihilation_fails_for_non_examples():
    # tau(11) = 1 mod 11
    assert not hecke.annihilated_by_U11(fm.ONE)
    assert not hecke.annihilated_by_U11(fm.E4 * fm.E6)


@pytest.mark.parametrize("r,ell", [(1, 11), (13, 11), (7, 17), (31, 29)])
def test_euler_power_mod_matches_exact(r, ell):
    n = 700
    exact = qs.euler_E(r, n).coeffs
    assert [int(x) % ell for x in exact] == hecke.euler_power_mod(r, n, ell).tolist()


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(-10**6, 10**6), min_size=1, max_size=60),
       st.lists(st.integers(-10**6, 10**6), min_size=1, max_size=60),
       st.sampled_from([5, 11, 37, 10007]))
def test_conv_mod_matches_exact_product(a, b, m):
    n = 50
    exact = qs.QSeries(a, trunc=n) * qs.QSeries(b, trunc=n)
    got = hecke.conv_mod(np.array(a) % m, np.array(b) % m, m, n)
    assert got.tolist() == [int(x) % m for x in exact.tolist()]


def test_form_mod_matches_exact():
    F = fm.E4 ** 2 * fm.E6 + fm.Delta * 3
    n = 400
    assert hecke.form_mod(F, n, 37).tolist() == [int(x) % 37 for x in F.series(n).tolist()]


def test_sparse_euler_coefficients():
    exact = qs.euler_E(13, 3000).coeffs
    idx = [0, 5, 195, 1000, 2999]
    assert hecke.euler_power_coeffs_mod(13, 11, idx) == [int(exact[i]) % 11 for i in idx]
    with pytest.raises(ValueError):
        hecke.euler_power_coeffs_mod(7, 11, [3])


@pytest.mark.slow
@pytest.mark.parametrize("ell", CERT_PRIMES)
def test_discovery_emits_the_expected_certificate(ell, discover):
    d = discover(ell)
    assert d.outcome == "certificate"
    assert (d.certificate.Q, d.certificate.c, d.certificate.mu) == EXPECTED[ell]
    assert d.verdict.ok and d.verdict.samples >= 100


@pytest.mark.slow
def test_discovery_ell23_has_no_eigenform(discover):
    d = discover(23)
    assert d.outcome == "no-eigenform" and d.certificate is None
    assert d.message == "no eigenform; no AP certificate"


@pytest.mark.slow
@pytest.mark.parametrize("ell", [5, 7, 13])
def test_discovery_trivial_primes(ell, discover):
    d = discover(ell)
    assert d.outcome == "trivial" and d.verdict.ok


@pytest.mark.slow
def test_p13_on_the_ell11_progression():
    # spt(11 * 19^4 n + 22006) = 4 p13(19^4 n + 2000) mod 11
    vals = hecke.euler_power_coeffs_mod(13, 11, [19 ** 4 * n + 2000 for n in range(201)])
    assert set(vals) == {0}
