import pytest
from hypothesis import given, settings, strategies as st

from qcong import partitions as pt
from qcong import series as qs

# independent oracles (sympy enumeration, frozen)
SPT_0_30 = [0, 1, 3, 5, 10, 14, 26, 35, 57, 80, 119, 161, 238, 315, 440, 589, 801, 1048, 1407,
            1820, 2399, 3087, 3998, 5092, 6545, 8263, 10486, 13165, 16562, 20630, 25773]
N2_1_25 = [0, 2, 8, 20, 42, 80, 140, 238, 380, 602, 910, 1372, 1996, 2900, 4102, 5790, 8002,
           11046, 14980, 20282, 27090, 36092, 47546, 62510, 81374]
M6_1_25 = [2, 128, 1458, 8320, 32710, 103092, 276330, 666952, 1466820, 3036720, 5912192,
           11070048, 19831786, 34564140, 58280640, 96247272, 154885698, 245264580, 380329460,
           582089640, 875834784, 1303291968, 1911962890, 2778852600, 3989976100]
P_LARGE = {100: 190569292, 200: 3972999029388, 1000: 24061467864032622473692149727991}


def test_p_values():
    assert pt.p_of(0) == 1 and pt.p_of(4) == 5 and pt.p_of(6) == 11
    for n, v in P_LARGE.items():
        assert pt.p_of(n) == v


def test_p_matches_enumeration():
    assert all(pt.p_of(n) == sum(1 for _ in pt.partitions(n)) for n in range(31))


def test_partitions_of_4():
    parts = sorted(tuple(p) for p in pt.partitions(4))
    assert parts == [(1, 1, 1, 1), (2, 1, 1), (2, 2), (3, 1), (4,)]


@pytest.mark.parametrize("part,rank,crank", [([4], 3, 4), ([1, 1, 1, 1], -3, -4), ([2, 2], 0, 2),
                                             ([2, 1, 1], -1, -2), ([3, 1], 1, 0)])
def test_rank_and_crank(part, rank, crank):
    assert pt.rank_of(part) == rank
    assert pt.crank_of(part) == crank


def test_empty_partition_rejected():
    with pytest.raises(ValueError):
        pt.rank_of([])
    with pytest.raises(ValueError):
        pt.crank_of([])


def test_n1_crank_convention():
    for method in ("enumerate", "dp"):
        assert pt.count_stats(1, method).crank_counts == {-1: 1, 0: -1, 1: 1}


def test_stats_of_4():
    s = pt.count_stats(4, "enumerate")
    assert s.spt == 10 and s.p == 5
    assert sum(s.rank_counts.values()) == 5
    assert all(s.rank_counts[m] == s.rank_counts.get(-m, 0) for m in s.rank_counts)


def test_enumeration_limit():
    with pytest.raises(ValueError):
        pt.count_stats(41, "enumerate")


def test_enumerate_and_dp_agree():
    for n in range(31):
        assert pt.count_stats(n, "enumerate") == pt.count_stats(n, "dp")


def test_moments_small():
    assert pt.moment(4, 2, "crank") == 40
    assert pt.moment(4, 2, "rank") == 20
    assert pt.moment(1, 2, "crank") == 2
    with pytest.raises(ValueError):
        pt.moment(4, 3, "rank")


def test_moments_against_oracle():
    assert [pt.moment(n, 2, "rank") for n in range(1, 26)] == N2_1_25
    assert [pt.moment(n, 6, "crank") for n in range(1, 26)] == M6_1_25


def test_spt_table():
    assert [pt.spt_of(n, "enumerate") for n in range(31)] == SPT_0_30
    assert [pt.spt_of(n) for n in range(31)] == SPT_0_30
    assert pt.spt_of(9) % 5 == 0


def test_spt_mod_matches_exact():
    exact = pt.spt_series(300)
    for m in (5, 7, 11, 13, 10**9 + 7):
        assert list(pt.spt_series(300, m)) == [int(v) % m for v in exact]


def test_spt_22006_mod_11():
    assert pt.spt_mod(22006, 11) == 0


@pytest.mark.parametrize("n", range(1, 201, 7))
def test_identities_to_200(n):
    s = pt.count_stats(n)
    p, N2, M2 = s.p, pt.moment(n, 2, "rank") if n else 0, pt.moment(n, 2, "crank") if n else 0
    assert 2 * s.spt == 2 * n * p - N2
    assert M2 == 2 * n * p
    assert 2 * s.spt == M2 - N2
    assert sum(s.rank_counts.values()) == p and sum(s.crank_counts.values()) == p
    assert all(s.rank_counts[m] == s.rank_counts.get(-m, 0) for m in s.rank_counts)
    for k in (1, 3, 5, 7, 9):
        assert sum(m**k * c for m, c in s.rank_counts.items()) == 0
        if n >= 2:
            assert sum(m**k * c for m, c in s.crank_counts.items()) == 0


@pytest.mark.parametrize("t,beta,count", [(5, 4, 50), (7, 5, 40), (11, 6, 50)])
def test_crank_classes_equidistributed(t, beta, count):
    for n in range(count):
        N = t * n + beta
        if N > 600:
            break
        assert set(pt.residue_counts(N, t, "crank").values()) == {pt.p_of(N) // t}


def test_residue_counts_examples():
    assert set(pt.residue_counts(6, 11, "crank").values()) == {1}
    assert set(pt.residue_counts(5, 7, "crank").values()) == {1}
    assert sum(pt.residue_counts(23, 5, "rank").values()) == pt.p_of(23)


@pytest.mark.parametrize("t,beta", [(5, 4), (7, 5), (13, 6)])
def test_spt_ramanujan_type(t, beta):
    spt = pt.spt_series(2001, t)
    assert all(spt[n] == 0 for n in range(beta, 2001, t))


def test_theorem1_examples():
    assert pt.spt_of(1) % 5 == (-2 * (1 + 1) * 1) % 5
    for t in (5, 7, 13):
        assert pt.theorem1_check(t, 400).ok
    with pytest.raises(ValueError):
        pt.theorem1_check(11, 10)


def test_conjecture_small():
    r = pt.conjecture_scan(10, 60)
    assert r.ok and r.checked == 300
    assert '"status": "ok"' in r.lines()[0]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 40))
def test_spt_enumeration_matches_series(n):
    assert pt.spt_of(n, "enumerate") == pt.spt_of(n)


def test_partition_generator_matches_series():
    P = qs.partition_series(41)
    assert all(sum(1 for _ in pt.partitions(n)) == P[n] for n in range(41))
