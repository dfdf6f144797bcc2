from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chaoslab.densities import (DensityKind, GrowthSequence, Schedule, assign_verdict, chain_check,
                                closed_form_lower_q_density, duality_check, estimate_density, parse_kind)
from chaoslab.errors import HorizonExceeded, InvalidParameter
from chaoslab.index_sets import BlockUnion, Complement, Explicit, formula_set, is_syndetic_up_to, zelje_set

from oracles import banach_window_extrema, lower_density_samples

SQUARES = formula_set("power", q=2)
EVENS = formula_set("linear", a=2, b=0)
NATURALS = formula_set("linear", a=1, b=0)


def test_evens_lower_density():
    est = estimate_density(EVENS, DensityKind("LowerD"), 10**6)
    assert est.verdict.status == "ConvergesTo"
    assert est.verdict.value == pytest.approx(0.5, abs=1e-3)


@pytest.mark.parametrize("kind", ["LowerD", "BanachLower"])
def test_naturals_have_density_one_at_every_sample(kind):
    est = estimate_density(NATURALS, DensityKind(kind), 10**5)
    assert np.all(est.values == 1.0)
    assert est.verdict.status == "ConvergesTo" and est.verdict.value == 1.0


def test_naturals_lower_m_with_identity():
    est = estimate_density(NATURALS, DensityKind("LowerM", GrowthSequence.identity()), 10**5)
    assert np.all(est.values == 1.0)


def test_lower_samples_match_brute_force():
    A = BlockUnion(blocks=[(3, 9), (40, 41), (100, 180), (600, 900)], cap=2000)
    members = set(A.members(1, 2000).tolist())
    ref = lower_density_samples(members, 2000)
    sched = Schedule.single(2000, per_octave=8)
    est = estimate_density(A, DensityKind("LowerD"), 2000, sched)
    prev = 0
    for sample, p in zip(est.samples, sched.points):
        bucket = ref[prev:p]
        assert Fraction(sample.count, sample.norm) == min(bucket)
        prev = p


def test_banach_samples_match_sliding_window():
    A = BlockUnion(blocks=[(5, 30), (200, 260), (1000, 1500), (4000, 4100)], cap=10**5)
    members = set(A.members(1, 10**5).tolist())
    for tag, pick in (("BanachLower", 0), ("BanachUpper", 1)):
        est = estimate_density(A, DensityKind(tag), 10**5)
        for sample in est.samples[:6]:
            ext = banach_window_extrema(members, sample.index, sample.n_max)
            assert sample.count == ext[pick]


def test_squares_banach_upper_l_lower_bound():
    est = estimate_density(SQUARES, parse_kind("banach-upper-l", q=2), 10**8)
    assert all(s.value >= 1.0 for s in est.samples)
    assert est.verdict.status == "ConvergesTo" and est.verdict.value >= 1.0
    assert any("lower bound" in n for n in est.notes)


def test_squares_limsup_variant_tends_to_zero():
    est = estimate_density(SQUARES, parse_kind("banach-lower-limsup", q=2), 2**57)
    # inner limsup over the scan tail: every window of length s^2 holds at most one square
    assert all(Fraction(s.count, s.norm) == Fraction(1, s.index) for s in est.samples)
    assert est.verdict.status == "TendsToZero"


@pytest.mark.parametrize("rule,q", [("power", 2), ("power", 3)])
def test_closed_form_power_sets(rule, q):
    est = closed_form_lower_q_density(formula_set(rule, q=q), q, 10**5)
    assert est.value == pytest.approx(1.0, abs=1e-9)
    assert est.bounded and est.L == pytest.approx(1.0)


def test_closed_form_exponential_set():
    est = closed_form_lower_q_density(formula_set("exp2"), 2, 10**4)
    assert est.verdict.status == "TendsToZero"
    assert not est.bounded


@pytest.mark.parametrize("A", [EVENS, SQUARES, zelje_set()], ids=["evens", "squares", "zelje"])
def test_duality_examples(A):
    rep = duality_check(A, 10**6)
    assert rep.ok and rep.points_checked == 10**6 and not rep.failures


def test_chain_evens_and_naturals():
    for A, v in ((EVENS, 0.5), (NATURALS, 1.0)):
        rep = chain_check(A, 10**6)
        assert rep.ok and not rep.warnings
        for est in rep.estimates.values():
            assert est.verdict.value == pytest.approx(v, abs=1e-3)


def test_zelje_chain_extremes():
    A = zelje_set()
    low = chain_check(A, 2**62).estimates
    assert low["BanachLower"].verdict.status == "TendsToZero"
    assert low["LowerD"].verdict.status == "TendsToZero"
    # a horizon inside the block [a_6, a_7] shows the upper densities
    high = chain_check(A, 2**48)
    assert high.ok
    assert high.estimates["UpperD"].verdict.value == pytest.approx(1.0, abs=1e-3)
    assert high.estimates["BanachUpper"].verdict.value == 1.0


def test_verdict_rules():
    assert assign_verdict([0.5, 1e-4, 9e-5, 8e-5, 7e-5, 6e-5]).status == "TendsToZero"
    assert assign_verdict([1, 2, 3]).status == "Inconclusive"
    assert assign_verdict([1, 2, 4, 8, 16, 32, 64]).status == "DivergesToInfinity"
    # bounded records are never read as divergence
    assert assign_verdict([0.1, 0.2, 0.3, 0.4, 0.5, 0.6]).status == "Inconclusive"
    assert assign_verdict([0.3, 0.2, 0.25, 0.25, 0.25, 0.25, 0.2502]).status == "ConvergesTo"


def test_kind_and_growth_validation():
    with pytest.raises(InvalidParameter):
        DensityKind("LowerD", GrowthSequence.power(2))
    with pytest.raises(InvalidParameter):
        DensityKind("Nope")
    with pytest.raises(InvalidParameter):
        GrowthSequence.from_lambda(0)
    with pytest.raises(InvalidParameter):
        GrowthSequence.logscale(1, 1.5)


def test_horizon_guards():
    with pytest.raises(HorizonExceeded):
        estimate_density(Explicit([1, 2, 3]), DensityKind("LowerD"), 10)
    with pytest.raises(HorizonExceeded):
        GrowthSequence.power(4).floor(np.array([2**16]))


def test_growth_floor_and_inverse():
    g = GrowthSequence.power(2)
    n = np.arange(1, 2000)
    assert np.array_equal(g.floor(n), n**2)
    x = np.array([1, 2, 5, 10**6, 10**6 + 1])
    assert g.inverse_ceil(x).tolist() == [1, 2, 3, 1000, 1001]


def test_class_r_scaling():
    for g in (GrowthSequence.identity(), GrowthSequence.power(1.5), GrowthSequence.logscale(1.0, 0.5)):
        for a in (0.25, 3.0):
            assert g.scaled(a).class_r_diagnostic(10**4) == pytest.approx(a * g.class_r_diagnostic(10**4), rel=1e-12)


def test_class_r_diagnostic_at_large_n_is_cheap():
    assert GrowthSequence.identity().liminf_ratio(2**50) == 1.0


# ------------------------------------------------------------ properties

block_sets = st.lists(st.tuples(st.integers(1, 40), st.integers(0, 40)), min_size=2, max_size=60).map(
    lambda spec: BlockUnion(blocks=_chain(spec), cap=10**9))


def _chain(spec):
    pos, out = 0, []
    for gap, length in spec:
        lo = pos + gap
        out.append((lo, lo + length))
        pos = lo + length + 1
    return out


sets = st.one_of(block_sets, st.builds(lambda a, b: formula_set("linear", a=a, b=b), st.integers(1, 7),
                                       st.integers(0, 6)),
                 st.sampled_from([SQUARES, formula_set("power", q=1.5)]))


@given(sets, st.sampled_from([(1.0, 1.5), (1.5, 2.0), (1.0, 2.0), (2.0, 3.0)]))
def test_lower_m_monotone_in_growth(A, qs):
    g1, g2 = GrowthSequence.power(qs[0]), GrowthSequence.power(qs[1])
    n = np.arange(1, 400)
    c1 = A.count_upto(g1.floor(n))
    c2 = A.count_upto(g2.floor(n))
    assert np.all(c2 >= c1)
    e1 = estimate_density(A, DensityKind("LowerM", g1), 300, Schedule.single(300, dense=True))
    e2 = estimate_density(A, DensityKind("LowerM", g2), 300, Schedule.single(300, dense=True))
    assert all(b.value >= a.value for a, b in zip(e1.samples, e2.samples) if a.index == b.index)


@given(sets)
def test_identity_growth_reduces_to_ordinary_density(A):
    for m, ordinary in (("LowerM", "LowerD"), ("UpperM", "UpperD")):
        a = estimate_density(A, DensityKind(m, GrowthSequence.identity()), 5000)
        b = estimate_density(A, DensityKind(ordinary), 5000)
        assert [s.to_dict() for s in a.samples] == [s.to_dict() for s in b.samples]


@given(st.integers(1, 12), st.integers(0, 11), st.sampled_from([1.0, 1.5, 2.0]))
def test_syndetic_sets_have_lower_m_bound(g, offset, q):
    # first element in [1, g] so that the gap bound also covers the start
    A = formula_set("linear", a=g, b=offset % g + 1 - g)
    N = 10**5
    ok, _ = is_syndetic_up_to(A, N, g)
    assert ok
    growth = GrowthSequence.power(q)
    n = np.arange(1, int(N ** (1 / q)) + 1)
    m = growth.floor(n)
    sample = A.count_upto(m) / n
    assert np.all(sample >= (m / g - 1) / n - 1e-12)


@given(sets, st.integers(10, 20000))
def test_duality_is_exact_on_random_sets(A, horizon):
    assert duality_check(A, horizon).ok


@given(sets)
def test_complement_duality_per_sample(A):
    lo = estimate_density(A, DensityKind("LowerD"), 3000, Schedule.single(3000, dense=True))
    up = estimate_density(Complement(A), DensityKind("UpperD"), 3000, Schedule.single(3000, dense=True))
    for a, b in zip(lo.samples, up.samples):
        assert Fraction(a.count, a.norm) + Fraction(b.count, b.norm) == 1
