import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chaoslab.errors import HorizonExceeded, InsufficientData, InvalidParameter, UnknownConstruction
from chaoslab.index_sets import (BlockUnion, Complement, Explicit, Union, build_paper_set, formula_set,
                                 from_config, is_syndetic_up_to, manjoza_bounds, zelje_partial_sums)

from oracles import count_in, floor_pow_ln, zelje_members

SQUARES = formula_set("power", q=2)
EVENS = formula_set("linear", a=2, b=0)
NATURALS = formula_set("linear", a=1, b=0)


def test_small_counts():
    assert SQUARES.count_in_interval(1, 100) == 10
    assert EVENS.count_in_interval(1, 10) == 5
    assert Complement(SQUARES).count_in_interval(1, 100) == 90


def test_vectorised_counts_match_scalar():
    n = np.array([0, 1, 3, 4, 99, 100, 10**12])
    assert SQUARES.count_upto(n).tolist() == [0, 1, 1, 2, 9, 10, 10**6]


def test_syndetic_examples():
    assert is_syndetic_up_to(EVENS, 10**6, 2)[0]
    ok, prof = is_syndetic_up_to(SQUARES, 10**6, 100)
    assert not ok
    assert prof.max_gap_up_to(10**6) == 1000**2 - 999**2
    assert is_syndetic_up_to(NATURALS, 10, 1)[0]


def test_syndetic_needs_two_elements():
    with pytest.raises(InsufficientData):
        is_syndetic_up_to(Explicit([], cap=100), 100, 5)
    with pytest.raises(InsufficientData):
        is_syndetic_up_to(Explicit([7], cap=100), 100, 5)


def test_explicit_beyond_last_element_is_an_error():
    A = Explicit([1, 5, 9])
    assert A.count_upto(9) == 3
    with pytest.raises(HorizonExceeded):
        A.count_upto(10)


def test_explicit_from_file(tmp_path):
    f = tmp_path / "set.txt"
    f.write_text("1\n4\n\n9\n")
    A = Explicit.from_file(f)
    assert A.members(1, 9).tolist() == [1, 4, 9]
    f.write_text("4\n1\n")
    with pytest.raises(InvalidParameter):
        Explicit.from_file(f)


def test_empty_set_counts_are_zero():
    E = Explicit([], cap=50)
    assert E.count_in_interval(1, 50) == 0
    assert Complement(E).count_in_interval(1, 50) == 50


def test_manjoza_blocks_follow_floor_formula():
    S = build_paper_set("manjoza_S", {"lambda": 0.5})
    for n in range(2, 30):
        a_n = floor_pow_ln(n, 4)
        b_prev = floor_pow_ln(n - 1, 4) + (n - 1)
        assert manjoza_bounds(n, 0.5) == (a_n, a_n + n)
        # [b_(n-1), a_n) lies in S and is flanked by the gaps [a_(n-1), b_(n-1)) and [a_n, b_n)
        assert S.count_in_interval(b_prev, a_n - 1) == a_n - b_prev
        assert not S.contains(a_n) and not S.contains(a_n + n - 1)
        if n >= 3:
            assert not S.contains(b_prev - 1)


def test_zelje_surrogate_matches_brute_force_membership():
    A = build_paper_set("zelje_A", {"surrogate_base": 2, "surrogate_exp": "k^2"})
    bound = 10**6
    ref = zelje_members(bound)
    members = A.members(1, bound)
    assert set(members.tolist()) == ref
    n = np.arange(1, bound + 1)
    brute = np.cumsum([k in ref for k in range(1, bound + 1)])
    assert np.array_equal(A.count_upto(n), brute)


def test_zelje_partial_sums():
    assert zelje_partial_sums(4) == [2, 18, 530, 66066]


def test_paper_set_errors():
    with pytest.raises(UnknownConstruction):
        build_paper_set("nonsense")
    with pytest.raises(InvalidParameter):
        build_paper_set("manjoza_S", {"lambda": 1.5})
    with pytest.raises(InvalidParameter):
        formula_set("power", q=0.5)


def test_config_roundtrip():
    cfgs = [{"kind": "formula", "rule": "power", "q": 3}, {"kind": "blocks", "blocks": [[3, 7], [20, 40]]},
            {"kind": "complement", "of": {"kind": "formula", "rule": "linear", "a": 3, "b": 1}},
            {"kind": "paper", "name": "manjoza_S", "params": {"lambda": 0.5}}]
    for cfg in cfgs:
        A = from_config(cfg)
        B = from_config(A.to_config())
        n = np.arange(1, 5000)
        assert np.array_equal(A.count_upto(n), B.count_upto(n))


# ------------------------------------------------------------ properties

def _random_blocks(draw_list):
    pos, blocks = 0, []
    for gap, length in draw_list:
        lo = pos + gap
        blocks.append((lo, lo + length))
        pos = lo + length + 1
    return BlockUnion(blocks=blocks, cap=pos + 10**4) if blocks else Explicit([], cap=10**4)


index_sets = st.one_of(
    st.builds(lambda q: formula_set("power", q=q), st.sampled_from([1.5, 2, 2.5, 3])),
    st.builds(lambda a, b: formula_set("linear", a=a, b=b), st.integers(1, 9), st.integers(0, 5)),
    st.builds(_random_blocks, st.lists(st.tuples(st.integers(1, 50), st.integers(0, 50)), max_size=40)),
)


@given(index_sets, st.integers(1, 2000), st.integers(0, 2000), st.integers(0, 2000))
def test_interval_additivity(A, a, len1, len2):
    b = a + len1
    c = b + 1 + len2
    assert A.count_in_interval(a, b) + A.count_in_interval(b + 1, c) == A.count_in_interval(a, c)


@given(index_sets, st.integers(1, 5000), st.integers(0, 5000))
def test_complement_counts(A, a, length):
    b = a + length
    assert Complement(A).count_in_interval(a, b) == (b - a + 1) - A.count_in_interval(a, b)


@given(index_sets, st.integers(1, 5000), st.integers(0, 5000))
def test_double_complement(A, a, length):
    b = a + length
    assert Complement(Complement(A)).count_in_interval(a, b) == A.count_in_interval(a, b)


@given(st.sampled_from([("power", {"q": 2}), ("power", {"q": 3}), ("power", {"q": 2.5}), ("exp2", {}),
                        ("linear", {"a": 7, "b": 3})]),
       st.lists(st.tuples(st.integers(1, 10**6), st.integers(0, 10**5)), min_size=1, max_size=20))
def test_formula_matches_explicit_list(rule, intervals):
    F = formula_set(rule[0], **rule[1])
    terms = F.terms(1, 10**4)
    E = Explicit(terms.tolist())
    for a, length in intervals:
        b = min(a + length, int(terms[-1]))
        if a > b:
            continue
        assert F.count_in_interval(a, b) == E.count_in_interval(a, b)


@given(st.lists(st.integers(1, 300), min_size=0, max_size=60), st.lists(st.integers(1, 300), max_size=60),
       st.integers(1, 300), st.integers(0, 300))
def test_union_counts_match_python_sets(xs, ys, a, length):
    A, B = Explicit(sorted(set(xs)), cap=1000), Explicit(sorted(set(ys)), cap=1000)
    b = min(a + length, 1000)
    assert Union(A, B).count_in_interval(a, b) == count_in(set(xs) | set(ys), a, b)
