import math

import pytest
from hypothesis import given, settings, strategies as st

from kbwalk import fractal as fr
from kbwalk.dyadic import Dyadic
from kbwalk.walk import SignSequence

from conftest import words


def test_distance_examples():
    u = SignSequence.from_text("+-+-+-")
    assert fr.seq_distance(u, u, 6) == 0
    v = SignSequence.from_text("--+-+-")
    assert fr.seq_distance(u, v, 6) == 1
    plus = SignSequence((1,) * 64)
    minus = SignSequence((-1,) * 64)
    low, high = fr.distance_bracket(plus, minus, 64)
    assert low == 2 - Dyadic(1, 63)
    assert low <= 2 <= high and high == 2


def test_distance_needs_depth():
    with pytest.raises(ValueError):
        fr.seq_distance("++", "+++", 3)


@settings(max_examples=100)
@given(st.integers(0, 20), st.integers(1, 20), st.data())
def test_cylinder_diameter_law(m, extra, data):
    prefix = data.draw(st.lists(st.sampled_from([1, -1]), min_size=m, max_size=m))
    tail_u = data.draw(st.lists(st.sampled_from([1, -1]), min_size=extra, max_size=extra))
    tail_v = data.draw(st.lists(st.sampled_from([1, -1]), min_size=extra, max_size=extra))
    u = SignSequence(tuple(prefix + tail_u))
    v = SignSequence(tuple(prefix + tail_v))
    low, high = fr.distance_bracket(u, v, m + extra)
    assert low <= fr.cylinder_diameter(m)
    comp = SignSequence(tuple(prefix + [-x for x in tail_u]))
    _, comp_high = fr.distance_bracket(u, comp, m + extra)
    assert comp_high == fr.cylinder_diameter(m)


def test_cylinder_object():
    assert fr.Cylinder(SignSequence.from_text("++-")).diameter == Dyadic(1, 2)
    assert fr.cylinder_diameter(0) == 2


@pytest.mark.parametrize("k, m, n", [(2, 3, 2), (2, 4, 4), (2, 0, 1), (5, 0, 1), (3, 9, 8)])
def test_prefix_count_examples(k, m, n):
    assert fr.count_N_prefixes(k, m) == n


def is_n_prefix(w, k):
    """Independent membership test: complete blocks are patterns, the last partial block extends to one."""
    for start in range(0, len(w), k + 1):
        block = w[start : start + k + 1]
        first = block[0]
        pattern = (first,) * k + (-first,)
        if block != pattern[: len(block)]:
            return False
    return True


@pytest.mark.parametrize("k", [2, 3, 4])
def test_prefix_counts_against_word_filter(k):
    for m in range(0, 15):
        assert fr.count_N_prefixes(k, m) == sum(1 for w in words(m) if is_n_prefix(w, k))


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_closed_form_matches_enumeration(k):
    for m in range(0, 41):
        assert fr.count_N_prefixes(k, m) == fr.closed_form_count(k, m)
    assert fr.count_N_prefixes(k, 200) == fr.closed_form_count(k, 200)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_prefix_count_doubles_only_at_block_starts(k):
    for m in range(1, 41):
        prev, cur = fr.count_N_prefixes(k, m - 1), fr.count_N_prefixes(k, m)
        if (m - 1) % (k + 1) == 0:
            assert cur == 2 * prev
        else:
            assert cur == prev


def test_box_examples():
    p2 = fr.box_dimension_estimate(2, 120)
    assert abs(p2.fitted_slope - 1 / 3) < 0.02
    p4 = fr.box_dimension_estimate(4, 150)
    assert abs(p4.fitted_slope - 1 / 5) < 0.02
    full = fr.full_space_profile(60)
    assert full.fitted_slope == pytest.approx(1.0, abs=1e-12)
    assert full.r_squared == pytest.approx(1.0)


def test_profile_shape():
    prof = fr.box_dimension_estimate(3, 40)
    counts = [n for _, n, _ in prof.entries]
    assert counts == sorted(counts)
    deltas = [d for _, _, d in prof.entries]
    assert all(b * 2 == a for a, b in zip(deltas, deltas[1:]))
    assert 0.99 < prof.r_squared <= 1.0
    with pytest.raises(ValueError):
        fr.box_dimension_estimate(3, 7)


def test_profile_exports():
    prof = fr.box_dimension_estimate(2, 6)
    lines = prof.to_csv().splitlines()
    assert lines[0] == "m,N_m,delta,log2N"
    assert lines[1] == "1,2,1.0,1.0"
    js = prof.to_json()
    assert js["entries"][2] == {"m": 3, "N_m": "2", "delta": {"num": "1", "exp": 2}, "log2N": 1.0}
    assert js["target"] == pytest.approx(1 / 3)
    assert js["abs_error"] == pytest.approx(abs(prof.fitted_slope - 1 / 3))


@pytest.mark.parametrize("ratios, s", [((0.5, 0.5), 1.0), ((1 / 8, 1 / 8), 1 / 3), ((0.25, 0.25), 0.5)])
def test_moran_examples(ratios, s):
    assert fr.moran_dimension(ratios, 1e-12) == pytest.approx(s, abs=1e-12)


def test_moran_unequal_ratios_golden():
    # 2^-s + 4^-s = 1  =>  2^-s = (sqrt 5 - 1) / 2
    expected = math.log2((1 + math.sqrt(5)) / 2)
    assert fr.moran_dimension((0.5, 0.25), 1e-13) == pytest.approx(expected, abs=1e-12)


@settings(max_examples=100)
@given(st.integers(2, 9), st.floats(0.01, 0.95))
def test_moran_equal_ratio_closed_form(p, r):
    assert fr.moran_dimension([r] * p, 1e-13) == pytest.approx(fr.equal_ratio_dimension(p, r), abs=1e-12)


@given(st.lists(st.floats(0.05, 0.9), min_size=2, max_size=5))
def test_moran_residual_and_monotonicity(ratios):
    system = fr.SimilaritySystem(tuple(ratios))
    s = fr.moran_dimension(system, 1e-10)
    assert abs(system.pressure(s)) <= 1e-10
    grid = [s * x / 4 for x in range(9)]
    values = [system.pressure(g) for g in grid]
    assert all(a > b for a, b in zip(values, values[1:]))


@pytest.mark.parametrize("bad", [(0.5,), (0.0, 0.5), (1.0, 0.5), (-0.1, 0.2)])
def test_moran_invalid_ratios(bad):
    with pytest.raises(ValueError):
        fr.moran_dimension(bad)


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_dimension_consistency(k):
    moran = fr.moran_dimension(fr.SimilaritySystem.kbonacci(k))
    assert moran == pytest.approx(1 / (k + 1), abs=1e-12)
    slope = fr.box_dimension_estimate(k, 150).fitted_slope
    assert abs(slope - moran) < 0.02


@pytest.mark.parametrize("k, depth", [(2, 3), (3, 2), (4, 3), (5, 1)])
def test_self_similarity(k, depth):
    report = fr.verify_self_similarity(k, depth)
    assert report.ok, report.violations
    assert report.depth == (k + 1) * depth


def test_identical_pair_contracts_to_zero():
    u = SignSequence.from_text("+-+-++--")
    block = SignSequence.from_text("++-")
    assert fr.seq_distance(block + u, block + u, 11) == 0


def test_contraction_ratio_by_hand():
    u = SignSequence.from_text("+++-")
    v = SignSequence.from_text("+-+-")
    block = SignSequence.from_text("--+")
    assert fr.seq_distance(u, v, 4) == Dyadic(1, 1)
    assert fr.seq_distance(block + u, block + v, 7) == Dyadic(1, 4)


@pytest.mark.parametrize("m, n", [(1, 1), (5, 2), (6, 4), (2, 2), (10, 8)])
def test_tribonacci_prefix_counts(m, n):
    assert fr.tribonacci_f1_prefix_count(m) == n


def test_tribonacci_prefix_counts_against_filter():
    for m in range(1, 15):
        expected = sum(1 for w in words(m) if w[0] == 1 and is_n_prefix(w[1:], 3))
        assert fr.tribonacci_f1_prefix_count(m) == expected
    assert fr.tribonacci_f1_prefix_count(100) == fr.closed_form_count(3, 99)


def test_tribonacci_dimension():
    prof = fr.tribonacci_f1_dimension(121)
    assert abs(prof.fitted_slope - 0.25) < 0.02
    assert fr.prepend_plus_check(pairs=100, depth=64) == 0
