import itertools
import random

import pytest

from laughseg.metrics import (EvalResult, MetricError, evaluate,
                              paired_significance, pk, spearman_rho,
                              to_word_units, window_diff, window_width)
from laughseg.segcore import Segmentation


def seg(m, *boundaries, method="reference"):
    return Segmentation(n_units=m, boundaries=tuple(boundaries),
                        method=method)


# --- independent window-enumeration oracles -------------------------------

def oracle_pk(ref, hyp, k):
    """Enumerate unit pairs (i, i+k); a pair is split iff some boundary b
    satisfies i <= b < i+k."""
    m = ref.n_units
    disagreements = 0
    for i in range(1, m - k + 1):
        ref_split = any(i <= b < i + k for b in ref.boundaries)
        hyp_split = any(i <= b < i + k for b in hyp.boundaries)
        disagreements += ref_split != hyp_split
    return disagreements / (m - k)


def oracle_wd(ref, hyp, k):
    """Enumerate windows; count positions where the number of boundaries in
    (i, i+k] differs."""
    m = ref.n_units
    differing = 0
    for i in range(1, m - k + 1):
        ref_count = sum(1 for b in ref.boundaries if i < b <= i + k)
        hyp_count = sum(1 for b in hyp.boundaries if i < b <= i + k)
        differing += ref_count != hyp_count
    return differing / (m - k)


class TestWindowWidth:
    def test_half_mean_segment_length(self):
        assert window_width(seg(20, 10)) == 5

    def test_round_half_up(self):
        assert window_width(seg(9, 3, 6)) == 2

    def test_floor_clamp(self):
        assert window_width(seg(2)) == 1

    def test_no_boundaries(self):
        assert window_width(seg(20)) == 10


class TestPk:
    def test_identity_zero(self):
        for boundaries in [(), (5,), (2, 7)]:
            s = seg(10, *boundaries)
            for k in (1, 2, 4):
                assert pk(s, s, k) == 0.0

    # frozen from the oracle: with ref={5}, hyp={} and k=2 the split
    # windows are i in {4, 5}, so pk = 2/8
    def test_missed_boundary(self):
        assert pk(seg(10, 5), seg(10), 2) == pytest.approx(0.25)
        assert oracle_pk(seg(10, 5), seg(10), 2) == pytest.approx(0.25)

    def test_shifted_boundary(self):
        assert pk(seg(10, 5), seg(10, 3), 2) == pytest.approx(0.5)
        assert oracle_pk(seg(10, 5), seg(10, 3), 2) == pytest.approx(0.5)

    def test_mismatched_m_rejected(self):
        with pytest.raises(MetricError):
            pk(seg(10, 5), seg(11, 5), 2)

    def test_k_out_of_range_rejected(self):
        with pytest.raises(MetricError):
            pk(seg(10, 5), seg(10), 10)


class TestWindowDiff:
    def test_identity_zero(self):
        for boundaries in [(), (5,), (2, 7)]:
            s = seg(10, *boundaries)
            assert window_diff(s, s, 2) == 0.0

    # frozen from the oracle: boundary 5 falls in (i, i+2] for i in {3, 4}
    def test_missed_boundary(self):
        assert window_diff(seg(10, 5), seg(10), 2) == pytest.approx(0.25)
        assert oracle_wd(seg(10, 5), seg(10), 2) == pytest.approx(0.25)

    def test_insertion_near_boundary_penalized_more_than_pk(self):
        ref, hyp = seg(10, 5), seg(10, 5, 6)
        k = 2
        assert window_diff(ref, hyp, k) > pk(ref, hyp, k)
        # frozen from the oracles
        assert pk(ref, hyp, k) == pytest.approx(1 / 8)
        assert window_diff(ref, hyp, k) == pytest.approx(2 / 8)


class TestAgainstOracle:
    def test_exhaustive_small(self):
        for m in range(3, 8):
            sites = list(range(1, m))
            all_sets = [c for r in range(len(sites) + 1)
                        for c in itertools.combinations(sites, r)]
            for ref_b, hyp_b in itertools.product(all_sets, repeat=2):
                ref, hyp = seg(m, *ref_b), seg(m, *hyp_b)
                for k in (1, 2, m - 1):
                    assert pk(ref, hyp, k) == oracle_pk(ref, hyp, k)
                    assert window_diff(ref, hyp, k) == oracle_wd(ref, hyp, k)

    def test_random_medium(self):
        rng = random.Random(99)
        for _ in range(500):
            m = rng.randint(4, 30)
            ref = seg(m, *sorted(rng.sample(range(1, m), rng.randint(0, m // 3))))
            hyp = seg(m, *sorted(rng.sample(range(1, m), rng.randint(0, m // 3))))
            k = rng.randint(1, m - 1)
            assert pk(ref, hyp, k) == oracle_pk(ref, hyp, k)
            assert window_diff(ref, hyp, k) == oracle_wd(ref, hyp, k)

    def test_depends_only_on_boundary_sets(self):
        a = seg(12, 4, 8, method="reference")
        b = Segmentation(n_units=12, boundaries=(4, 8), method="hybrid")
        hyp = seg(12, 5)
        assert pk(a, hyp, 3) == pk(b, hyp, 3)
        assert window_diff(a, hyp, 3) == window_diff(b, hyp, 3)


class TestEvaluate:
    def test_uses_reference_window(self):
        result = evaluate(seg(20, 10), seg(20, 9))
        assert isinstance(result, EvalResult)
        assert result.k_window == 5
        assert result.combined == result.pk + result.wd

    def test_explicit_window(self):
        assert evaluate(seg(10, 5), seg(10), k=2).pk == pytest.approx(0.25)


class TestWordUnits:
    def test_boundary_maps_to_cumulative_tokens(self):
        turn_seg = seg(4, 2)
        word_seg = to_word_units(turn_seg, [3, 2, 4, 1])
        assert word_seg.n_units == 10
        assert word_seg.boundaries == (5,)

    def test_empty_turn_collapse_dropped(self):
        word_seg = to_word_units(seg(3, 1, 2), [0, 2, 2])
        # boundary after turn 1 lands at word 0 and is dropped
        assert word_seg.boundaries == (2,)

    def test_count_mismatch_rejected(self):
        with pytest.raises(MetricError):
            to_word_units(seg(3, 1), [1, 2])


class TestSpearman:
    def test_perfect(self):
        assert spearman_rho([1, 2, 3], [1, 2, 3]) == pytest.approx(1.0)

    def test_reversed(self):
        assert spearman_rho([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)

    def test_tie_handling_average_ranks(self):
        # hand-computed with average ranks: a -> 1, 2.5, 2.5, 4
        assert spearman_rho([1, 2, 2, 3], [1, 2, 3, 4]) == pytest.approx(
            0.9486832980505138)

    def test_length_mismatch_rejected(self):
        with pytest.raises(MetricError):
            spearman_rho([1, 2], [1, 2, 3])

    def test_constant_vector_rejected(self):
        with pytest.raises(MetricError):
            spearman_rho([1, 1, 1], [1, 2, 3])


class TestPairedSignificance:
    def test_degenerate_when_equal(self):
        result = paired_significance([1.0] * 8, [1.0] * 8)
        assert result.degenerate
        assert not result.significant

    def test_uniform_improvement_significant(self):
        a = [0.5 + 0.01 * i for i in range(10)]
        b = [x - 0.05 - 0.001 * i for i, x in enumerate(a)]
        result = paired_significance(a, b)
        assert result.significant
        assert result.p_value < 0.05

    def test_ttest_variant(self):
        a = [0.5 + 0.01 * i for i in range(10)]
        b = [x - 0.05 - 0.002 * i for i, x in enumerate(a)]
        result = paired_significance(a, b, test="ttest")
        assert result.test == "ttest"
        assert result.p_value < 0.05

    def test_too_short_rejected(self):
        with pytest.raises(MetricError):
            paired_significance([1, 2], [3, 4])

    def test_unknown_test_rejected(self):
        with pytest.raises(MetricError):
            paired_significance(list(range(6)), [0] * 6, test="sign")
