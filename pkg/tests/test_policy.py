"""Loss -> lambda pipeline, rank baseline, and the count mapping.

The worked-example constants below were frozen from an exact-rational
evaluation of the four pipeline steps (fractions.Fraction end to end),
so they are correct to the printed digits by construction.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adaptaug import (
    FIXED_COUNTS,
    AugCounts,
    IbfParams,
    counts_from_lambda,
    hybrid_normalize,
    rank_policy,
)

from oracles import pipeline_reference, rank_reference

# losses [1, 2, 3, 4]: exact values 2/7 4/9 6/11 8/13; 0 13/27 26/33 1;
# lambda 1 14/27 7/33 0.
FOUR_LOSSES_MEANNORM = [2 / 7, 4 / 9, 6 / 11, 8 / 13]
FOUR_LOSSES_MINMAX = [0.0, 13 / 27, 26 / 33, 1.0]
FOUR_LOSSES_LAMBDA = [1.0, 14 / 27, 7 / 33, 0.0]


class TestHybridNormalize:
    def test_worked_example_no_clipping(self):
        trace = hybrid_normalize([1.0, 2.0, 3.0, 4.0])
        assert trace.l_mean == pytest.approx(2.5, abs=1e-15)
        assert trace.l_var == pytest.approx(1.25, abs=1e-15)
        assert trace.l_clipped == pytest.approx([1.0, 2.0, 3.0, 4.0], abs=1e-15)
        assert trace.l_meannorm == pytest.approx(FOUR_LOSSES_MEANNORM, abs=1e-12)
        assert trace.l_minmax == pytest.approx(FOUR_LOSSES_MINMAX, abs=1e-12)
        assert trace.lam == pytest.approx(FOUR_LOSSES_LAMBDA, abs=1e-12)
        # four-decimal form of the same numbers
        assert [round(v, 4) for v in trace.l_meannorm] == [0.2857, 0.4444, 0.5455, 0.6154]
        assert [round(v, 4) for v in trace.lam] == [1.0, 0.5185, 0.2121, 0.0]

    def test_worked_example_both_clip_branches(self):
        """[1, 1, 1, 1.5]: tight variance window clips every value."""
        trace = hybrid_normalize([1.0, 1.0, 1.0, 1.5])
        assert trace.l_mean == pytest.approx(1.125, abs=1e-15)
        assert trace.l_var == pytest.approx(0.046875, abs=1e-15)
        assert trace.l_clipped == pytest.approx([1.03125, 1.03125, 1.03125, 1.21875], abs=1e-15)
        assert trace.lam == pytest.approx([1.0, 1.0, 1.0, 0.0], abs=1e-12)

    def test_constant_batch_is_neutral(self):
        for c in (0.25, 1.0, 17.5):
            trace = hybrid_normalize([c] * 4)
            assert trace.l_minmax == [0.5] * 4
            assert trace.lam == pytest.approx([0.5] * 4, abs=1e-12)

    def test_all_zero_batch_is_neutral(self):
        """Zero losses hit the zero-denominator rule, then degenerate min-max."""
        trace = hybrid_normalize([0.0, 0.0, 0.0])
        assert trace.l_meannorm == [0.5] * 3
        assert trace.lam == pytest.approx([0.5] * 3, abs=1e-12)

    def test_single_sample_batch(self):
        trace = hybrid_normalize([5.0])
        assert trace.lam == pytest.approx([0.5], abs=1e-12)

    def test_extremes_attained(self):
        """Non-degenerate batch: min-loss sample gets 1, max-loss gets 0."""
        rng = np.random.default_rng(17)
        for _ in range(25):
            losses = [float(v) for v in rng.uniform(0.0, 100.0, int(rng.integers(2, 30)))]
            if max(losses) == min(losses):
                continue
            trace = hybrid_normalize(losses)
            assert trace.lam[losses.index(min(losses))] == pytest.approx(1.0, abs=1e-12)
            assert trace.lam[losses.index(max(losses))] == pytest.approx(0.0, abs=1e-12)
            assert all(0.0 <= v <= 1.0 for v in trace.lam)
            assert all(0.0 <= v <= 1.0 for v in trace.l_minmax)

    def test_lambda_antimonotone_in_loss(self):
        rng = np.random.default_rng(23)
        for _ in range(50):
            losses = [float(v) for v in rng.uniform(0.0, 50.0, 16)]
            trace = hybrid_normalize(losses)
            for i in range(16):
                for j in range(16):
                    if losses[i] <= losses[j]:
                        assert trace.lam[i] >= trace.lam[j] - 1e-12
                    if trace.l_clipped[i] < trace.l_clipped[j]:
                        assert trace.lam[i] > trace.lam[j]

    def test_clip_window_invariant(self):
        rng = np.random.default_rng(29)
        for _ in range(50):
            losses = [float(v) for v in rng.uniform(0.0, 100.0, 12)]
            trace = hybrid_normalize(losses)
            for v in trace.l_clipped:
                assert trace.l_mean - 2 * trace.l_var - 1e-9 <= v
                assert v <= trace.l_mean + 2 * trace.l_var + 1e-9

    def test_shift_sensitivity_vs_rank(self):
        """Shifting the batch changes hybrid output but not rank output."""
        a, b = [1.0, 2.0, 3.0, 4.0], [101.0, 102.0, 103.0, 104.0]
        assert rank_policy(a) == rank_policy(b)
        ta, tb = hybrid_normalize(a), hybrid_normalize(b)
        assert ta.l_meannorm != tb.l_meannorm

    def test_clip_with_std_flag(self):
        """The escape hatch widens the window to mean +/- 2*sigma."""
        losses = [1.0, 1.0, 1.0, 1.5]
        sigma = math.sqrt(0.046875)
        trace = hybrid_normalize(losses, clip_with_std=True)
        assert trace.l_clipped == pytest.approx(
            [max(1.0, 1.125 - 2 * sigma)] * 3 + [min(1.5, 1.125 + 2 * sigma)], abs=1e-12)
        _, _, _, lam = pipeline_reference(losses, clip_with_std=True)
        assert trace.lam == pytest.approx(list(lam), abs=1e-12)

    def test_matches_straightline_reference(self):
        rng = np.random.default_rng(41)
        for _ in range(100):
            b = int(rng.integers(2, 65))
            losses = [float(v) for v in rng.uniform(0.0, 100.0, b)]
            trace = hybrid_normalize(losses)
            clipped, meannorm, minmax, lam = pipeline_reference(losses)
            assert trace.l_clipped == pytest.approx(list(clipped), abs=1e-12)
            assert trace.l_meannorm == pytest.approx(list(meannorm), abs=1e-12)
            assert trace.l_minmax == pytest.approx(list(minmax), abs=1e-12)
            assert trace.lam == pytest.approx(list(lam), abs=1e-12)

    def test_nondefault_ibf_params(self):
        losses = [3.0, 1.0, 4.0, 1.5, 9.0]
        params = IbfParams(s=6.0, a=0.3)
        trace = hybrid_normalize(losses, params)
        _, _, _, lam = pipeline_reference(losses, s=6.0, a=0.3)
        assert trace.lam == pytest.approx(list(lam), abs=1e-12)

    def test_rejects_bad_batches(self):
        with pytest.raises(ValueError):
            hybrid_normalize([])
        with pytest.raises(ValueError):
            hybrid_normalize([1.0, float("nan")])
        with pytest.raises(ValueError):
            hybrid_normalize([1.0, float("inf")])


class TestRankPolicy:
    def test_identity_params_give_complementary_ranks(self):
        assert rank_policy([10.0, 20.0, 30.0, 40.0]) == pytest.approx(
            [0.75, 0.5, 0.25, 0.0], abs=1e-12)

    def test_single_sample(self):
        assert rank_policy([123.0]) == [0.0]

    def test_tie_break_by_input_index(self):
        assert rank_policy([5.0, 5.0, 9.0]) == pytest.approx(
            [1 - 1 / 3, 1 - 2 / 3, 0.0], abs=1e-12)

    def test_matches_scipy_ordinal_ranking(self):
        rng = np.random.default_rng(53)
        for _ in range(50):
            losses = [float(v) for v in rng.uniform(0, 10, int(rng.integers(1, 40)))]
            assert rank_policy(losses) == pytest.approx(
                list(rank_reference(losses)), abs=1e-12)

    def test_unsorted_input_order_preserved(self):
        lam = rank_policy([4.0, 1.0, 3.0, 2.0])
        assert lam == pytest.approx([0.0, 0.75, 0.25, 0.5], abs=1e-12)


class TestCountsFromLambda:
    def test_endpoints(self):
        assert counts_from_lambda(0.0).as_tuple() == (0, 0, 0)
        assert counts_from_lambda(1.0).as_tuple() == (4, 4, 2)

    def test_worked_example(self):
        assert counts_from_lambda(0.5185).as_tuple() == (3, 3, 2)

    def test_fixed_path_ignores_lambda(self):
        for lam in (0.0, 0.3, 1.0):
            assert counts_from_lambda(lam, path="fixed").as_tuple() == FIXED_COUNTS

    @settings(max_examples=200, deadline=None)
    @given(st.floats(0.0, 1.0, allow_nan=False))
    def test_formula_everywhere(self, lam):
        c = counts_from_lambda(lam)
        assert c.as_tuple() == (math.ceil(4 * lam), math.ceil(4 * lam), math.ceil(2 * lam))
        assert 0 <= c.n_time_mask <= 4
        assert 0 <= c.n_freq_mask <= 4
        assert 0 <= c.n_time_sub <= 2

    def test_monotone_componentwise(self):
        grid = [i / 1000 for i in range(1001)]
        prev = counts_from_lambda(0.0).as_tuple()
        for lam in grid[1:]:
            cur = counts_from_lambda(lam).as_tuple()
            assert all(c >= p for c, p in zip(cur, prev))
            prev = cur

    def test_custom_multipliers(self):
        c = counts_from_lambda(0.6, time_mult=10.0, freq_mult=1.0, sub_mult=0.5)
        assert c.as_tuple() == (6, 1, 1)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            counts_from_lambda(-0.01)
        with pytest.raises(ValueError):
            counts_from_lambda(1.01)
        with pytest.raises(ValueError):
            counts_from_lambda(0.5, path="other")

    def test_counts_type(self):
        c = counts_from_lambda(0.9)
        assert isinstance(c, AugCounts)
        assert all(isinstance(v, int) for v in c.as_tuple())
