import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entrim.quartiles import (
    LN3,
    CalibrationError,
    CompressorParams,
    ExactQuartileTracker,
    FenceBounds,
    QuartileTracker,
    calibrate,
    choose_step,
    compress,
    exact_quartiles,
    fences,
    is_outlier,
)


def logistic(z):
    return 1.0 / (1.0 + math.exp(-z))


class TestCompress:
    def test_half_at_origin(self):
        for params in (CompressorParams(1.0, 1.0), CompressorParams(0.3, 7.0)):
            assert compress(0.0, params) == 0.5

    def test_lower_quartile_anchor(self):
        # alpha1 = -ln(3)/q1 maps q1 back to 0.25
        q1 = -1.0
        params = CompressorParams(-LN3 / q1, 1.0)
        assert compress(q1, params) == pytest.approx(0.25, abs=1e-15)

    def test_upper_quartile_anchor(self):
        q3 = 2.0
        params = CompressorParams(1.0, LN3 / q3)
        assert compress(q3, params) == pytest.approx(0.75, abs=1e-15)

    @given(
        e1=st.floats(min_value=-15, max_value=15),
        e2=st.floats(min_value=-15, max_value=15),
        a1=st.floats(min_value=0.05, max_value=2.0),
        a2=st.floats(min_value=0.05, max_value=2.0),
    )
    @settings(max_examples=100)
    def test_strictly_increasing_and_bounded(self, e1, e2, a1, a2):
        # strictness only holds below logistic saturation (|alpha*e| < ~36)
        params = CompressorParams(a1, a2)
        c1, c2 = compress(e1, params), compress(e2, params)
        assert 0.0 < c1 < 1.0
        if e1 < e2 and (e2 - e1) * min(a1, a2) > 1e-12:
            assert c1 < c2

    def test_saturates_without_error(self):
        params = CompressorParams(5.0, 5.0)
        assert compress(1e300, params) == 1.0  # saturated, not an exception
        assert compress(-1e300, params) == 0.0

    def test_invalid_params_rejected(self):
        with pytest.raises(ValueError):
            CompressorParams(0.0, 1.0)
        with pytest.raises(ValueError):
            CompressorParams(1.0, -2.0)


class TestExactQuartiles:
    def test_hand_interpolated(self):
        assert exact_quartiles([-2, -1, 1, 2]) == (-1.25, 1.25)

    def test_constant_data(self):
        assert exact_quartiles([1, 1, 1, 1]) == (1, 1)

    def test_sort_invariance(self):
        assert exact_quartiles([2, -1, 1, -2]) == (-1.25, 1.25)
        assert exact_quartiles([1, 2, -2, -1]) == (-1.25, 1.25)

    def test_too_few_samples_rejected(self):
        with pytest.raises(ValueError):
            exact_quartiles([1.0, 2.0, 3.0])

    @given(data=st.lists(st.floats(min_value=-1e6, max_value=1e6), min_size=4, max_size=50))
    @settings(max_examples=50)
    def test_matches_numpy_percentile(self, data):
        q1, q3 = exact_quartiles(data)
        assert q1 == pytest.approx(np.percentile(data, 25), rel=1e-12, abs=1e-9)
        assert q3 == pytest.approx(np.percentile(data, 75), rel=1e-12, abs=1e-9)


class TestCalibrate:
    def test_unit_case(self):
        params = calibrate(-LN3, LN3)
        assert params.alpha1 == pytest.approx(1.0, abs=1e-15)
        assert params.alpha2 == pytest.approx(1.0, abs=1e-15)

    def test_symmetric_quartiles(self):
        params = calibrate(-1.25, 1.25)
        assert params.alpha1 == pytest.approx(LN3 / 1.25, abs=1e-12)
        assert params.alpha1 == pytest.approx(0.8788898309344879, abs=1e-9)
        assert params.alpha2 == params.alpha1

    def test_asymmetric_quartiles(self):
        params = calibrate(-0.5, 2.0)
        assert params.alpha1 == pytest.approx(2.197224577336220, abs=1e-9)
        assert params.alpha2 == pytest.approx(0.549306144334055, abs=1e-9)

    @pytest.mark.parametrize("q1,q3", [(0.0, 1.0), (0.5, 1.0), (-1.0, 0.0), (-1.0, -0.5)])
    def test_uncentered_quartiles_rejected(self, q1, q3):
        with pytest.raises(CalibrationError):
            calibrate(q1, q3)


class TestChooseStep:
    def test_symmetric_small_epsilon(self):
        alpha = 0.8788898309344879
        params = CompressorParams(alpha, alpha)
        delta, ql = choose_step(params, 0.01, 4)
        expected = logistic(alpha * 0.01) - 0.5  # independent closed form
        assert delta == pytest.approx(expected, rel=1e-12)
        assert delta == pytest.approx(0.0021972, abs=1e-7)
        assert ql == 456

    def test_warmup_length_binds_for_large_epsilon(self):
        params = CompressorParams(1.0, 1.0)
        delta, ql = choose_step(params, 1e6, 100)
        assert delta == 0.01
        assert ql == 100

    @given(alpha=st.floats(min_value=0.05, max_value=20), eps=st.floats(min_value=1e-4, max_value=10))
    @settings(max_examples=50)
    def test_symmetric_slopes_give_symmetric_steps(self, alpha, eps):
        d1 = logistic(alpha * eps) - 0.5
        d2 = 0.5 - logistic(-alpha * eps)
        assert d1 == pytest.approx(d2, rel=1e-12)

    def test_preconditions(self):
        params = CompressorParams(1.0, 1.0)
        with pytest.raises(ValueError):
            choose_step(params, 0.0, 100)
        with pytest.raises(ValueError):
            choose_step(params, 0.01, 3)


class TestFences:
    def test_symmetric_unit_quartiles(self):
        b = fences(-1.0, 1.0)
        assert (b.lower_extreme, b.upper_extreme) == (-7.0, 7.0)

    def test_degenerate_zero_iqr(self):
        b = fences(0.0, 0.0)
        assert (b.lower_extreme, b.upper_extreme) == (0.0, 0.0)

    def test_direct_arithmetic(self):
        b = fences(-1.25, 1.25)
        assert (b.lower_extreme, b.upper_extreme) == (-8.75, 8.75)

    def test_reversed_quartiles_rejected(self):
        with pytest.raises(ValueError):
            fences(1.0, -1.0)

    @given(
        q1=st.floats(min_value=-100, max_value=100),
        spread=st.floats(min_value=0, max_value=100),
    )
    @settings(max_examples=50)
    def test_width_is_seven_iqr(self, q1, spread):
        b = fences(q1, q1 + spread)
        assert b.upper_extreme - b.lower_extreme == pytest.approx(7 * spread, rel=1e-12, abs=1e-9)


class TestIsOutlier:
    def test_boundary_is_not_outlier(self):
        b = FenceBounds(-7.0, 7.0)
        assert not is_outlier(7.0, b)
        assert not is_outlier(-7.0, b)

    def test_just_outside(self):
        b = FenceBounds(-7.0, 7.0)
        assert is_outlier(7.01, b)
        assert is_outlier(-7.01, b)

    def test_degenerate_interval(self):
        b = FenceBounds(0.0, 0.0)
        assert not is_outlier(0.0, b)
        assert is_outlier(1e-9, b)


class TestExactQuartileTracker:
    def test_agrees_with_batch_sort(self):
        rng = np.random.default_rng(3)
        vals = rng.normal(size=200)
        tracker = ExactQuartileTracker()
        for i, v in enumerate(vals, 1):
            tracker.add(v)
            if i >= 4:
                assert tracker.quartiles() == exact_quartiles(vals[:i])

    def test_undefined_below_four(self):
        tracker = ExactQuartileTracker()
        for v in (1.0, 2.0, 3.0):
            tracker.add(v)
            assert tracker.quartiles() is None


class TestQuartileTrackerWarmup:
    def test_exact_quartiles_during_warmup(self):
        tr = QuartileTracker(warmup=10, epsilon=0.01, beta=0.1)
        for v in (-2.0, -1.0, 1.0, 2.0):
            tr.observe(v)
        assert tr.quartiles() == (-1.25, 1.25)
        assert not tr.ready

    def test_calibration_on_warmup_completion(self):
        tr = QuartileTracker(warmup=4, epsilon=0.01, beta=0.1)
        for v in (-2.0, -1.0, 1.0, 2.0):
            tr.observe(v)
        assert tr.ready
        assert tr.params.alpha1 == pytest.approx(LN3 / 1.25)
        assert tr.num_samples == tr.num_levels
        assert np.array_equal(tr.counters, np.arange(1, tr.num_levels + 1))
        half = int(0.5 / tr.delta)
        assert 1 <= tr.recal_low < half < tr.recal_high <= tr.num_levels

    def test_uncentered_stream_median_shift(self):
        # all-positive warm-up: calibration must shift by the median instead
        # of failing
        tr = QuartileTracker(warmup=8, epsilon=0.01, beta=0.1)
        for v in (10.0, 11.0, 12.0, 13.0, 14.0, 15.0, 16.0, 17.0):
            tr.observe(v)
        assert tr.ready
        assert tr.shift == pytest.approx(13.5)
        q1, q3 = tr.quartiles()
        assert q1 == pytest.approx(11.75)
        assert q3 == pytest.approx(15.25)

    def test_constant_stream_never_calibrates_but_stays_exact(self):
        tr = QuartileTracker(warmup=5, epsilon=0.01, beta=0.1)
        for _ in range(50):
            tr.observe(3.0)
        assert not tr.ready
        assert tr.quartiles() == (3.0, 3.0)
        b = tr.fences()
        assert (b.lower_extreme, b.upper_extreme) == (3.0, 3.0)
        assert not is_outlier(3.0, b)

    def test_nonfinite_rejected_without_state_change(self):
        tr = QuartileTracker(warmup=4, epsilon=0.01, beta=0.1)
        tr.observe(1.0)
        with pytest.raises(ValueError):
            tr.observe(math.nan)
        with pytest.raises(ValueError):
            tr.observe(math.inf)
        assert tr.n_seen == 1

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            QuartileTracker(warmup=3)
        with pytest.raises(ValueError):
            QuartileTracker(epsilon=0.0)
        with pytest.raises(ValueError):
            QuartileTracker(beta=0.25)
        with pytest.raises(ValueError):
            QuartileTracker(beta=0.0)


def feed(tr, values):
    for v in values:
        tr.observe(v)


class TestQuartileTrackerSteadyState:
    def test_counters_cumulative_after_every_observe(self):
        rng = np.random.default_rng(11)
        tr = QuartileTracker(warmup=20, epsilon=0.01, beta=0.1)
        for v in rng.normal(size=500):
            tr.observe(v)
            if tr.ready:
                assert np.all(np.diff(tr.counters) >= 0)

    def test_top_counter_tracks_total(self):
        rng = np.random.default_rng(12)
        tr = QuartileTracker(warmup=20, epsilon=0.01, beta=0.1)
        feed(tr, rng.normal(size=200))
        assert tr.counters[-1] == tr.num_samples

    def test_monotone_bin_response(self):
        # a strictly larger error lands in the same or a higher bin, so no
        # counter ever decreases relative to feeding the smaller value
        tr = QuartileTracker(warmup=4, epsilon=0.01, beta=0.1)
        feed(tr, [-2.0, -1.0, 1.0, 2.0])
        lo = tr._bin_index(-0.5)
        hi = tr._bin_index(0.5)
        higher = tr._bin_index(5.0)
        assert lo <= hi <= higher

    def test_reconstruction_inverts_compressor(self):
        # edge coordinate 0.25 with slope ln(3) reconstructs to exactly -1
        tr = QuartileTracker(warmup=4, epsilon=0.01, beta=0.1)
        feed(tr, [-2.0, -1.0, 1.0, 2.0])
        tr.shift = 0.0
        tr.delta = 0.25
        assert tr._reconstruct(2, LN3) == pytest.approx(-1.0, abs=1e-12)

    def test_reconstruction_round_trip_lands_in_bin(self):
        tr = QuartileTracker(warmup=4, epsilon=0.01, beta=0.1)
        feed(tr, [-2.0, -1.0, 1.0, 2.0])
        params = tr.params
        delta = tr.delta
        for index in range(2, tr.num_levels + 1):
            c = delta * (index - 1)
            if not 0.0 < c < 1.0:
                continue
            alpha = params.alpha1 if c < 0.5 else params.alpha2
            q = tr._reconstruct(index, alpha)
            back = compress(q - tr.shift, params)
            assert delta * (index - 1) - 1e-9 <= back < delta * index

    def test_degenerate_edges_stay_finite(self):
        tr = QuartileTracker(warmup=4, epsilon=0.01, beta=0.1)
        feed(tr, [-2.0, -1.0, 1.0, 2.0])
        assert math.isfinite(tr._reconstruct(1, 1.0))
        assert math.isfinite(tr._reconstruct(tr.num_levels + 1, 1.0))

    def test_recalibration_resets_counters_and_preserves_order(self):
        # shrinking dispersion walks the quartile bins toward the center,
        # which must eventually trigger a recalibration
        rng = np.random.default_rng(21)
        tr = QuartileTracker(warmup=100, epsilon=0.01, beta=0.1)
        scale = 1.0
        recal_seen = False
        for k in range(8000):
            tr.observe(float(rng.normal() * scale))
            scale = max(scale * 0.999, 0.01)
            if tr.recalibrated:
                recal_seen = True
                assert tr.num_samples == tr.num_levels
                assert np.array_equal(tr.counters, np.arange(1, tr.num_levels + 1))
                q1, q3 = tr.quartiles()
                assert q1 <= q3
        assert recal_seen
        assert tr.recalibrations >= 1

    def test_quartile_order_always_maintained(self):
        rng = np.random.default_rng(31)
        tr = QuartileTracker(warmup=50, epsilon=0.01, beta=0.1)
        for v in rng.standard_cauchy(3000):  # nasty heavy-tailed stream
            tr.observe(float(np.clip(v, -1e6, 1e6)))
            if tr.quartiles() is not None:
                q1, q3 = tr.quartiles()
                assert q1 <= q3


class TestTrackerAgainstSortingOracle:
    def test_normal_stream_tracks_exact_quartiles(self):
        # fixed representative stream; tolerance max(2*eps, 5% relative)
        rng = np.random.default_rng(np.random.SeedSequence(0))
        vals = rng.standard_normal(10_000)
        tr = QuartileTracker(100, 0.01, 0.1)
        oracle = ExactQuartileTracker()
        ok = total = 0
        for i, v in enumerate(vals, 1):
            tr.observe(v)
            oracle.add(v)
            if i <= 100:
                continue
            tq1, tq3 = tr.quartiles()
            eq1, eq3 = oracle.quartiles()
            total += 1
            ok += all(
                abs(t - e) <= max(0.02, 0.05 * abs(e))
                for t, e in ((tq1, eq1), (tq3, eq3))
            )
        assert ok / total >= 0.95

    def test_impulsive_stream_flagged_fraction(self):
        rng = np.random.default_rng(np.random.SeedSequence((123, 0)))
        comp = rng.choice(2, size=10_000, p=[0.9, 0.1])
        sd = np.where(comp == 0, 1e-4, 10.0)
        vals = rng.normal(0.0, sd)
        tr = QuartileTracker(100, 0.01, 0.1)
        flags = 0
        for v in vals:
            tr.observe(v)
            b = tr.fences()
            if b is not None and is_outlier(float(v), b):
                flags += 1
        assert 0.08 <= flags / 10_000 <= 0.12
