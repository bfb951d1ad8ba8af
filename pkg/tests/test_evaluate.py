"""Agreement metrics, Bland-Altman statistics, and the ROI growth sweep."""

import numpy as np
import pytest

from rppgkit import (ArgumentError, BlandAltmanStats, DataError, HrConfig,
                     HrSeries, Pairs, Roi, SynthConfig, align, bland_altman,
                     generate, mae, metrics_report, pearson, rmse, roi_sweep,
                     window_average_reference)


def series(t, bpm, valid=None, window_s=10.0, stride_s=1.0):
    t = np.asarray(t, dtype=np.float64)
    bpm = np.asarray(bpm, dtype=np.float64)
    if valid is None:
        valid = np.ones(len(t), dtype=bool)
    return HrSeries(t, bpm, np.asarray(valid, dtype=bool), window_s, stride_s)


class TestAlign:
    def test_within_tolerance_pairs(self):
        pred = series([5.0, 6.0, 7.0], [120.0, 121.0, 122.0])
        ref = series([5.4, 6.4, 7.4], [118.0, 119.0, 120.0])
        pairs = align(pred, ref, tol_s=0.5)
        assert len(pairs) == 3
        np.testing.assert_array_equal(pairs.pred, [120.0, 121.0, 122.0])
        np.testing.assert_array_equal(pairs.ref, [118.0, 119.0, 120.0])

    def test_outside_tolerance_dropped(self):
        pred = series([5.0, 6.0], [120.0, 121.0])
        ref = series([5.4, 6.6], [118.0, 119.0])
        # 6.0 sits 0.6 s from both references, beyond the 0.5 s default
        pairs = align(pred, ref, tol_s=0.5)
        assert len(pairs) == 1
        assert pairs.pred[0] == 120.0
        pairs = align(pred, ref, tol_s=0.7)
        assert len(pairs) == 2

    def test_invalid_windows_skipped(self):
        pred = series([5.0, 6.0, 7.0], [120.0, 200.0, 122.0],
                      valid=[True, False, True])
        ref = series([5.0, 6.0, 7.0], [118.0, 119.0, 120.0])
        pairs = align(pred, ref)
        assert len(pairs) == 2
        np.testing.assert_array_equal(pairs.pred, [120.0, 122.0])

    def test_invalid_reference_not_matched(self):
        pred = series([5.0], [120.0])
        ref = series([5.0, 5.2], [999.0, 118.0], valid=[False, True])
        pairs = align(pred, ref)
        assert pairs.ref[0] == 118.0

    def test_no_overlap_raises(self):
        pred = series([5.0], [120.0])
        ref = series([50.0], [118.0])
        with pytest.raises(DataError):
            align(pred, ref)


class TestMetrics:
    def test_mae_rmse_hand_case(self):
        pairs = Pairs([0.0, 1.0], [120.0, 125.0], [118.0, 121.0])
        assert mae(pairs) == pytest.approx(3.0)
        assert rmse(pairs) == pytest.approx(np.sqrt(10.0))

    def test_pearson_hand_case(self):
        pairs = Pairs(np.arange(4.0), [1.0, 2.0, 3.0, 4.0], [1.0, 3.0, 2.0, 4.0])
        assert pearson(pairs) == pytest.approx(0.8, abs=1e-12)

    def test_pearson_affine_invariance(self):
        rng = np.random.default_rng(11)
        pred = rng.normal(120.0, 10.0, 50)
        ref = pred + rng.normal(0.0, 3.0, 50)
        base = pearson(Pairs(np.arange(50.0), pred, ref))
        scaled = pearson(Pairs(np.arange(50.0), 3.0 * pred - 7.0, 0.5 * ref + 40.0))
        assert scaled == pytest.approx(base, abs=1e-9)

    def test_perfect_agreement(self):
        pairs = Pairs(np.arange(5.0), [100, 110, 120, 130, 140],
                      [100, 110, 120, 130, 140])
        assert mae(pairs) == 0.0
        assert rmse(pairs) == 0.0
        assert pearson(pairs) == pytest.approx(1.0)

    def test_mae_never_exceeds_rmse(self):
        rng = np.random.default_rng(13)
        for _ in range(200):
            n = rng.integers(2, 40)
            pairs = Pairs(np.arange(n, dtype=np.float64),
                          rng.normal(120, 15, n), rng.normal(120, 15, n))
            assert mae(pairs) <= rmse(pairs) + 1e-12

    def test_constant_series_rejected(self):
        pairs = Pairs(np.arange(3.0), [120.0] * 3, [118.0, 119.0, 120.0])
        with pytest.raises(DataError):
            pearson(pairs)

    def test_metrics_report_allow_constant(self):
        pairs = Pairs(np.arange(3.0), [120.0] * 3, [118.0, 119.0, 120.0])
        with pytest.raises(DataError):
            metrics_report(pairs)
        report = metrics_report(pairs, allow_constant=True)
        assert report.pearson_r is None
        assert report.n == 3
        assert report.mae == pytest.approx(1.0)

    def test_empty_pairs_rejected(self):
        empty = Pairs(np.empty(0), np.empty(0), np.empty(0))
        with pytest.raises(DataError):
            mae(empty)


class TestBlandAltman:
    def test_hand_case(self):
        pairs = Pairs([0.0, 1.0], [120.0, 125.0], [118.0, 121.0])
        ba = bland_altman(pairs)
        assert ba.bias == pytest.approx(3.0)
        assert ba.sd == pytest.approx(np.sqrt(2.0))  # diffs 2, 4; ddof=1
        assert ba.loa_low == pytest.approx(3.0 - 1.96 * np.sqrt(2.0))
        assert ba.loa_high == pytest.approx(3.0 + 1.96 * np.sqrt(2.0))
        assert ba.pairs == ((119.0, 2.0), (123.0, 4.0))

    def test_recovers_seeded_normal_difference(self):
        rng = np.random.default_rng(17)
        n = 500
        ref = rng.uniform(90.0, 200.0, n)
        pred = ref + rng.normal(0.8, 1.5, n)
        ba = bland_altman(Pairs(np.arange(n, dtype=np.float64), pred, ref))
        assert ba.bias == pytest.approx(0.8, abs=0.2)
        assert ba.sd == pytest.approx(1.5, abs=0.2)
        inside = [abs(d - ba.bias) <= 1.96 * ba.sd for _, d in ba.pairs]
        assert np.mean(inside) >= 0.93

    def test_swapping_roles_negates_bias(self):
        rng = np.random.default_rng(19)
        a = rng.normal(120, 10, 40)
        b = a + rng.normal(2.0, 1.0, 40)
        t = np.arange(40.0)
        fwd = bland_altman(Pairs(t, a, b))
        rev = bland_altman(Pairs(t, b, a))
        assert fwd.bias == pytest.approx(-rev.bias)
        assert fwd.sd == pytest.approx(rev.sd)

    def test_needs_two_pairs(self):
        with pytest.raises(DataError):
            bland_altman(Pairs([0.0], [120.0], [118.0]))

    def test_stats_type(self):
        pairs = Pairs([0.0, 1.0, 2.0], [120.0, 125.0, 119.0],
                      [118.0, 121.0, 117.0])
        assert isinstance(bland_altman(pairs), BlandAltmanStats)


class TestWindowAverageReference:
    def test_means_on_grid(self):
        grid = series([5.0, 7.0], [0.0, 0.0], window_s=10.0, stride_s=2.0)
        t = np.array([0.0, 4.0, 9.0, 11.0])
        bpm = np.array([100.0, 110.0, 120.0, 130.0])
        out = window_average_reference(t, bpm, grid)
        # window at 5.0 covers [0, 10]: samples 100, 110, 120
        assert out.bpm[0] == pytest.approx(110.0)
        # window at 7.0 covers [2, 12]: samples 110, 120, 130
        assert out.bpm[1] == pytest.approx(120.0)
        assert np.all(out.valid)

    def test_empty_window_invalid(self):
        grid = series([5.0, 50.0], [0.0, 0.0], window_s=10.0, stride_s=45.0)
        out = window_average_reference(np.array([5.0]), np.array([100.0]), grid)
        assert out.valid[0] and not out.valid[1]

    def test_no_coverage_raises(self):
        grid = series([5.0], [0.0])
        with pytest.raises(DataError):
            window_average_reference(np.array([99.0]), np.array([100.0]), grid)


@pytest.fixture(scope="module")
def scene():
    config = SynthConfig(width=96, height=96, fps=25.0, duration_s=20.0,
                         skin_region=Roi(8, 8, 40, 40), pulse_bpm=120.0,
                         seed=21)
    seq, _ = generate(config)
    return seq, config.skin_region


class TestRoiSweep:

    def test_growth_within_skin_changes_little(self, scene):
        seq, roi = scene
        result = roi_sweep(seq, Roi(12, 12, 20, 20), increments=(4, 8),
                           hr_config=HrConfig(window_s=10.0, stride_s=2.0))
        assert result.increments_px == (4, 8)
        # two increments x windows each
        n_windows = len(result.relative_changes_bpm) // 2
        assert len(result.relative_changes_bpm) == 2 * n_windows
        assert np.all(np.abs(result.relative_changes_bpm) <= 5.0)
        assert result.histogram.sum() == len(result.relative_changes_bpm)

    def test_zero_increment_gives_zero_diffs(self, scene):
        seq, _ = scene
        result = roi_sweep(seq, Roi(12, 12, 20, 20), increments=(0,),
                           hr_config=HrConfig(window_s=10.0, stride_s=5.0))
        np.testing.assert_array_equal(result.relative_changes_bpm, 0.0)

    def test_histogram_bins_span_and_width(self, scene):
        seq, _ = scene
        result = roi_sweep(seq, Roi(12, 12, 20, 20), increments=(4,),
                           hr_config=HrConfig(window_s=10.0, stride_s=5.0))
        edges = result.bin_edges
        assert edges[0] <= -60.0 and edges[-1] >= 60.0
        np.testing.assert_allclose(np.diff(edges), 5.0)
        assert len(result.histogram) == len(edges) - 1

    def test_out_of_bounds_increment_named(self, scene):
        seq, _ = scene
        with pytest.raises(ArgumentError, match="80"):
            roi_sweep(seq, Roi(12, 12, 20, 20), increments=(4, 80))

    def test_workers_match_serial(self, scene):
        seq, _ = scene
        kwargs = dict(increments=(4, 8),
                      hr_config=HrConfig(window_s=10.0, stride_s=5.0))
        serial = roi_sweep(seq, Roi(12, 12, 20, 20), workers=1, **kwargs)
        parallel = roi_sweep(seq, Roi(12, 12, 20, 20), workers=4, **kwargs)
        np.testing.assert_array_equal(serial.relative_changes_bpm,
                                      parallel.relative_changes_bpm)
