"""Change of measure: shifted paths, densities, weighted-moment checks."""

import math

import numpy as np
import pytest

from stochscale.expr import parse
from stochscale.girsanov import (
    girsanov_density,
    measure_change_test,
    novikov_value,
    shifted_path,
)
from stochscale.sampling import RngConfig, sample_path

from conftest import qscale


class TestShiftedPath:
    def test_zero_integrand_leaves_path(self, unit_scale):
        part = unit_scale.partition(0.0, 1.0, 5)
        path = sample_path(part, RngConfig(1, 0))
        np.testing.assert_array_equal(shifted_path(parse("0"), path), path.values)

    def test_unit_integrand_on_interval(self, unit_scale):
        part = unit_scale.partition(0.0, 1.0, 6)
        path = sample_path(part, RngConfig(1, 1))
        b = shifted_path(parse("1"), path)
        assert b[-1] == pytest.approx(path.value_at(1.0) - 1.0, abs=1e-12)

    def test_qscale_gap_sum(self):
        scale = qscale(2.0, 0, 3, include_zero=False)
        part = scale.partition(1.0, 8.0, 4)
        path = sample_path(part, RngConfig(4, 2))
        b = shifted_path(parse("1"), path)
        # delta integral of 1 over [1,8] is the gap-length sum 1 + 2 + 4
        assert b[-1] == pytest.approx(path.value_at(8.0) - 7.0, abs=1e-12)
        # the prefixed origin is not shifted
        assert b[0] == path.values[0] == 0.0


class TestDensity:
    def test_zero_integrand_is_one(self, unit_scale):
        part = unit_scale.partition(0.0, 1.0, 5)
        path = sample_path(part, RngConfig(2, 0))
        assert girsanov_density(parse("0"), path, 0.0, 1.0) == 1.0

    def test_dense_unit_integrand(self, unit_scale):
        part = unit_scale.partition(0.0, 1.0, 8)
        path = sample_path(part, RngConfig(2, 1))
        g = girsanov_density(parse("1"), path, 0.0, 1.0)
        assert g == pytest.approx(math.exp(path.value_at(1.0) - 0.5), abs=1e-12)

    def test_discrete_scale_gap_sums(self):
        scale = qscale(2.0, 0, 3, include_zero=False)
        part = scale.partition(1.0, 8.0, 4)
        path = sample_path(part, RngConfig(2, 2))
        i0 = path.index_of(1.0)
        dw = np.diff(path.values[i0:])
        ds = np.diff(path.times[i0:])
        want = math.exp(math.fsum(dw) - 0.5 * math.fsum(ds))
        assert girsanov_density(parse("1"), path, 1.0, 8.0) == pytest.approx(want, abs=1e-12)

    def test_weights_strictly_positive(self, two_band_scale):
        part = two_band_scale.partition(0.0, 3.0, 4)
        for pid in range(50):
            path = sample_path(part, RngConfig(3, pid))
            assert girsanov_density(parse("2*t"), path, 0.0, 3.0) > 0.0


class TestNovikov:
    def test_unit_integrand_dense(self, unit_scale):
        res = novikov_value(parse("1"), unit_scale, 1.0)
        assert res.value == pytest.approx(math.e, abs=1e-12)
        assert not res.overflow

    def test_zero_integrand(self, unit_scale):
        res = novikov_value(parse("0"), unit_scale, 1.0)
        assert res.value == 1.0 and res.exponent == 0.0

    def test_qscale_gap_sum(self):
        scale = qscale(2.0, 0, 3, include_zero=False)
        res = novikov_value(parse("1"), scale, 8.0)
        assert res.exponent == 7.0
        assert res.value == pytest.approx(math.exp(7.0))

    def test_overflow_flagged(self, unit_scale):
        res = novikov_value(parse("30"), unit_scale, 1.0)  # exponent 900
        assert res.overflow and res.value == math.inf


class TestMeasureChange:
    def test_rejects_degenerate_path_count(self, unit_scale):
        with pytest.raises(ValueError):
            measure_change_test(parse("1"), unit_scale, 0.0, 1.0, n=4, n_paths=1, seed=0)

    def test_zero_integrand_reduces_to_brownian_check(self, unit_scale):
        rep = measure_change_test(parse("0"), unit_scale, 0.0, 1.0, n=5, n_paths=4000, seed=11)
        assert rep.mean_weight == 1.0 and rep.se_mean_weight == 0.0
        assert rep.passed
        # with no drift the negative control cannot fail
        assert not rep.negative_control_failed
        assert rep.unweighted_mean == rep.weighted_mean

    def test_unit_drift_two_band(self, two_band_scale):
        rep = measure_change_test(parse("1"), two_band_scale, 0.0, 3.0, n=6, n_paths=8000, seed=5)
        assert rep.m2_target == 3.0
        assert rep.mean_weight_ok and rep.weighted_mean_ok and rep.weighted_m2_ok
        assert rep.negative_control_failed
        # unweighted oracle: raw W second moment matches the target
        assert abs(rep.unweighted_w_m2 - 3.0) <= 3.0 * rep.se_unweighted_w_m2
        assert rep.passed

    def test_increment_table_shape_and_targets(self, two_band_scale):
        rep = measure_change_test(parse("1"), two_band_scale, 0.0, 3.0, n=3, n_paths=3000, seed=9)
        part = two_band_scale.partition(0.0, 3.0, 3)
        assert len(rep.increments) == len(part.times) - 1
        hit = sum(1 for r in rep.increments if r.mean_ok)
        assert hit >= int(0.95 * len(rep.increments))
        gap_row = next(r for r in rep.increments if (r.s_left, r.s_right) == (1.0, 2.0))
        assert gap_row.dt == 1.0

    def test_reproducible(self, unit_scale):
        a = measure_change_test(parse("1"), unit_scale, 0.0, 1.0, n=4, n_paths=500, seed=3)
        b = measure_change_test(parse("1"), unit_scale, 0.0, 1.0, n=4, n_paths=500, seed=3)
        assert a.mean_weight == b.mean_weight
        assert a.weighted_m2 == b.weighted_m2

    def test_keep_paths(self, unit_scale):
        rep = measure_change_test(parse("1"), unit_scale, 0.0, 1.0, n=3, n_paths=50, seed=3, keep_paths=True)
        assert len(rep.path_rows) == 50
        assert all(w > 0 for _, w, _, _ in rep.path_rows)
