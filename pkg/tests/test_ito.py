"""Jump-corrected identity: gap brackets, both sides, the SDE solver."""

import math

import numpy as np
import pytest

from stochscale.expr import CATALOG, FunctionSpec
from stochscale.ito import SdeSpec, euler_delta_sde, gap_correction, general_ito_sides, ito_sides
from stochscale.sampling import PathSample, RefinementPlan, RngConfig, sample_path
from stochscale.timescale import GapInterval, TimeScale

from conftest import qscale


def _fixed_path(times, values):
    t = np.asarray(times, dtype=float)
    return PathSample(times=t, values=np.asarray(values, dtype=float), seed=0, path_id=0)


class TestGapCorrection:
    def test_square_is_quadratic_variation_defect(self):
        fs = FunctionSpec.from_source("x^2")
        path = _fixed_path([0.0, 1.0, 2.0], [0.0, 0.3, -0.1])
        v = gap_correction(fs, GapInterval(1.0, 2.0), path)
        assert v == pytest.approx((-0.4) ** 2 - 1.0, abs=1e-15)
        assert v == pytest.approx(-0.84, abs=1e-15)

    def test_linear_vanishes(self):
        fs = FunctionSpec.from_source("x")
        rng = np.random.default_rng(3)
        for _ in range(100):
            w = rng.normal(size=3)
            w[0] = 0.0
            path = _fixed_path([0.0, 1.0, 2.5], np.cumsum(w))
            assert gap_correction(fs, GapInterval(1.0, 2.5), path) == 0.0

    def test_bilinear_closed_form(self):
        # brute expansion: s+ W+ - s+ W- - s- (W+ - W-) = (s+ - s-)(W+ - W-)
        fs = FunctionSpec.from_source("t*x")
        path = _fixed_path([0.0, 1.0, 2.0], [0.0, 0.3, -0.1])
        assert gap_correction(fs, GapInterval(1.0, 2.0), path) == pytest.approx(-0.4, abs=1e-15)
        rng = np.random.default_rng(8)
        for _ in range(200):
            sl, gap_len = rng.uniform(0.1, 5.0, 2)
            wl, dw = rng.normal(size=2)
            path = _fixed_path([0.0, sl, sl + gap_len], [0.0, wl, wl + dw])
            got = gap_correction(fs, GapInterval(sl, sl + gap_len), path)
            assert got == pytest.approx(gap_len * dw, rel=1e-12, abs=1e-12)

    def test_square_oracle_random_inputs(self):
        # gap_correction for x^2 equals (dW)^2 - ds for any gap data
        fs = FunctionSpec.from_source("x^2")
        rng = np.random.default_rng(44)
        for _ in range(10_000):
            sl, gap_len = rng.uniform(0.05, 4.0, 2)
            wl, dw = rng.normal(0, 1.5, 2)
            path = _fixed_path([0.0, sl, sl + gap_len], [0.0, wl, wl + dw])
            got = gap_correction(fs, GapInterval(sl, sl + gap_len), path)
            want = (path.values[2] - path.values[1]) ** 2 - gap_len
            assert abs(got - want) <= 1e-12 * max(1.0, abs(want))

    def test_missing_endpoint_raises(self, two_band_scale):
        fs = FunctionSpec.from_source("x^2")
        part = two_band_scale.partition(0.0, 1.0, 2)
        path = sample_path(part, RngConfig(0, 0))
        with pytest.raises(KeyError):
            gap_correction(fs, GapInterval(1.0, 2.0), path)


class TestItoSides:
    def test_linear_residual_exactly_zero(self, mixed_scale):
        fs = FunctionSpec.from_source("x")
        part = mixed_scale.partition(0.0, 3.0, 5)
        for pid in range(100):
            path = sample_path(part, RngConfig(17, pid))
            rep = ito_sides(fs, mixed_scale, path, 0.0, 3.0)
            assert rep.residual == 0.0
            assert rep.correction_sum == 0.0

    @pytest.mark.parametrize("source", CATALOG)
    def test_discrete_scale_telescopes(self, source):
        scale = qscale(2.0, -6, 3, include_zero=True)
        part = scale.partition(0.0, 8.0, 6)
        fs = FunctionSpec.from_source(source)
        worst = 0.0
        for pid in range(100):
            path = sample_path(part, RngConfig(23, pid))
            rep = ito_sides(fs, scale, path, 0.0, 8.0)
            worst = max(worst, abs(rep.residual))
        assert worst <= 1e-9

    def test_interior_window(self, q2_scale):
        fs = FunctionSpec.from_source("x^2")
        part = q2_scale.partition(0.0, 8.0, 4)
        path = sample_path(part, RngConfig(2, 0))
        rep = ito_sides(fs, q2_scale, path, 0.25, 4.0)
        assert abs(rep.residual) <= 1e-12

    def test_dense_rms_contracts_with_refinement(self, mixed_scale):
        fs = FunctionSpec.from_source("x^2")
        plan = RefinementPlan(mixed_scale, 0.0, 3.0, (6, 8, 10))
        res = {n: [] for n in plan.levels}
        for pid in range(200):
            paths = plan.sample(RngConfig(31, pid))
            for n in plan.levels:
                res[n].append(ito_sides(fs, mixed_scale, paths[n], 0.0, 3.0).residual)
        rms = {n: math.sqrt(np.mean(np.square(res[n]))) for n in plan.levels}
        assert rms[6] > rms[8] > rms[10]
        # two mesh halvings scale the dense defect by ~2
        assert rms[6] / rms[8] == pytest.approx(2.0, rel=0.4)
        assert rms[8] / rms[10] == pytest.approx(2.0, rel=0.4)

    def test_correction_sum_refinement_invariant(self, mixed_scale):
        fs = FunctionSpec.from_source("exp(x)")
        plan = RefinementPlan(mixed_scale, 0.0, 3.0, (3, 6, 9))
        paths = plan.sample(RngConfig(7, 1))
        sums = {n: ito_sides(fs, mixed_scale, paths[n], 0.0, 3.0).correction_sum for n in (3, 6, 9)}
        assert len(set(sums.values())) == 1

    def test_gap_terms_reported_per_gap(self, mixed_scale):
        fs = FunctionSpec.from_source("x^2")
        part = mixed_scale.partition(0.0, 3.0, 3)
        path = sample_path(part, RngConfig(0, 0))
        rep = ito_sides(fs, mixed_scale, path, 0.0, 3.0)
        assert [(g.gap.left, g.gap.right) for g in rep.gap_terms] == [(1.0, 1.5), (1.5, 2.0)]
        assert rep.correction_sum == pytest.approx(sum(g.value for g in rep.gap_terms), abs=1e-15)


class TestEulerSde:
    def test_pure_diffusion_reproduces_w(self, mixed_scale):
        part = mixed_scale.partition(0.0, 3.0, 5)
        path = sample_path(part, RngConfig(4, 0))
        x = euler_delta_sde(SdeSpec.from_sources("0", "1", 0.0), path, 0.0, 3.0)
        np.testing.assert_allclose(x, path.values[path.index_of(0.0) :], atol=1e-13)

    def test_pure_drift_is_elapsed_time(self, mixed_scale):
        part = mixed_scale.partition(0.0, 3.0, 5)
        path = sample_path(part, RngConfig(4, 1))
        x = euler_delta_sde(SdeSpec.from_sources("1", "0", 0.0), path, 0.0, 3.0)
        i0 = path.index_of(0.0)
        np.testing.assert_allclose(x, path.times[i0:] - 0.0, atol=1e-13)

    def test_discrete_scale_matches_closed_recursion(self):
        scale = qscale(2.0, 0, 3, include_zero=False)
        part = scale.partition(1.0, 8.0, 2)
        path = sample_path(part, RngConfig(6, 0))
        sde = SdeSpec.from_sources("t", "x", 1.0)
        x = euler_delta_sde(sde, path, 1.0, 8.0)
        # recompute the recursion by hand
        i0 = path.index_of(1.0)
        s = path.times[i0:]
        w = path.values[i0:]
        cur = 1.0
        for j in range(len(s) - 1):
            cur = cur + s[j] * (s[j + 1] - s[j]) + cur * (w[j + 1] - w[j])
            assert x[j + 1] == cur


class TestGeneralIto:
    def test_reduces_to_plain_identity(self, mixed_scale):
        fs = FunctionSpec.from_source("x^2")
        sde = SdeSpec.from_sources("0", "1", 0.0)
        part = mixed_scale.partition(0.0, 3.0, 6)
        for pid in range(20):
            path = sample_path(part, RngConfig(9, pid))
            x = euler_delta_sde(sde, path, 0.0, 3.0)
            base = ito_sides(fs, mixed_scale, path, 0.0, 3.0)
            for variant in ("as_printed", "substituted"):
                rep = general_ito_sides(fs, sde, mixed_scale, x, path, 0.0, 3.0, variant)
                assert rep.lhs == pytest.approx(base.lhs, abs=1e-12)
                assert rep.rhs == pytest.approx(base.rhs, abs=1e-12)

    def test_printed_variant_systematic_offset(self, unit_scale):
        # drift 1, f = x on a dense window: the printed right side misses
        # the drift increment, leaving a residual of t2 - t1
        fs = FunctionSpec.from_source("x")
        sde = SdeSpec.from_sources("1", "1", 0.0)
        part = unit_scale.partition(0.0, 1.0, 8)
        offsets = []
        for pid in range(50):
            path = sample_path(part, RngConfig(13, pid))
            x = euler_delta_sde(sde, path, 0.0, 1.0)
            rep = general_ito_sides(fs, sde, unit_scale, x, path, 0.0, 1.0, "as_printed")
            offsets.append(rep.residual)
        assert np.mean(offsets) == pytest.approx(1.0, abs=1e-9)
        assert np.std(offsets) <= 1e-9

    def test_substituted_variant_is_consistent(self, unit_scale):
        fs = FunctionSpec.from_source("x")
        sde = SdeSpec.from_sources("1", "1", 0.0)
        part = unit_scale.partition(0.0, 1.0, 8)
        for pid in range(20):
            path = sample_path(part, RngConfig(13, pid))
            x = euler_delta_sde(sde, path, 0.0, 1.0)
            rep = general_ito_sides(fs, sde, unit_scale, x, path, 0.0, 1.0, "substituted")
            assert abs(rep.residual) <= 1e-12

    def test_substituted_telescopes_on_discrete_scale(self):
        scale = qscale(2.0, -4, 3, include_zero=True)
        part = scale.partition(0.0, 8.0, 4)
        fs = FunctionSpec.from_source("x^2 + t^2")
        sde = SdeSpec.from_sources("t + x", "1 + x^2", 0.5)
        worst = 0.0
        for pid in range(100):
            path = sample_path(part, RngConfig(19, pid))
            x = euler_delta_sde(sde, path, 0.0, 8.0)
            rep = general_ito_sides(fs, sde, scale, x, path, 0.0, 8.0, "substituted")
            worst = max(worst, abs(rep.residual) / max(1.0, abs(rep.lhs)))
        assert worst <= 1e-9

    def test_substituted_rms_contracts_for_square(self, unit_scale):
        fs = FunctionSpec.from_source("x^2")
        sde = SdeSpec.from_sources("1", "1", 0.0)
        plan = RefinementPlan(unit_scale, 0.0, 1.0, (6, 10))
        res = {6: [], 10: []}
        for pid in range(100):
            paths = plan.sample(RngConfig(29, pid))
            for n in (6, 10):
                x = euler_delta_sde(sde, paths[n], 0.0, 1.0)
                res[n].append(general_ito_sides(fs, sde, unit_scale, x, paths[n], 0.0, 1.0, "substituted").residual)
        assert math.sqrt(np.mean(np.square(res[10]))) < math.sqrt(np.mean(np.square(res[6])))

    def test_unknown_variant_rejected(self, unit_scale):
        fs = FunctionSpec.from_source("x")
        sde = SdeSpec.from_sources("0", "1", 0.0)
        part = unit_scale.partition(0.0, 1.0, 3)
        path = sample_path(part, RngConfig(0, 0))
        x = euler_delta_sde(sde, path, 0.0, 1.0)
        with pytest.raises(ValueError):
            general_ito_sides(fs, sde, unit_scale, x, path, 0.0, 1.0, "other")
