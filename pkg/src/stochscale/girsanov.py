"""Change of measure for Brownian motion on a time scale.

The shifted process B(t) = W(t) - int A ds (delta integral from the
window start) becomes a standard Brownian motion under the reweighted
measure whose density is exp(int A dW - int A^2 ds / 2).  The
verification here is statistical: weighted increment moments of B are
compared against the Brownian targets (mean 0, second moment equal to
the increment length) at three standard errors, alongside the mean
weight, which must be 1 when the squared-integrand exponential is
finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .delta import csum, exact_increments, values_on
from .sampling import RngConfig, sample_path
from .timescale import TimeScale

__all__ = [
    "NovikovValue",
    "shifted_path",
    "girsanov_density",
    "novikov_value",
    "IncrementMoments",
    "MeasureChangeReport",
    "measure_change_test",
]


def shifted_path(A, path) -> np.ndarray:
    """B values at the path times: B(s) = W(s) minus the running delta
    time integral of A from the window start (the first scale time of the
    path); the value at a prefixed time 0 is W itself."""
    j0 = path.offset
    a_left = values_on(A, path.times[j0:])[:-1]
    terms = a_left * np.diff(path.times[j0:])
    b = path.values.copy()
    b[j0 + 1 :] -= np.cumsum(terms)
    return b


def girsanov_density(A, path, t0: float, t: float) -> float:
    """Radon-Nikodym weight exp(int A dW - int A^2 ds / 2) over [t0, t]."""
    i1, i2 = path.index_of(t0), path.index_of(t)
    a_left = values_on(A, path.times)[i1:i2]
    hi, lo = exact_increments(path.values[i1 : i2 + 1])
    s1 = csum(np.concatenate([a_left * hi, a_left * lo]))
    s2 = csum((a_left * a_left) * np.diff(path.times[i1 : i2 + 1]))
    return math.exp(s1 - 0.5 * s2)


class NovikovValue(NamedTuple):
    """exp(int A^2 ds) over [min(scale), t] and its overflow status."""

    value: float
    exponent: float
    overflow: bool


def novikov_value(A, scale: TimeScale, t: float, n: int = 10) -> NovikovValue:
    """Integrability gauge exp(int A^2 ds); ``overflow`` flags an exponent
    above 700 (the value is then inf).  Only deterministic A is supported."""
    t0 = scale.min
    if not t > t0:
        raise ValueError(f"need t > min(scale) = {t0}, got {t}")
    part = scale.partition(t0, t, n)
    a_left = values_on(A, part.times)[:-1]
    exponent = csum((a_left * a_left) * np.diff(part.times))
    overflow = exponent > 700.0
    return NovikovValue(value=math.inf if overflow else math.exp(exponent), exponent=exponent, overflow=overflow)


@dataclass
class IncrementMoments:
    """Weighted moment checks for one partition subinterval of B."""

    s_left: float
    s_right: float
    dt: float
    weighted_mean: float
    se_mean: float
    mean_ok: bool
    weighted_m2: float
    se_m2: float
    m2_ok: bool


class _VecAcc:
    """Fixed-order Neumaier accumulator over float vectors."""

    def __init__(self, size: int):
        self.total = np.zeros(size)
        self.comp = np.zeros(size)

    def add(self, x: np.ndarray):
        t = self.total + x
        swap = np.abs(self.total) >= np.abs(x)
        self.comp += np.where(swap, (self.total - t) + x, (x - t) + self.total)
        self.total = t

    def value(self) -> np.ndarray:
        return self.total + self.comp


@dataclass
class MeasureChangeReport:
    """Weighted-moment verification of the change of measure.

    All moments are computed over the same path set; targets at three
    standard errors: mean weight 1, weighted mean of B(T) - B(t0) zero,
    weighted second moment T - t0.  The unweighted second moment of
    W(T) - W(t0) is included as the oracle confirming that target, and the
    unweighted mean of B is the negative control (it must fail whenever
    the drift integrand is not identically zero).
    """

    n: int
    n_paths: int
    seed: int
    t0: float
    t_end: float
    mean_weight: float
    se_mean_weight: float
    mean_weight_ok: bool
    weighted_mean: float
    se_weighted_mean: float
    weighted_mean_ok: bool
    weighted_m2: float
    se_weighted_m2: float
    m2_target: float
    weighted_m2_ok: bool
    unweighted_mean: float
    se_unweighted_mean: float
    negative_control_failed: bool
    unweighted_w_m2: float
    se_unweighted_w_m2: float
    novikov_exponent: float
    novikov_overflow: bool
    passed: bool
    increments: list[IncrementMoments] = field(default_factory=list)
    path_rows: list[tuple[int, float, float, float]] = field(default_factory=list)  # (path_id, weight, B, W)


def _mean_se(sum1: float, sum2: float, n: int) -> tuple[float, float]:
    mean = sum1 / n
    var = max((sum2 - n * mean * mean) / (n - 1), 0.0)
    return mean, math.sqrt(var / n)


def measure_change_test(
    A,
    scale: TimeScale,
    t0: float,
    t_end: float,
    n: int,
    n_paths: int,
    seed: int,
    keep_paths: bool = False,
) -> MeasureChangeReport:
    """Simulate under the unweighted measure, weight each path by the
    density over [t0, t_end], and test the weighted Brownian targets."""
    if n_paths < 2:
        raise ValueError(f"need at least 2 paths, got {n_paths}")
    part = scale.partition(t0, t_end, n)
    m = len(part.times) - 1
    # deterministic per-subinterval quantities shared by every path
    a_left = values_on(A, part.times)[:-1]
    dt = np.diff(part.times)
    drift_terms = a_left * dt
    s2 = csum((a_left * a_left) * dt)
    drift_total = csum(drift_terms)

    acc_gdb = _VecAcc(m)
    acc_gdb_sq = _VecAcc(m)
    acc_gdb2 = _VecAcc(m)
    acc_gdb2_sq = _VecAcc(m)
    scalars = _VecAcc(10)  # G, G^2, GB, (GB)^2, GB^2, (GB^2)^2, B, B^2, W^2, W^4
    rows: list[tuple[int, float, float, float]] = []

    for path_id in range(n_paths):
        path = sample_path(part, RngConfig(seed, path_id))
        j0 = path.offset
        w = path.values[j0:]
        hi, lo = exact_increments(w)
        s1 = csum(np.concatenate([a_left * hi, a_left * lo]))
        g = math.exp(s1 - 0.5 * s2)
        dw = np.diff(w)
        db = dw - drift_terms
        w_total = float(w[-1] - w[0])
        b_total = w_total - drift_total
        acc_gdb.add(g * db)
        acc_gdb_sq.add((g * db) ** 2)
        acc_gdb2.add(g * db * db)
        acc_gdb2_sq.add((g * db * db) ** 2)
        gb = g * b_total
        gb2 = g * b_total * b_total
        w2 = w_total * w_total
        scalars.add(
            np.array([g, g * g, gb, gb * gb, gb2, gb2 * gb2, b_total, b_total * b_total, w2, w2 * w2])
        )
        if keep_paths:
            rows.append((path_id, g, b_total, w_total))

    sums = scalars.value()
    npaths = n_paths
    mean_g, se_g = _mean_se(sums[0], sums[1], npaths)
    wmean_b, se_wmean_b = _mean_se(sums[2], sums[3], npaths)
    wm2_b, se_wm2_b = _mean_se(sums[4], sums[5], npaths)
    umean_b, se_umean_b = _mean_se(sums[6], sums[7], npaths)
    um2_w, se_um2_w = _mean_se(sums[8], sums[9], npaths)
    target = t_end - t0

    inc_rows: list[IncrementMoments] = []
    v_gdb, v_gdb_sq = acc_gdb.value(), acc_gdb_sq.value()
    v_gdb2, v_gdb2_sq = acc_gdb2.value(), acc_gdb2_sq.value()
    for j in range(m):
        mu_j, se_j = _mean_se(float(v_gdb[j]), float(v_gdb_sq[j]), npaths)
        m2_j, se2_j = _mean_se(float(v_gdb2[j]), float(v_gdb2_sq[j]), npaths)
        inc_rows.append(
            IncrementMoments(
                s_left=float(part.times[j]),
                s_right=float(part.times[j + 1]),
                dt=float(dt[j]),
                weighted_mean=mu_j,
                se_mean=se_j,
                mean_ok=abs(mu_j) <= 3.0 * se_j,
                weighted_m2=m2_j,
                se_m2=se2_j,
                m2_ok=abs(m2_j - float(dt[j])) <= 3.0 * se2_j,
            )
        )

    nov = novikov_value(A, scale, t_end, n) if t_end > scale.min else NovikovValue(1.0, 0.0, False)
    mean_weight_ok = abs(mean_g - 1.0) <= 3.0 * se_g
    weighted_mean_ok = abs(wmean_b) <= 3.0 * se_wmean_b
    weighted_m2_ok = abs(wm2_b - target) <= 3.0 * se_wm2_b
    negative_control_failed = abs(umean_b) > 3.0 * se_umean_b
    return MeasureChangeReport(
        n=n,
        n_paths=n_paths,
        seed=seed,
        t0=t0,
        t_end=t_end,
        mean_weight=mean_g,
        se_mean_weight=se_g,
        mean_weight_ok=mean_weight_ok,
        weighted_mean=wmean_b,
        se_weighted_mean=se_wmean_b,
        weighted_mean_ok=weighted_mean_ok,
        weighted_m2=wm2_b,
        se_weighted_m2=se_wm2_b,
        m2_target=target,
        weighted_m2_ok=weighted_m2_ok,
        unweighted_mean=umean_b,
        se_unweighted_mean=se_umean_b,
        negative_control_failed=negative_control_failed,
        unweighted_w_m2=um2_w,
        se_unweighted_w_m2=se_um2_w,
        novikov_exponent=nov.exponent,
        novikov_overflow=nov.overflow,
        passed=mean_weight_ok and weighted_mean_ok and weighted_m2_ok,
        increments=inc_rows,
        path_rows=rows,
    )
