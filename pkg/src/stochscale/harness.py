"""Monte-Carlo orchestration: convergence studies and summary statistics.

Studies sample every trajectory once at the finest requested level and
read it at the coarser levels (nested grids), so each level sees the same
underlying path and the only thing that changes is the approximation
mesh.  Reductions run in a fixed path order with exactly rounded sums, so
every table is bitwise reproducible from (seed, config).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .delta import csum, delta_stochastic_integral, delta_time_integral
from .expr import FunctionSpec
from .ito import ito_sides
from .sampling import PathSample, RefinementPlan, RngConfig
from .stochexp import exponential_report
from .timescale import TimeScale

__all__ = [
    "SummaryStats",
    "summarize",
    "lemma2_statistic",
    "lemma2_expected_variance",
    "ConvergenceRow",
    "ConvergenceTable",
    "convergence_study",
    "STUDY_TARGETS",
]

STUDY_TARGETS = ("time_integral", "stoch_integral", "lemma2", "ito_residual", "exp_error")

_Z95 = 1.959963984540054


@dataclass(frozen=True)
class SummaryStats:
    mean: float
    variance: float  # unbiased
    se: float
    ci95: tuple[float, float]


def summarize(values) -> SummaryStats:
    """Mean, unbiased variance, standard error and 95% CI of a sample."""
    arr = np.asarray(values, dtype=float)
    n = len(arr)
    if n == 0:
        raise ValueError("cannot summarize an empty sample")
    mean = csum(arr) / n
    if n == 1:
        var = 0.0
    else:
        var = csum((arr - mean) ** 2) / (n - 1)
    se = math.sqrt(var / n)
    return SummaryStats(mean=mean, variance=var, se=se, ci95=(mean - _Z95 * se, mean + _Z95 * se))


def lemma2_statistic(f, scale: TimeScale, path: PathSample, t1: float, t2: float) -> float:
    """Quadratic-variation fluctuation over the dense-class subintervals:
    sum over label-'a' subintervals of f(s_{i-1}, W_{s_{i-1}})
    ((dW_i)^2 - dt_i).  Gap subintervals contribute nothing."""
    part = path.partition
    if part is None:
        raise ValueError("path carries no partition")
    i1, i2 = path.index_of(t1), path.index_of(t2)
    j1, j2 = i1 - path.offset, i2 - path.offset
    if j1 < 0:
        raise ValueError(f"t1={t1} lies before the scale window of this path")
    mask = ~part.gap_mask[j1:j2]
    s_left = path.times[i1:i2][mask]
    w = path.values[i1 : i2 + 1]
    dw = np.diff(w)[mask]
    dt = np.diff(path.times[i1 : i2 + 1])[mask]
    g = _tx_values(f, s_left, w[:-1][mask])
    return csum(g * (dw * dw - dt))


def lemma2_expected_variance(part, t1: float, t2: float, f_sq_max: float = 1.0) -> float:
    """Theoretical variance 2 sum over 'a'-subintervals of f^2 dt^2 for a
    constant f bound (exact for f identically constant)."""
    times = part.times
    i1 = int(np.searchsorted(times, t1))
    i2 = int(np.searchsorted(times, t2))
    dt = np.diff(times[i1 : i2 + 1])[~part.gap_mask[i1:i2]]
    return 2.0 * f_sq_max * csum(dt * dt)


def _tx_values(f, tvals: np.ndarray, xvals: np.ndarray) -> np.ndarray:
    """Evaluate f on (t, x) pairs; f may be a FunctionSpec, expression,
    scalar or aligned array."""
    from .expr import eval_expr

    if isinstance(f, FunctionSpec):
        f = f.f
    if isinstance(f, np.ndarray):
        return f
    if isinstance(f, (int, float)):
        return np.full(tvals.shape, float(f))
    return np.broadcast_to(np.asarray(eval_expr(f, tvals, xvals), dtype=float), tvals.shape).copy()


@dataclass(frozen=True)
class ConvergenceRow:
    level: int
    mean: float
    rms: float
    variance: float
    bound: float | None
    paths: int


@dataclass
class ConvergenceTable:
    target: str
    rows: list[ConvergenceRow] = field(default_factory=list)

    def column(self, name: str) -> list:
        return [getattr(r, name) for r in self.rows]


def _rms(values: np.ndarray) -> float:
    return math.sqrt(csum(values * values) / len(values))


def convergence_study(
    target: str,
    scale: TimeScale,
    t1: float,
    t2: float,
    levels,
    n_paths: int,
    seed: int,
    f: FunctionSpec | None = None,
    A=None,
) -> ConvergenceTable:
    """Per-level statistics of the chosen target over a common path set.

    time_integral  left-sum value of the (deterministic) integrand f
    stoch_integral |S_n - S_finest| for the same trajectory
    lemma2         quadratic-variation fluctuation statistic
    ito_residual   residual of the jump-corrected identity for f
    exp_error      relative error of the recursive vs closed exponential
    """
    if target not in STUDY_TARGETS:
        raise ValueError(f"unknown study target {target!r}; expected one of {STUDY_TARGETS}")
    levels = sorted(set(int(n) for n in levels))
    plan = RefinementPlan(scale, t1, t2, tuple(levels))

    if target == "time_integral":
        rows = []
        for n in levels:
            part = plan.partitions[n]
            value = delta_time_integral(f.f if isinstance(f, FunctionSpec) else f, part, t1, t2)
            rows.append(ConvergenceRow(level=n, mean=value, rms=abs(value), variance=0.0, bound=None, paths=1))
        return ConvergenceTable(target=target, rows=rows)

    samples: dict[int, list[float]] = {n: [] for n in levels}
    f_sq_max = 0.0  # running max of f^2 along evaluated paths, for the lemma2 bound
    for path_id in range(n_paths):
        paths = plan.sample(RngConfig(seed, path_id))
        fine = paths[plan.finest]
        if target == "stoch_integral":
            ref = delta_stochastic_integral(_stoch_g(f, fine), fine, t1, t2)
        for n in levels:
            p = paths[n]
            if target == "stoch_integral":
                v = delta_stochastic_integral(_stoch_g(f, p), p, t1, t2) - ref
            elif target == "lemma2":
                v = lemma2_statistic(f if f is not None else 1.0, scale, p, t1, t2)
                if n == plan.finest:
                    g = _tx_values(f if f is not None else 1.0, p.times, p.values)
                    f_sq_max = max(f_sq_max, float(np.max(g * g)))
            elif target == "ito_residual":
                v = ito_sides(f, scale, p, t1, t2).residual
            else:  # exp_error
                rep = exponential_report(A if A is not None else 1.0, p, t1, t2, scale=scale)
                v = rep.rel_error
            samples[n].append(float(v))

    rows = []
    for n in levels:
        arr = np.asarray(samples[n])
        stats = summarize(arr)
        bound = 2.0 ** (-(n - 1)) * (t2 - t1) * f_sq_max if target == "lemma2" else None
        rows.append(
            ConvergenceRow(
                level=n, mean=stats.mean, rms=_rms(arr), variance=stats.variance, bound=bound, paths=len(arr)
            )
        )
    return ConvergenceTable(target=target, rows=rows)


def _stoch_g(f, path: PathSample) -> np.ndarray:
    """Stochastic-integral integrand values along a path: f(t, W_t)."""
    if f is None:
        return np.ones(path.times.shape)
    return _tx_values(f, path.times, path.values)
