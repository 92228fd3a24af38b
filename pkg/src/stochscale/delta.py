"""Extension operator, delta integrals and the delta derivative.

Both integrals are left-endpoint sums over a working partition: across a
gap the extended integrand is constant, so the single left term is the
exact integral there; on dense stretches the sum is the usual
Riemann/Ito approximant.  Sums use exact error-free accumulation
(two-term increment expansions + fsum), so results do not depend on
chunking and the stochastic sum of a constant integrand telescopes to the
same float as the endpoint difference.
"""

from __future__ import annotations

import math
from typing import Callable, Union

import numpy as np

from .expr import Expr, FunctionSpec, eval_expr, uses_var
from .sampling import PathSample
from .timescale import TimeScale, WorkingPartition

__all__ = [
    "two_sum",
    "exact_increments",
    "csum",
    "values_on",
    "extend_value",
    "delta_time_integral",
    "delta_stochastic_integral",
    "delta_derivative",
]

Integrand = Union[np.ndarray, Expr, Callable[[float], float], float]


def two_sum(a, b):
    """Error-free sum: returns (s, e) with s + e == a + b exactly."""
    s = a + b
    v = s - a
    e = (a - (s - v)) + (b - v)
    return s, e


def exact_increments(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Consecutive differences as exact two-float expansions (hi, lo)."""
    return two_sum(values[1:], -values[:-1])


def csum(terms) -> float:
    """Compensated (exactly rounded) sum of an array of doubles."""
    return math.fsum(terms)


def values_on(g: Integrand, times: np.ndarray) -> np.ndarray:
    """Integrand values aligned with ``times``.

    Accepts an aligned ndarray, a scalar, an expression in t, or a
    callable t -> value.
    """
    if isinstance(g, np.ndarray):
        if g.shape != times.shape:
            raise ValueError(f"integrand array of shape {g.shape} does not align with {len(times)} times")
        return g
    if isinstance(g, (int, float)):
        return np.full(times.shape, float(g))
    if callable(g) and not _is_expr(g):
        return np.array([float(g(t)) for t in times])
    if uses_var(g, "x"):
        raise ValueError("time integrand expressions may depend on t only")
    return np.broadcast_to(np.asarray(eval_expr(g, times, np.nan), dtype=float), times.shape).copy()


def _is_expr(g) -> bool:
    return hasattr(g, "__dataclass_fields__")


def _times_of(grid) -> np.ndarray:
    if isinstance(grid, (WorkingPartition, PathSample)):
        return grid.times
    return np.asarray(grid, dtype=float)


def _locate(times: np.ndarray, t: float) -> int:
    i = int(np.searchsorted(times, t))
    if i >= len(times) or times[i] != t:
        raise KeyError(f"t={t} is not a grid time")
    return i


def extend_value(scale: TimeScale, g, t: float) -> float:
    """Value of the extension of g at any real t >= min(scale): g frozen
    at the last scale point sup{s in scale: s <= t}.

    g may be a PathSample (table lookup), an expression in t, or a
    callable.
    """
    s = scale.sup_le(t)
    if isinstance(g, PathSample):
        return g.value_at(s)
    if callable(g) and not _is_expr(g):
        return float(g(s))
    return float(eval_expr(g, s, np.nan))


def delta_time_integral(g: Integrand, grid, t1: float, t2: float) -> float:
    """Left-endpoint delta integral of g over [t1, t2] on the grid
    (a WorkingPartition, PathSample or time array); endpoints must be grid
    times."""
    times = _times_of(grid)
    i1, i2 = _locate(times, t1), _locate(times, t2)
    gv = values_on(g, times)
    return csum(gv[i1:i2] * np.diff(times[i1 : i2 + 1]))


def delta_stochastic_integral(g: Integrand, path: PathSample, t1: float, t2: float) -> float:
    """Left-endpoint stochastic delta integral sum g(s_{i-1}) dW_i over
    [t1, t2]; the increments enter as exact two-float expansions."""
    times = path.times
    i1, i2 = _locate(times, t1), _locate(times, t2)
    gv = values_on(g, times)[i1:i2]
    hi, lo = exact_increments(path.values[i1 : i2 + 1])
    return csum(np.concatenate([gv * hi, gv * lo]))


def delta_derivative(fs: FunctionSpec, scale: TimeScale, t: float, x: float) -> float:
    """Delta time-derivative of f at (t, x): forward difference quotient
    at right-scattered t, the classical time derivative at right-dense t
    (including the scale maximum)."""
    st = scale.sigma(t)
    if st > t:
        return (float(eval_expr(fs.f, st, x)) - float(eval_expr(fs.f, t, x))) / (st - t)
    return float(eval_expr(fs.f_t, t, x))


def delta_derivative_on_grid(
    fs: FunctionSpec,
    left_times: np.ndarray,
    right_times: np.ndarray,
    gap_mask: np.ndarray,
    x: np.ndarray,
) -> np.ndarray:
    """Vectorized delta derivative at subinterval left endpoints.

    A left endpoint of a gap subinterval is right-scattered with
    sigma = the subinterval's right endpoint; all other left endpoints
    are right-dense.
    """
    out = np.empty(len(left_times))
    dense = ~gap_mask
    if dense.any():
        out[dense] = eval_expr(fs.f_t, left_times[dense], x[dense])
    if gap_mask.any():
        sl, sr, xg = left_times[gap_mask], right_times[gap_mask], x[gap_mask]
        out[gap_mask] = (
            np.asarray(eval_expr(fs.f, sr, xg), dtype=float) - np.asarray(eval_expr(fs.f, sl, xg), dtype=float)
        ) / (sr - sl)
    return out
