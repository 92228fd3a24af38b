"""Closed-form stochastic exponential and its recursive counterpart.

The solution of dX = A(t) X dW with X(t0) = 1 factors into a product U of
per-gap jump factors and a continuous exponential part V; the gap
correction D removes the gap contributions from the integrals inside V,
so on a purely discrete scale V collapses to exactly 1 and the closed
form reduces to the plain product of jump factors.

A(t) may be a deterministic expression in t, a callable, a scalar, or a
table of values aligned with the path times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .delta import csum, exact_increments, values_on
from .sampling import PathSample
from .timescale import GapInterval, TimeScale

__all__ = [
    "RegressivityError",
    "GapRegressivity",
    "ExponentialReport",
    "regressivity_check",
    "correction_D",
    "gap_product_U",
    "exponential_V",
    "stoch_exp_closed",
    "stoch_exp_recursive",
    "exponential_report",
]

FACTOR_FLOOR = 1e-12


class RegressivityError(ValueError):
    """A jump factor 1 + A dW vanished, so the gap product is singular."""


@dataclass(frozen=True)
class GapRegressivity:
    """Per-gap regressivity record.

    ``factor`` is 1 + A(s-) (W(s+) - W(s-)), the quantity that must stay
    away from zero for the gap product to be invertible.  ``printed_form``
    is the literal quantity (1 + A(s-)) (W(s+) - W(s-)), reported for
    transparency alongside the factor actually checked.
    """

    gap: GapInterval
    factor: float
    printed_form: float
    ok: bool


def _gap_data(A, path: PathSample, gaps: list[GapInterval]):
    """A values, exact dW expansions and lengths at the gaps."""
    idx_left = np.array([path.index_of(g.left) for g in gaps], dtype=int)
    a_all = values_on(A, path.times)
    hi_all, lo_all = exact_increments(path.values)
    a = a_all[idx_left]
    hi = hi_all[idx_left]
    lo = lo_all[idx_left]
    lengths = np.array([g.length for g in gaps])
    dw = path.values[idx_left + 1] - path.values[idx_left]
    return a, hi, lo, dw, lengths


def regressivity_check(A, path: PathSample, gaps: list[GapInterval]) -> list[GapRegressivity]:
    """Check every gap factor; report-style, never raises."""
    if not gaps:
        return []
    a, _, _, dw, _ = _gap_data(A, path, gaps)
    out = []
    for g, ai, dwi in zip(gaps, a, dw):
        factor = 1.0 + float(ai) * float(dwi)
        out.append(
            GapRegressivity(
                gap=g,
                factor=factor,
                printed_form=(1.0 + float(ai)) * float(dwi),
                ok=abs(factor) > FACTOR_FLOOR,
            )
        )
    return out


def correction_D(A, path: PathSample, gaps: list[GapInterval], t0: float, t: float) -> float:
    """Gap correction sum A(s-) dW - A(s-)^2 (s+ - s-) / 2 over the gaps."""
    d1, d2 = _correction_parts(A, path, gaps)
    return d1 - 0.5 * d2


def _correction_parts(A, path: PathSample, gaps: list[GapInterval]) -> tuple[float, float]:
    if not gaps:
        return 0.0, 0.0
    a, hi, lo, _, lengths = _gap_data(A, path, gaps)
    d1 = csum(np.concatenate([a * hi, a * lo]))
    d2 = csum((a * a) * lengths)
    return d1, d2


def gap_product_U(A, path: PathSample, gaps: list[GapInterval], t0: float, t: float) -> float:
    """Product of the jump factors 1 + A(s-) dW over the gaps in (t0, t)."""
    if not gaps:
        return 1.0
    a, _, _, dw, _ = _gap_data(A, path, gaps)
    factors = 1.0 + a * dw
    if np.any(np.abs(factors) <= FACTOR_FLOOR):
        raise RegressivityError("a gap factor 1 + A dW is within 1e-12 of zero")
    return math.prod(factors.tolist())


def exponential_V(A, path: PathSample, t0: float, t: float, scale: TimeScale | None = None) -> float:
    """Continuous part exp(int A dW - int A^2 dt / 2 - D) over [t0, t]."""
    gaps = _gaps_for(path, scale, t0, t)
    return math.exp(_v_exponent(A, path, gaps, t0, t))


def _gaps_for(path, scale, t0, t) -> list[GapInterval]:
    if scale is not None:
        return scale.gaps_between(t0, t)
    # infer gaps from the partition carried by the path
    part = path.partition
    if part is None:
        raise ValueError("path carries no partition; pass the scale explicitly")
    j1 = path.index_of(t0) - path.offset
    j2 = path.index_of(t) - path.offset
    if j1 < 0:
        raise ValueError(f"t0={t0} lies before the scale window of this path")
    mask = part.gap_mask[j1:j2]
    tl = part.times[j1 : j2 + 1]
    return [GapInterval(float(tl[j]), float(tl[j + 1])) for j in range(len(mask)) if mask[j]]


def _v_exponent(A, path: PathSample, gaps: list[GapInterval], t0: float, t: float) -> float:
    i1, i2 = path.index_of(t0), path.index_of(t)
    times = path.times
    a_all = values_on(A, times)
    a_left = a_all[i1:i2]
    hi, lo = exact_increments(path.values[i1 : i2 + 1])
    s1 = csum(np.concatenate([a_left * hi, a_left * lo]))
    s2 = csum((a_left * a_left) * np.diff(times[i1 : i2 + 1]))
    d1, d2 = _correction_parts(A, path, gaps)
    # identical term sequences cancel bitwise on purely discrete windows
    return (s1 - 0.5 * s2) - (d1 - 0.5 * d2)


def stoch_exp_closed(A, path: PathSample, t0: float, t: float, scale: TimeScale | None = None) -> float:
    """Closed-form stochastic exponential U(t, t0) V(t, t0)."""
    gaps = _gaps_for(path, scale, t0, t)
    u = gap_product_U(A, path, gaps, t0, t)
    v = math.exp(_v_exponent(A, path, gaps, t0, t))
    return u * v


def stoch_exp_recursive(A, path: PathSample, t0: float, t: float) -> float:
    """Euler realization of the defining integral equation:
    X(s_i) = X(s_{i-1}) (1 + A(s_{i-1}) dW_i), X(t0) = 1."""
    i1, i2 = path.index_of(t0), path.index_of(t)
    a_left = values_on(A, path.times)[i1:i2]
    dw = np.diff(path.values[i1 : i2 + 1])
    factors = 1.0 + a_left * dw
    return math.prod(factors.tolist())


@dataclass
class ExponentialReport:
    """Closed form vs recursive value for one trajectory."""

    U: float
    D: float
    V: float
    closed_form: float  # U * V exactly as computed
    recursive: float
    rel_error: float


def exponential_report(A, path: PathSample, t0: float, t: float, scale: TimeScale | None = None) -> ExponentialReport:
    gaps = _gaps_for(path, scale, t0, t)
    u = gap_product_U(A, path, gaps, t0, t)
    d = correction_D(A, path, gaps, t0, t)
    v = math.exp(_v_exponent(A, path, gaps, t0, t))
    closed = u * v
    rec = stoch_exp_recursive(A, path, t0, t)
    denom = abs(closed) if closed != 0.0 else 1.0
    return ExponentialReport(
        U=u, D=d, V=v, closed_form=closed, recursive=rec, rel_error=abs(rec - closed) / denom
    )
