"""Both sides of the jump-corrected Ito identity and the delta-SDE solver.

The right-hand side of the identity is assembled from three left-endpoint
delta integrals plus one bracket per gap; on a purely discrete scale the
assembly telescopes, so the residual is pure rounding.  The general form
for an SDE solution ships in two variants: ``as_printed`` evaluates the
published right-hand side literally (drift multiplies the delta time
derivative and the gap brackets read the driving noise W), while
``substituted`` applies the plain-identity structure to the solution
process X itself and is the self-consistent mode.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .delta import csum, delta_derivative_on_grid, exact_increments
from .expr import FunctionSpec, eval_expr, parse
from .sampling import PathSample
from .timescale import GapInterval, TimeScale

__all__ = ["SdeSpec", "GapTerm", "ItoReport", "gap_correction", "ito_sides", "euler_delta_sde", "general_ito_sides"]

VARIANTS = ("as_printed", "substituted")


@dataclass(frozen=True)
class SdeSpec:
    """Coefficients of dX = b(t, X) dt + s(t, X) dW with X(t1) = x0.

    The diffusion coefficient is called ``s`` to keep it apart from the
    forward-jump operator.
    """

    drift: object
    diffusion: object
    x0: float = 0.0

    @classmethod
    def from_sources(cls, drift: str, diffusion: str, x0: float = 0.0) -> "SdeSpec":
        return cls(drift=parse(drift), diffusion=parse(diffusion), x0=float(x0))


@dataclass(frozen=True)
class GapTerm:
    gap: GapInterval
    value: float


@dataclass
class ItoReport:
    """Both sides of the identity for one trajectory and window."""

    lhs: float
    rhs: float
    residual: float  # lhs - rhs exactly as computed
    correction_sum: float
    gap_terms: list[GapTerm] = field(default_factory=list)
    time_term: float = 0.0
    stochastic_term: float = 0.0
    second_order_term: float = 0.0


def gap_correction(fs: FunctionSpec, gap: GapInterval, path: PathSample) -> float:
    """Correction bracket contributed by one gap:
    f(s+, W+) - f(s+, W-) - f_x(s-, W-) (W+ - W-) - f_xx(s-, W-) (s+ - s-) / 2.
    """
    wm = path.value_at(gap.left)
    wp = path.value_at(gap.right)
    dw = wp - wm
    return (
        float(eval_expr(fs.f, gap.right, wp))
        - float(eval_expr(fs.f, gap.right, wm))
        - float(eval_expr(fs.f_x, gap.left, wm)) * dw
        - 0.5 * float(eval_expr(fs.f_xx, gap.left, wm)) * gap.length
    )


def _window(path: PathSample, t1: float, t2: float):
    i1, i2 = path.index_of(t1), path.index_of(t2)
    if i1 >= i2:
        raise ValueError(f"need t1 < t2 on the path, got {t1}, {t2}")
    s = path.times[i1 : i2 + 1]
    w = path.values[i1 : i2 + 1]
    return s, w


def _gap_mask(scale: TimeScale, s_left: np.ndarray, s_right: np.ndarray, t1: float, t2: float):
    gaps = scale.gaps_between(t1, t2)
    lefts = np.array([g.left for g in gaps])
    mask = np.isin(s_left, lefts)
    if len(gaps) != int(mask.sum()) or not np.array_equal(s_right[mask], np.array([g.right for g in gaps])):
        raise AssertionError("partition subintervals do not cover the window gaps exactly")
    return gaps, mask


def _gap_brackets(f_right_at_plus, f_right_at_minus, slope, dx, curvature, length):
    return f_right_at_plus - f_right_at_minus - slope * dx - 0.5 * curvature * length


def ito_sides(fs: FunctionSpec, scale: TimeScale, path: PathSample, t1: float, t2: float) -> ItoReport:
    """Evaluate f(t2, W_t2) - f(t1, W_t1) against the sum of the three
    delta integrals and the gap corrections, all on the path's grid."""
    s, w = _window(path, t1, t2)
    s_left, s_right = s[:-1], s[1:]
    x_left = w[:-1]
    dt = np.diff(s)
    gaps, mask = _gap_mask(scale, s_left, s_right, t1, t2)

    f_delta = delta_derivative_on_grid(fs, s_left, s_right, mask, x_left)
    time_term = csum(f_delta * dt)
    g_x = np.broadcast_to(np.asarray(eval_expr(fs.f_x, s_left, x_left), dtype=float), s_left.shape)
    hi, lo = exact_increments(w)
    stochastic_term = csum(np.concatenate([g_x * hi, g_x * lo]))
    g_xx = np.broadcast_to(np.asarray(eval_expr(fs.f_xx, s_left, x_left), dtype=float), s_left.shape)
    second_order_term = csum(g_xx * dt)

    sl, sr = s_left[mask], s_right[mask]
    wm, wp = w[:-1][mask], w[1:][mask]
    dw = wp - wm
    brackets = _gap_brackets(
        np.asarray(eval_expr(fs.f, sr, wp), dtype=float),
        np.asarray(eval_expr(fs.f, sr, wm), dtype=float),
        np.asarray(eval_expr(fs.f_x, sl, wm), dtype=float),
        dw,
        np.asarray(eval_expr(fs.f_xx, sl, wm), dtype=float),
        sr - sl,
    )
    correction_sum = csum(brackets)

    lhs = float(eval_expr(fs.f, s[-1], w[-1])) - float(eval_expr(fs.f, s[0], w[0]))
    rhs = time_term + stochastic_term + 0.5 * second_order_term + correction_sum
    return ItoReport(
        lhs=lhs,
        rhs=rhs,
        residual=lhs - rhs,
        correction_sum=correction_sum,
        gap_terms=[GapTerm(g, float(v)) for g, v in zip(gaps, brackets)],
        time_term=time_term,
        stochastic_term=stochastic_term,
        second_order_term=second_order_term,
    )


def euler_delta_sde(sde: SdeSpec, path: PathSample, t1: float, t2: float) -> np.ndarray:
    """Euler solution of the delta-SDE along the path, aligned with the
    path times in [t1, t2].  Coefficients are frozen at subinterval left
    endpoints, which across a gap is exactly the extension semantics and
    on dense stretches is the usual Euler approximant."""
    s, w = _window(path, t1, t2)
    dt = np.diff(s)
    dw = np.diff(w)
    x = np.empty(len(s))
    x[0] = sde.x0
    for j in range(len(dt)):
        b = float(eval_expr(sde.drift, s[j], x[j]))
        g = float(eval_expr(sde.diffusion, s[j], x[j]))
        x[j + 1] = x[j] + b * dt[j] + g * dw[j]
    return x


def general_ito_sides(
    fs: FunctionSpec,
    sde: SdeSpec,
    scale: TimeScale,
    xpath: np.ndarray,
    path: PathSample,
    t1: float,
    t2: float,
    variant: str = "as_printed",
) -> ItoReport:
    """Both sides of the general identity for the SDE solution X.

    ``as_printed``: the literal published right-hand side (first integrand
    b * f_delta, gap brackets written with W).  ``substituted``: the
    plain-identity structure applied to X (dense integrand
    f_delta + b f_x + s^2 f_xx / 2, gap brackets written with X).
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    s, w = _window(path, t1, t2)
    if len(xpath) != len(s):
        raise ValueError("xpath does not align with the path window")
    s_left, s_right = s[:-1], s[1:]
    dt = np.diff(s)
    x_left = xpath[:-1]
    gaps, mask = _gap_mask(scale, s_left, s_right, t1, t2)

    def ev(e, tv, xv):
        return np.broadcast_to(np.asarray(eval_expr(e, tv, xv), dtype=float), np.shape(tv))

    b_left = ev(sde.drift, s_left, x_left)
    g_left = ev(sde.diffusion, s_left, x_left)
    fx_left = ev(fs.f_x, s_left, x_left)
    fxx_left = ev(fs.f_xx, s_left, x_left)
    f_delta = delta_derivative_on_grid(fs, s_left, s_right, mask, x_left)
    hi, lo = exact_increments(w)

    if variant == "as_printed":
        time_term = csum(b_left * f_delta * dt)
        g_stoch = g_left * fx_left
        second = csum(g_left * g_left * fxx_left * dt)
        sl, sr = s_left[mask], s_right[mask]
        wm, wp = w[:-1][mask], w[1:][mask]
        g_gap = ev(sde.diffusion, sl, wm)
        brackets = _gap_brackets(
            ev(fs.f, sr, wp),
            ev(fs.f, sr, wm),
            g_gap * ev(fs.f_x, sl, wm),
            wp - wm,
            g_gap * g_gap * ev(fs.f_xx, sl, wm),
            sr - sl,
        )
    else:
        time_term = csum((f_delta + b_left * fx_left + 0.5 * g_left * g_left * fxx_left) * dt)
        g_stoch = g_left * fx_left
        second = 0.0
        sl, sr = s_left[mask], s_right[mask]
        xm, xp = xpath[:-1][mask], xpath[1:][mask]
        g_gap = ev(sde.diffusion, sl, xm)
        brackets = _gap_brackets(
            ev(fs.f, sr, xp),
            ev(fs.f, sr, xm),
            ev(fs.f_x, sl, xm),
            xp - xm,
            g_gap * g_gap * ev(fs.f_xx, sl, xm),
            sr - sl,
        )
    stochastic_term = csum(np.concatenate([g_stoch * hi, g_stoch * lo]))
    correction_sum = csum(brackets)
    lhs = float(eval_expr(fs.f, s[-1], xpath[-1])) - float(eval_expr(fs.f, s[0], xpath[0]))
    rhs = time_term + stochastic_term + 0.5 * second + correction_sum
    return ItoReport(
        lhs=lhs,
        rhs=rhs,
        residual=lhs - rhs,
        correction_sum=correction_sum,
        gap_terms=[GapTerm(g, float(v)) for g, v in zip(gaps, brackets)],
        time_term=time_term,
        stochastic_term=stochastic_term,
        second_order_term=second,
    )
