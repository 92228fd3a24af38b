"""Experiment runners: request model in, report model out.

These functions are the single execution path behind both the HTTP
endpoints and the CLI, so a report is bitwise identical no matter which
front end produced it.
"""

from __future__ import annotations

import math

import numpy as np

from . import models as m
from .delta import csum
from .expr import FunctionSpec, parse
from .girsanov import measure_change_test
from .harness import convergence_study
from .ito import SdeSpec, euler_delta_sde, general_ito_sides, ito_sides
from .sampling import RngConfig, sample_path
from .stochexp import exponential_report, regressivity_check
from .timescale import TimeScale

__all__ = [
    "run_scale",
    "run_ito_check",
    "run_general_ito_check",
    "run_exp_check",
    "run_girsanov_check",
    "run_converge",
    "run_qscale_demo",
]


def _window(scale: TimeScale, lo, hi) -> tuple[float, float]:
    t1 = scale.min if lo is None else float(lo)
    t2 = scale.max if hi is None else float(hi)
    if t1 not in scale or t2 not in scale:
        raise ValueError(f"window endpoints ({t1}, {t2}) must be members of the scale")
    if not t1 < t2:
        raise ValueError(f"need t1 < t2, got ({t1}, {t2})")
    return t1, t2


def run_scale(req: m.ScaleInspectRequest) -> m.ScaleReport:
    scale = req.scale.to_timescale()
    t1, t2 = _window(scale, req.t1, req.t2)
    points = []
    for a, b in scale.segments:
        for t in {a, b}:
            if t1 <= t <= t2:
                points.append(
                    m.PointInfo(
                        t=t,
                        sigma=scale.sigma(t),
                        rho=scale.rho(t),
                        mu=scale.mu(t),
                        right_scattered=scale.sigma(t) > t,
                        left_scattered=scale.rho(t) < t,
                    )
                )
    points.sort(key=lambda p: p.t)
    return m.ScaleReport(
        segments=list(scale.segments),
        t_min=scale.min,
        t_max=scale.max,
        window=(t1, t2),
        gaps=[(g.left, g.right) for g in scale.gaps_between(t1, t2)],
        n_segments=len(scale.segments),
        n_isolated_points=sum(1 for a, b in scale.segments if a == b),
        boundary_points=points,
    )


def _residual_rows(scale, fs, t1, t2, n, paths, seed):
    part = scale.partition(t1, t2, n)
    rows = []
    for path_id in range(paths):
        path = sample_path(part, RngConfig(seed, path_id))
        rep = ito_sides(fs, scale, path, t1, t2)
        rows.append(
            m.ResidualRow(
                path_id=path_id,
                n=n,
                lhs=rep.lhs,
                rhs=rep.rhs,
                residual=rep.residual,
                correction_sum=rep.correction_sum,
            )
        )
    return rows


def _residual_summary(rows) -> tuple[float, float, float]:
    res = np.array([r.residual for r in rows])
    corr = np.array([r.correction_sum for r in rows])
    rms = math.sqrt(csum(res * res) / len(res))
    return float(np.max(np.abs(res))), rms, float(np.max(np.abs(corr)))


def run_ito_check(req: m.ItoCheckRequest) -> m.ItoCheckReport:
    scale = req.scale.to_timescale()
    t1, t2 = _window(scale, req.t1, req.t2)
    fs = FunctionSpec.from_source(req.f)
    rows = _residual_rows(scale, fs, t1, t2, req.refine, req.paths, req.seed)
    max_abs, rms, max_corr = _residual_summary(rows)
    return m.ItoCheckReport(
        f=req.f,
        t1=t1,
        t2=t2,
        n=req.refine,
        paths=req.paths,
        seed=req.seed,
        tol=req.tol,
        segments=list(scale.segments),
        max_abs_residual=max_abs,
        rms_residual=rms,
        max_abs_correction=max_corr,
        passed=max_abs <= req.tol,
        rows=rows,
    )


def run_general_ito_check(req: m.GeneralItoCheckRequest) -> m.GeneralItoCheckReport:
    scale = req.scale.to_timescale()
    t1, t2 = _window(scale, req.t1, req.t2)
    fs = FunctionSpec.from_source(req.f)
    sde = SdeSpec.from_sources(req.drift, req.diffusion, req.x0)
    part = scale.partition(t1, t2, req.refine)
    rows: list[m.VariantResidualRow] = []
    per_variant: dict[str, list[float]] = {v: [] for v in ("as_printed", "substituted")}
    for path_id in range(req.paths):
        path = sample_path(part, RngConfig(req.seed, path_id))
        xpath = euler_delta_sde(sde, path, t1, t2)
        for variant in ("as_printed", "substituted"):
            rep = general_ito_sides(fs, sde, scale, xpath, path, t1, t2, variant)
            per_variant[variant].append(rep.residual)
            rows.append(
                m.VariantResidualRow(
                    path_id=path_id,
                    n=req.refine,
                    lhs=rep.lhs,
                    rhs=rep.rhs,
                    residual=rep.residual,
                    correction_sum=rep.correction_sum,
                    variant=variant,
                )
            )

    def summary(variant: str) -> m.VariantSummary:
        arr = np.array(per_variant[variant])
        return m.VariantSummary(
            variant=variant,
            max_abs_residual=float(np.max(np.abs(arr))),
            rms_residual=math.sqrt(csum(arr * arr) / len(arr)),
        )

    s_printed, s_sub = summary("as_printed"), summary("substituted")
    selected = s_printed if req.variant == "as_printed" else s_sub
    return m.GeneralItoCheckReport(
        f=req.f,
        drift=req.drift,
        diffusion=req.diffusion,
        x0=req.x0,
        variant=req.variant,
        t1=t1,
        t2=t2,
        n=req.refine,
        paths=req.paths,
        seed=req.seed,
        tol=req.tol,
        as_printed=s_printed,
        substituted=s_sub,
        passed=selected.max_abs_residual <= req.tol,
        rows=rows,
    )


def run_exp_check(req: m.ExpCheckRequest) -> m.ExpCheckReport:
    scale = req.scale.to_timescale()
    t0, t = _window(scale, req.t0, req.t)
    A = parse(req.A)
    part = scale.partition(t0, t, req.refine)
    discrete = bool(part.gap_mask.all())
    gaps = scale.gaps_between(t0, t)
    rows: list[m.ExpPathRow] = []
    failures = 0
    for path_id in range(req.paths):
        path = sample_path(part, RngConfig(req.seed, path_id))
        failures += sum(1 for c in regressivity_check(A, path, gaps) if not c.ok)
        rep = exponential_report(A, path, t0, t, scale=scale)
        rows.append(
            m.ExpPathRow(
                path_id=path_id,
                U=rep.U,
                D=rep.D,
                V=rep.V,
                closed_form=rep.closed_form,
                recursive=rep.recursive,
                rel_error=rep.rel_error,
            )
        )
    diffs = np.array([abs(r.closed_form - r.recursive) for r in rows])
    rels = np.array([r.rel_error for r in rows])
    rms_rel = math.sqrt(csum(rels * rels) / len(rels))
    passed = failures == 0 and (
        float(np.max(diffs)) <= req.tol_discrete if discrete else rms_rel <= req.tol_rel
    )
    return m.ExpCheckReport(
        A=req.A,
        t0=t0,
        t=t,
        n=req.refine,
        paths=req.paths,
        seed=req.seed,
        discrete_window=discrete,
        max_abs_closed_minus_recursive=float(np.max(diffs)),
        rms_rel_error=rms_rel,
        regressivity_failures=failures,
        passed=passed,
        rows=rows,
    )


def run_girsanov_check(req: m.GirsanovCheckRequest) -> m.GirsanovReport:
    scale = req.scale.to_timescale()
    t0, t_end = _window(scale, req.t0, req.t_end)
    A = parse(req.A)
    rep = measure_change_test(
        A, scale, t0, t_end, n=req.refine, n_paths=req.paths, seed=req.seed, keep_paths=req.dump_paths
    )
    increments = [
        m.IncrementRow(
            s_left=r.s_left,
            s_right=r.s_right,
            dt=r.dt,
            weighted_mean=r.weighted_mean,
            se_mean=r.se_mean,
            mean_ok=r.mean_ok,
            weighted_m2=r.weighted_m2,
            se_m2=r.se_m2,
            m2_ok=r.m2_ok,
        )
        for r in rep.increments
    ]
    dump = None
    if req.dump_paths:
        dump = [m.GirsanovPathRow(path_id=i, weight=g, b_end=b, w_end=w) for i, g, b, w in rep.path_rows]
    return m.GirsanovReport(
        A=req.A,
        n=rep.n,
        N_paths=rep.n_paths,
        seed=rep.seed,
        t0=rep.t0,
        t_end=rep.t_end,
        mean_weight=rep.mean_weight,
        se_mean_weight=rep.se_mean_weight,
        mean_weight_ok=rep.mean_weight_ok,
        weighted_mean=rep.weighted_mean,
        se_weighted_mean=rep.se_weighted_mean,
        weighted_mean_ok=rep.weighted_mean_ok,
        weighted_m2=rep.weighted_m2,
        se_weighted_m2=rep.se_weighted_m2,
        m2_target=rep.m2_target,
        weighted_m2_ok=rep.weighted_m2_ok,
        unweighted_mean=rep.unweighted_mean,
        se_unweighted_mean=rep.se_unweighted_mean,
        negative_control_failed=rep.negative_control_failed,
        unweighted_w_m2=rep.unweighted_w_m2,
        se_unweighted_w_m2=rep.se_unweighted_w_m2,
        novikov_exponent=rep.novikov_exponent,
        novikov_overflow=rep.novikov_overflow,
        increments_mean_ok=sum(1 for r in rep.increments if r.mean_ok),
        increments_m2_ok=sum(1 for r in rep.increments if r.m2_ok),
        increments_total=len(rep.increments),
        passed=rep.passed,
        increments=increments,
        path_dump=dump,
    )


def run_converge(req: m.ConvergeRequest) -> m.ConvergeReport:
    scale = req.scale.to_timescale()
    t1, t2 = _window(scale, req.t1, req.t2)
    f = None
    A = None
    if req.target == "exp_error":
        A = parse(req.A)
    elif req.target in ("ito_residual",):
        f = FunctionSpec.from_source(req.f)
    else:
        f = parse(req.f)
    table = convergence_study(
        req.target, scale, t1, t2, req.levels, req.paths, req.seed, f=f, A=A
    )
    rows = [
        m.ConvergenceRowModel(n=r.level, mean=r.mean, rms=r.rms, variance=r.variance, bound=r.bound, paths=r.paths)
        for r in table.rows
    ]
    if req.target == "time_integral":
        ref = rows[-1].mean
        drift = [abs(r.mean - ref) for r in rows]
        ok = all(a >= b for a, b in zip(drift, drift[1:]))
    elif req.target == "lemma2":
        ok = all(abs(r.mean) <= 3.0 * math.sqrt(r.variance / r.paths) for r in rows)
    else:
        ok = all(a.rms >= b.rms for a, b in zip(rows, rows[1:]))
    rms_noninc = all(a.rms >= b.rms for a, b in zip(rows, rows[1:]))
    return m.ConvergeReport(
        target=req.target,
        f=req.f if req.target != "exp_error" else None,
        A=req.A if req.target == "exp_error" else None,
        t1=t1,
        t2=t2,
        levels=sorted(set(req.levels)),
        paths=req.paths,
        seed=req.seed,
        rms_nonincreasing=rms_noninc,
        passed=ok,
        rows=rows,
    )


def run_qscale_demo(req: m.QScaleDemoRequest) -> m.QScaleDemoReport:
    spec = m.ScaleSpec(
        pieces=[
            m.ScalePiece(
                qscale=m.QScalePiece(q=req.q, kmin=req.kmin, kmax=req.kmax, include_zero=req.include_zero)
            )
        ]
    )
    scale = spec.to_timescale()
    t1, t2 = scale.min, scale.max
    fs = FunctionSpec.from_source(req.f)
    rows = _residual_rows(scale, fs, t1, t2, req.refine, req.paths, req.seed)
    max_abs, rms, max_corr = _residual_summary(rows)
    return m.QScaleDemoReport(
        q=req.q,
        kmin=req.kmin,
        kmax=req.kmax,
        include_zero=req.include_zero,
        f=req.f,
        t1=t1,
        t2=t2,
        n=req.refine,
        paths=req.paths,
        seed=req.seed,
        tol=req.tol,
        max_abs_residual=max_abs,
        rms_residual=rms,
        max_abs_correction=max_corr,
        passed=max_abs <= req.tol,
        rows=rows,
    )
