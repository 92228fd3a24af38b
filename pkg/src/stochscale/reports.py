"""Report serialization.

``--format`` selects the container only; the numbers inside are the same
objects either way, rendered with shortest round-trip float repr, so a
rerun with identical inputs reproduces the files byte for byte.
"""

from __future__ import annotations

import io
from pathlib import Path

from pydantic import BaseModel

from . import models as m

__all__ = ["render_csv", "render_json", "write_report"]


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return str(v)


def _table(buf: io.StringIO, header: list[str], rows) -> None:
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")


def _kv_section(buf: io.StringIO, model: BaseModel, fields: list[str]) -> None:
    _table(buf, ["field", "value"], [(name, getattr(model, name)) for name in fields])


def render_json(report: BaseModel) -> str:
    return report.model_dump_json(indent=2) + "\n"


def render_csv(report: BaseModel) -> str:
    buf = io.StringIO()
    if isinstance(report, m.ScaleReport):
        _kv_section(buf, report, ["t_min", "t_max", "n_segments", "n_isolated_points", "passed"])
        buf.write("\n")
        _table(buf, ["segment_start", "segment_end"], report.segments)
        buf.write("\n")
        _table(buf, ["gap_left", "gap_right"], report.gaps)
        buf.write("\n")
        _table(
            buf,
            ["t", "sigma", "rho", "mu", "right_scattered", "left_scattered"],
            [(p.t, p.sigma, p.rho, p.mu, p.right_scattered, p.left_scattered) for p in report.boundary_points],
        )
    elif isinstance(report, (m.ItoCheckReport, m.QScaleDemoReport)):
        _table(
            buf,
            ["path_id", "n", "lhs", "rhs", "residual", "correction_sum"],
            [(r.path_id, r.n, r.lhs, r.rhs, r.residual, r.correction_sum) for r in report.rows],
        )
    elif isinstance(report, m.GeneralItoCheckReport):
        _table(
            buf,
            ["path_id", "n", "variant", "lhs", "rhs", "residual", "correction_sum"],
            [(r.path_id, r.n, r.variant, r.lhs, r.rhs, r.residual, r.correction_sum) for r in report.rows],
        )
    elif isinstance(report, m.ExpCheckReport):
        _table(
            buf,
            ["path_id", "U", "D", "V", "closed_form", "recursive", "rel_error"],
            [(r.path_id, r.U, r.D, r.V, r.closed_form, r.recursive, r.rel_error) for r in report.rows],
        )
    elif isinstance(report, m.GirsanovReport):
        _kv_section(
            buf,
            report,
            [
                "n",
                "N_paths",
                "seed",
                "t0",
                "t_end",
                "mean_weight",
                "se_mean_weight",
                "mean_weight_ok",
                "weighted_mean",
                "se_weighted_mean",
                "weighted_mean_ok",
                "weighted_m2",
                "se_weighted_m2",
                "m2_target",
                "weighted_m2_ok",
                "unweighted_mean",
                "se_unweighted_mean",
                "negative_control_failed",
                "unweighted_w_m2",
                "se_unweighted_w_m2",
                "novikov_exponent",
                "novikov_overflow",
                "increments_mean_ok",
                "increments_m2_ok",
                "increments_total",
                "passed",
            ],
        )
        buf.write("\n")
        _table(
            buf,
            ["s_left", "s_right", "dt", "weighted_mean", "se_mean", "mean_ok", "weighted_m2", "se_m2", "m2_ok"],
            [
                (r.s_left, r.s_right, r.dt, r.weighted_mean, r.se_mean, r.mean_ok, r.weighted_m2, r.se_m2, r.m2_ok)
                for r in report.increments
            ],
        )
    elif isinstance(report, m.ConvergeReport):
        _table(
            buf,
            ["n", "mean", "rms", "variance", "bound", "paths"],
            [(r.n, r.mean, r.rms, r.variance, r.bound, r.paths) for r in report.rows],
        )
    else:
        raise TypeError(f"no CSV renderer for {type(report).__name__}")
    return buf.getvalue()


def write_report(report: BaseModel, out_dir, stem: str, fmt: str) -> Path:
    """Write <out_dir>/<stem>.<fmt> and any side files; returns the main path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{stem}.{fmt}"
    text = render_json(report) if fmt == "json" else render_csv(report)
    path.write_text(text, encoding="utf-8")
    if isinstance(report, m.GirsanovReport) and report.path_dump is not None:
        buf = io.StringIO()
        _table(
            buf,
            ["path_id", "weight", "b_end", "w_end"],
            [(r.path_id, r.weight, r.b_end, r.w_end) for r in report.path_dump],
        )
        (out / f"{stem}-paths.csv").write_text(buf.getvalue(), encoding="utf-8")
    return path
