"""Command-line front end: a thin client over the experiment runners.

Each subcommand builds a request model, executes it (in-process by
default, or against a running service via --server), writes the report
to <out>/<subcommand>-<seed>.{csv,json}, prints a one-line summary and
exits 0 when every pass flag is true, 1 on a test failure and 2 on a
configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import experiments
from . import models as m
from .expr import ExprError
from .reports import write_report
from .timescale import ScaleError

_RUNNERS = {
    "scale": (experiments.run_scale, m.ScaleReport),
    "ito-check": (experiments.run_ito_check, m.ItoCheckReport),
    "general-ito-check": (experiments.run_general_ito_check, m.GeneralItoCheckReport),
    "exp-check": (experiments.run_exp_check, m.ExpCheckReport),
    "girsanov-check": (experiments.run_girsanov_check, m.GirsanovReport),
    "converge": (experiments.run_converge, m.ConvergeReport),
    "qscale-demo": (experiments.run_qscale_demo, m.QScaleDemoReport),
}


class ConfigError(Exception):
    pass


def _load_scale(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            spec = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read scale file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed scale file {path}: {exc}") from exc
    if not isinstance(spec, dict) or "pieces" not in spec:
        raise ConfigError(f'scale file {path} must be an object with a "pieces" list')
    return spec


def _add_output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=".", help="directory for report files (default: current directory)")
    p.add_argument("--format", choices=("csv", "json"), default="json", help="report serialization")
    p.add_argument("--server", default=None, help="base URL of a running service; default runs in-process")
    p.add_argument("--seed", type=int, default=1, help="RNG seed / report name suffix")


def _add_window_flags(p: argparse.ArgumentParser, names=("--t1", "--t2")) -> None:
    for name in names:
        p.add_argument(name, type=float, default=None, help=f"window endpoint {name[2:]} (default: scale extreme)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stochscale",
        description="Verification experiments for stochastic calculus on time scales.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scale", help="inspect a scale: segments, gaps, jump operators at boundaries")
    p.add_argument("--scale", required=True, help="scale-spec JSON file")
    _add_window_flags(p)
    _add_output_flags(p)

    p = sub.add_parser("ito-check", help="residuals of the jump-corrected identity for f(t, W)")
    p.add_argument("--scale", required=True)
    p.add_argument("--f", default="x^2", help="test function of t and x")
    p.add_argument("--refine", type=int, default=8, help="partition level n (dense mesh 2^-n)")
    p.add_argument("--paths", type=int, default=200)
    p.add_argument("--tol", type=float, default=1e-9, help="max |residual| for the pass flag")
    _add_window_flags(p)
    _add_output_flags(p)

    p = sub.add_parser("general-ito-check", help="residuals of the general identity for an SDE solution")
    p.add_argument("--scale", required=True)
    p.add_argument("--f", default="x^2")
    p.add_argument("--b", default="0", help="drift coefficient b(t, x)")
    p.add_argument("--s", default="1", help="diffusion coefficient s(t, x)")
    p.add_argument("--x0", type=float, default=0.0)
    p.add_argument("--variant", choices=("as_printed", "substituted"), default="as_printed",
                   help="variant whose residual gates the pass flag (both are always reported)")
    p.add_argument("--refine", type=int, default=8)
    p.add_argument("--paths", type=int, default=200)
    p.add_argument("--tol", type=float, default=1e-9)
    _add_window_flags(p)
    _add_output_flags(p)

    p = sub.add_parser("exp-check", help="closed-form stochastic exponential vs its recursion")
    p.add_argument("--scale", required=True)
    p.add_argument("--A", default="1", help="integrand A(t)")
    p.add_argument("--refine", type=int, default=14)
    p.add_argument("--paths", type=int, default=500)
    p.add_argument("--tol-discrete", type=float, default=1e-12, dest="tol_discrete")
    p.add_argument("--tol-rel", type=float, default=0.02, dest="tol_rel")
    _add_window_flags(p, ("--t0", "--t"))
    _add_output_flags(p)

    p = sub.add_parser("girsanov-check", help="weighted-moment verification of the change of measure")
    p.add_argument("--scale", required=True)
    p.add_argument("--A", default="1")
    p.add_argument("--refine", type=int, default=8)
    p.add_argument("--paths", type=int, default=10000)
    p.add_argument("--dump-paths", action="store_true", dest="dump_paths",
                   help="also write per-path weights to <name>-paths.csv")
    _add_window_flags(p, ("--t0", "--t-end"))
    _add_output_flags(p)

    p = sub.add_parser("converge", help="per-level convergence table for a chosen statistic")
    p.add_argument("--target", required=True,
                   choices=("time_integral", "stoch_integral", "lemma2", "ito_residual", "exp_error"))
    p.add_argument("--scale", required=True)
    p.add_argument("--f", default="x^2")
    p.add_argument("--A", default="1")
    p.add_argument("--levels", type=int, nargs="+", default=[6, 8, 10, 12, 14])
    p.add_argument("--paths", type=int, default=10000)
    _add_window_flags(p)
    _add_output_flags(p)

    p = sub.add_parser("qscale-demo", help="telescoping identity on a geometric scale")
    p.add_argument("--q", type=float, default=2.0)
    p.add_argument("--kmin", type=int, default=-20,
                   help="tail truncation exponent; omitted gap lengths sum below q^(kmin+1)")
    p.add_argument("--kmax", type=int, default=3)
    p.add_argument("--no-zero", action="store_false", dest="include_zero", help="exclude the point 0")
    p.add_argument("--f", default="x^2")
    p.add_argument("--refine", type=int, default=8)
    p.add_argument("--paths", type=int, default=1000)
    p.add_argument("--tol", type=float, default=1e-9)
    _add_output_flags(p)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


def _build_request(args: argparse.Namespace):
    cmd = args.command
    if cmd == "scale":
        return m.ScaleInspectRequest(scale=_load_scale(args.scale), t1=args.t1, t2=args.t2, seed=args.seed)
    if cmd == "ito-check":
        return m.ItoCheckRequest(
            scale=_load_scale(args.scale), f=args.f, t1=args.t1, t2=args.t2,
            refine=args.refine, paths=args.paths, seed=args.seed, tol=args.tol,
        )
    if cmd == "general-ito-check":
        return m.GeneralItoCheckRequest(
            scale=_load_scale(args.scale), f=args.f, drift=args.b, diffusion=args.s, x0=args.x0,
            variant=args.variant, t1=args.t1, t2=args.t2, refine=args.refine, paths=args.paths,
            seed=args.seed, tol=args.tol,
        )
    if cmd == "exp-check":
        return m.ExpCheckRequest(
            scale=_load_scale(args.scale), A=args.A, t0=args.t0, t=args.t,
            refine=args.refine, paths=args.paths, seed=args.seed,
            tol_discrete=args.tol_discrete, tol_rel=args.tol_rel,
        )
    if cmd == "girsanov-check":
        return m.GirsanovCheckRequest(
            scale=_load_scale(args.scale), A=args.A, t0=args.t0, t_end=args.t_end,
            refine=args.refine, paths=args.paths, seed=args.seed, dump_paths=args.dump_paths,
        )
    if cmd == "converge":
        return m.ConvergeRequest(
            target=args.target, scale=_load_scale(args.scale), f=args.f, A=args.A,
            t1=args.t1, t2=args.t2, levels=args.levels, paths=args.paths, seed=args.seed,
        )
    return m.QScaleDemoRequest(
        q=args.q, kmin=args.kmin, kmax=args.kmax, include_zero=args.include_zero,
        f=args.f, refine=args.refine, paths=args.paths, seed=args.seed, tol=args.tol,
    )


def _run_remote(server: str, command: str, request) -> dict:
    import httpx

    url = server.rstrip("/") + "/v1/" + command
    resp = httpx.post(url, json=request.model_dump(), timeout=600.0)
    if resp.status_code != 200:
        raise ConfigError(f"server rejected the request ({resp.status_code}): {resp.text}")
    return resp.json()


def _summary_line(command: str, report) -> str:
    if isinstance(report, m.ScaleReport):
        return (
            f"{command}: {report.n_segments} segments, {len(report.gaps)} gaps in "
            f"[{report.window[0]}, {report.window[1]}]"
        )
    if isinstance(report, (m.ItoCheckReport, m.QScaleDemoReport)):
        return (
            f"{command}: max|residual|={report.max_abs_residual:.3e} rms={report.rms_residual:.3e} "
            f"({report.paths} paths) -> {'PASS' if report.passed else 'FAIL'}"
        )
    if isinstance(report, m.GeneralItoCheckReport):
        return (
            f"{command}: as_printed max|res|={report.as_printed.max_abs_residual:.3e}, "
            f"substituted max|res|={report.substituted.max_abs_residual:.3e} "
            f"(gate: {report.variant}) -> {'PASS' if report.passed else 'FAIL'}"
        )
    if isinstance(report, m.ExpCheckReport):
        return (
            f"{command}: max|closed-recursive|={report.max_abs_closed_minus_recursive:.3e} "
            f"rms_rel={report.rms_rel_error:.3e} -> {'PASS' if report.passed else 'FAIL'}"
        )
    if isinstance(report, m.GirsanovReport):
        return (
            f"{command}: mean_weight={report.mean_weight:.4f} weighted_mean={report.weighted_mean:.4f} "
            f"weighted_m2={report.weighted_m2:.4f}/{report.m2_target} -> "
            f"{'PASS' if report.passed else 'FAIL'}"
        )
    if isinstance(report, m.ConvergeReport):
        rms = ", ".join(f"{r.n}:{r.rms:.3e}" for r in report.rows)
        return f"{command}[{report.target}]: rms per level {rms} -> {'PASS' if report.passed else 'FAIL'}"
    return f"{command}: done"


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command == "serve":
        import uvicorn

        from .app import create_app

        uvicorn.run(create_app(), host=args.host, port=args.port)
        return 0

    runner, report_cls = _RUNNERS[args.command]
    try:
        request = _build_request(args)
        if args.server:
            payload = _run_remote(args.server, args.command, request)
            report = report_cls.model_validate(payload)
        else:
            report = runner(request)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ScaleError, ExprError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    path = write_report(report, args.out, f"{args.command}-{args.seed}", args.format)
    print(_summary_line(args.command, report))
    print(f"report: {path}")
    passed = getattr(report, "passed", True)
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(main())
