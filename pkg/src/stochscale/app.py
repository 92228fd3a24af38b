"""HTTP service exposing every experiment as a POST endpoint.

Request and response bodies are the pydantic models from
``stochscale.models``; the CLI drives the same runners, so a report
obtained over HTTP matches the CLI report byte for byte.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from . import __version__, experiments
from . import models as m
from .expr import ExprError
from .timescale import ScaleError

__all__ = ["create_app", "app"]


def create_app() -> FastAPI:
    app = FastAPI(title="stochscale", version=__version__)

    def guarded(runner, req):
        try:
            return runner(req)
        except (ScaleError, ExprError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc

    @app.get("/v1/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/v1/scale", response_model=m.ScaleReport)
    def scale(req: m.ScaleInspectRequest) -> m.ScaleReport:
        return guarded(experiments.run_scale, req)

    @app.post("/v1/ito-check", response_model=m.ItoCheckReport)
    def ito_check(req: m.ItoCheckRequest) -> m.ItoCheckReport:
        return guarded(experiments.run_ito_check, req)

    @app.post("/v1/general-ito-check", response_model=m.GeneralItoCheckReport)
    def general_ito_check(req: m.GeneralItoCheckRequest) -> m.GeneralItoCheckReport:
        return guarded(experiments.run_general_ito_check, req)

    @app.post("/v1/exp-check", response_model=m.ExpCheckReport)
    def exp_check(req: m.ExpCheckRequest) -> m.ExpCheckReport:
        return guarded(experiments.run_exp_check, req)

    @app.post("/v1/girsanov-check", response_model=m.GirsanovReport)
    def girsanov_check(req: m.GirsanovCheckRequest) -> m.GirsanovReport:
        return guarded(experiments.run_girsanov_check, req)

    @app.post("/v1/converge", response_model=m.ConvergeReport)
    def converge(req: m.ConvergeRequest) -> m.ConvergeReport:
        return guarded(experiments.run_converge, req)

    @app.post("/v1/qscale-demo", response_model=m.QScaleDemoReport)
    def qscale_demo(req: m.QScaleDemoRequest) -> m.QScaleDemoReport:
        return guarded(experiments.run_qscale_demo, req)

    return app


app = create_app()
