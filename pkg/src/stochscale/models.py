"""Pydantic request/response models: the wire format shared by the HTTP
service and the CLI.

The scale-spec schema mirrors the structured scale file:
{"pieces": [{"interval": [a, b]}, {"point": c}, {"qscale": {...}}]}.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator

from .timescale import TimeScale, canonicalize

StudyTarget = Literal["time_integral", "stoch_integral", "lemma2", "ito_residual", "exp_error"]
Variant = Literal["as_printed", "substituted"]


class QScalePiece(BaseModel):
    q: float
    kmin: int
    kmax: int
    include_zero: bool = True


class ScalePiece(BaseModel):
    interval: Optional[tuple[float, float]] = None
    point: Optional[float] = None
    qscale: Optional[QScalePiece] = None

    @model_validator(mode="after")
    def _exactly_one(self):
        given = [k for k in ("interval", "point", "qscale") if getattr(self, k) is not None]
        if len(given) != 1:
            raise ValueError(f"scale piece needs exactly one of interval/point/qscale, got {given or 'none'}")
        return self


class ScaleSpec(BaseModel):
    pieces: list[ScalePiece] = Field(min_length=1)

    def to_timescale(self) -> TimeScale:
        return canonicalize(p.model_dump(exclude_none=True) for p in self.pieces)


# -- requests ----------------------------------------------------------------


class ScaleInspectRequest(BaseModel):
    scale: ScaleSpec
    t1: Optional[float] = None
    t2: Optional[float] = None
    seed: int = 1


class ItoCheckRequest(BaseModel):
    scale: ScaleSpec
    f: str = "x^2"
    t1: Optional[float] = None
    t2: Optional[float] = None
    refine: int = Field(default=8, ge=0)
    paths: int = Field(default=200, ge=1)
    seed: int = 1
    tol: float = 1e-9


class GeneralItoCheckRequest(BaseModel):
    scale: ScaleSpec
    f: str = "x^2"
    drift: str = "0"
    diffusion: str = "1"
    x0: float = 0.0
    variant: Variant = "as_printed"
    t1: Optional[float] = None
    t2: Optional[float] = None
    refine: int = Field(default=8, ge=0)
    paths: int = Field(default=200, ge=1)
    seed: int = 1
    tol: float = 1e-9


class ExpCheckRequest(BaseModel):
    scale: ScaleSpec
    A: str = "1"
    t0: Optional[float] = None
    t: Optional[float] = None
    refine: int = Field(default=14, ge=0)
    paths: int = Field(default=500, ge=1)
    seed: int = 1
    tol_discrete: float = 1e-12
    tol_rel: float = 0.02


class GirsanovCheckRequest(BaseModel):
    scale: ScaleSpec
    A: str = "1"
    t0: Optional[float] = None
    t_end: Optional[float] = None
    refine: int = Field(default=8, ge=0)
    paths: int = Field(default=10000, ge=2)
    seed: int = 1
    dump_paths: bool = False


class ConvergeRequest(BaseModel):
    target: StudyTarget
    scale: ScaleSpec
    f: str = "x^2"
    A: str = "1"
    t1: Optional[float] = None
    t2: Optional[float] = None
    levels: list[int] = Field(default=[6, 8, 10, 12, 14], min_length=1)
    paths: int = Field(default=10000, ge=1)
    seed: int = 1


class QScaleDemoRequest(BaseModel):
    q: float = 2.0
    kmin: int = -20
    kmax: int = 3
    include_zero: bool = True
    f: str = "x^2"
    refine: int = Field(default=8, ge=0)
    paths: int = Field(default=1000, ge=1)
    seed: int = 7
    tol: float = 1e-9


# -- reports ------------------------------------------------------------------


class PointInfo(BaseModel):
    t: float
    sigma: float
    rho: float
    mu: float
    right_scattered: bool
    left_scattered: bool


class ScaleReport(BaseModel):
    segments: list[tuple[float, float]]
    t_min: float
    t_max: float
    window: tuple[float, float]
    gaps: list[tuple[float, float]]
    n_segments: int
    n_isolated_points: int
    boundary_points: list[PointInfo]
    passed: bool = True


class ResidualRow(BaseModel):
    path_id: int
    n: int
    lhs: float
    rhs: float
    residual: float
    correction_sum: float


class ItoCheckReport(BaseModel):
    f: str
    t1: float
    t2: float
    n: int
    paths: int
    seed: int
    tol: float
    segments: list[tuple[float, float]]
    max_abs_residual: float
    rms_residual: float
    max_abs_correction: float
    passed: bool
    rows: list[ResidualRow]


class VariantResidualRow(ResidualRow):
    variant: Variant


class VariantSummary(BaseModel):
    variant: Variant
    max_abs_residual: float
    rms_residual: float


class GeneralItoCheckReport(BaseModel):
    f: str
    drift: str
    diffusion: str
    x0: float
    variant: Variant
    t1: float
    t2: float
    n: int
    paths: int
    seed: int
    tol: float
    as_printed: VariantSummary
    substituted: VariantSummary
    passed: bool
    rows: list[VariantResidualRow]


class ExpPathRow(BaseModel):
    path_id: int
    U: float
    D: float
    V: float
    closed_form: float
    recursive: float
    rel_error: float


class ExpCheckReport(BaseModel):
    A: str
    t0: float
    t: float
    n: int
    paths: int
    seed: int
    discrete_window: bool
    truncation_kmin: Optional[int] = None
    max_abs_closed_minus_recursive: float
    rms_rel_error: float
    regressivity_failures: int
    passed: bool
    rows: list[ExpPathRow]


class IncrementRow(BaseModel):
    s_left: float
    s_right: float
    dt: float
    weighted_mean: float
    se_mean: float
    mean_ok: bool
    weighted_m2: float
    se_m2: float
    m2_ok: bool


class GirsanovPathRow(BaseModel):
    path_id: int
    weight: float
    b_end: float
    w_end: float


class GirsanovReport(BaseModel):
    A: str
    n: int
    N_paths: int
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
    increments_mean_ok: int
    increments_m2_ok: int
    increments_total: int
    passed: bool
    increments: list[IncrementRow]
    path_dump: Optional[list[GirsanovPathRow]] = None


class ConvergenceRowModel(BaseModel):
    n: int
    mean: float
    rms: float
    variance: float
    bound: Optional[float] = None
    paths: int


class ConvergeReport(BaseModel):
    target: StudyTarget
    f: Optional[str] = None
    A: Optional[str] = None
    t1: float
    t2: float
    levels: list[int]
    paths: int
    seed: int
    rms_nonincreasing: bool
    passed: bool
    rows: list[ConvergenceRowModel]


class QScaleDemoReport(BaseModel):
    q: float
    kmin: int
    kmax: int
    include_zero: bool
    f: str
    t1: float
    t2: float
    n: int
    paths: int
    seed: int
    tol: float
    max_abs_residual: float
    rms_residual: float
    max_abs_correction: float
    passed: bool
    rows: list[ResidualRow]
