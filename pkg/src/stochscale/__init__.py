"""Stochastic calculus on general time scales.

Core objects: TimeScale (segments, jump operators, gaps, working
partitions), FunctionSpec (parsed test functions with symbolic partials),
PathSample (Brownian trajectories with reproducible provenance), the
delta integrals, the jump-corrected Ito identity, the closed-form
stochastic exponential, and the change-of-measure verification harness.
"""

__version__ = "0.1.0"

from .delta import (
    delta_derivative,
    delta_stochastic_integral,
    delta_time_integral,
    extend_value,
)
from .expr import CATALOG, FunctionSpec, diff, eval_expr, parse, to_source
from .girsanov import girsanov_density, measure_change_test, novikov_value, shifted_path
from .harness import convergence_study, lemma2_statistic, summarize
from .ito import ItoReport, SdeSpec, euler_delta_sde, gap_correction, general_ito_sides, ito_sides
from .sampling import PathSample, RefinementPlan, RngConfig, sample_path
from .stochexp import (
    correction_D,
    exponential_V,
    exponential_report,
    gap_product_U,
    regressivity_check,
    stoch_exp_closed,
    stoch_exp_recursive,
)
from .timescale import GapInterval, TimeScale, WorkingPartition, canonicalize

__all__ = [
    "__version__",
    "TimeScale",
    "GapInterval",
    "WorkingPartition",
    "canonicalize",
    "FunctionSpec",
    "CATALOG",
    "parse",
    "diff",
    "eval_expr",
    "to_source",
    "RngConfig",
    "PathSample",
    "RefinementPlan",
    "sample_path",
    "extend_value",
    "delta_time_integral",
    "delta_stochastic_integral",
    "delta_derivative",
    "SdeSpec",
    "ItoReport",
    "gap_correction",
    "ito_sides",
    "euler_delta_sde",
    "general_ito_sides",
    "regressivity_check",
    "correction_D",
    "gap_product_U",
    "exponential_V",
    "stoch_exp_closed",
    "stoch_exp_recursive",
    "exponential_report",
    "shifted_path",
    "girsanov_density",
    "novikov_value",
    "measure_change_test",
    "lemma2_statistic",
    "convergence_study",
    "summarize",
]
