from .concentration import MIN_REPLICATIONS, CoverageReport, concentration_coverage, confidence_radius
from .counting import CountProfile, Prop2Report, Prop2Violation, check_prop2, count_near_optimal, fit_kappa
from .values import (
    OracleTable,
    brute_force_values,
    certified_loss,
    oracle_horizon,
    simple_regret,
    tail_bound,
)

__all__ = [
    "MIN_REPLICATIONS",
    "CountProfile",
    "CoverageReport",
    "OracleTable",
    "Prop2Report",
    "Prop2Violation",
    "brute_force_values",
    "certified_loss",
    "check_prop2",
    "concentration_coverage",
    "confidence_radius",
    "count_near_optimal",
    "fit_kappa",
    "oracle_horizon",
    "simple_regret",
    "tail_bound",
]
