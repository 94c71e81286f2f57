"""Estimators and identity validators over simulated boundary measures."""

from hypbbm.analysis.estimators import (
    box_dimension,
    correlation_dimension,
    holder_exponent,
    limit_set_dimension,
    moment_exponent,
    support_dimension,
)
from hypbbm.analysis.protocols import dimension_study, holder_study
from hypbbm.analysis.reports import EstimateReport, ValidationReport
from hypbbm.analysis.validators import (
    validate_exit_bound,
    validate_exit_law,
    validate_growth_rate,
    validate_harmonic_martingale,
    validate_many_to_one,
    validate_many_to_two,
)

__all__ = [
    "EstimateReport",
    "ValidationReport",
    "box_dimension",
    "correlation_dimension",
    "dimension_study",
    "holder_exponent",
    "holder_study",
    "limit_set_dimension",
    "moment_exponent",
    "support_dimension",
    "validate_exit_bound",
    "validate_exit_law",
    "validate_growth_rate",
    "validate_harmonic_martingale",
    "validate_many_to_one",
    "validate_many_to_two",
]
