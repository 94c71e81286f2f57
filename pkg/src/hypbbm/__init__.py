"""Branching Brownian motion on the hyperbolic plane.

Simulates binary branching diffusions in the upper half-plane model,
projects the population onto the boundary circle, and estimates fractal
properties of the resulting limit measures.
"""

from hypbbm.errors import (
    ConditioningError,
    ConfigError,
    DegenerateInputError,
    DomainError,
    InsufficientDataError,
    UnknownParticleError,
)
from hypbbm.engine import SimConfig, Snapshot, run
from hypbbm.measures import BoundaryMeasure, project_to_boundary, typical_measure

__all__ = [
    "BoundaryMeasure",
    "ConditioningError",
    "ConfigError",
    "DegenerateInputError",
    "DomainError",
    "InsufficientDataError",
    "SimConfig",
    "Snapshot",
    "UnknownParticleError",
    "project_to_boundary",
    "run",
    "typical_measure",
]
