"""Result containers for estimators and validators, plus their exports."""

import json
import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class EstimateReport:
    """A fitted scaling exponent with its regression context."""

    name: str
    estimate: float
    stderr: float
    scales: tuple
    replicates: int | None = None
    points_per_scale: int | None = None
    target: float | None = None
    provenance: str = ""
    curve: list = field(default_factory=list)
    params: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "name": self.name,
            "estimate": self.estimate,
            "stderr": self.stderr,
            "scales": list(self.scales),
            "replicates": self.replicates,
            "target": self.target,
            "provenance": self.provenance,
            "points_per_scale": self.points_per_scale,
            "params": self.params,
        }


@dataclass(frozen=True)
class ValidationReport:
    """Two-sided identity check: estimates, errors, and the z-score."""

    name: str
    lhs: float
    lhs_se: float
    rhs: float
    rhs_se: float
    z: float
    lhs_n: int | None = None
    rhs_n: int | None = None
    extras: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "name": self.name,
            "lhs": self.lhs,
            "lhs_se": self.lhs_se,
            "rhs": self.rhs,
            "rhs_se": self.rhs_se,
            "z": self.z,
            "lhs_n": self.lhs_n,
            "rhs_n": self.rhs_n,
            "extras": self.extras,
        }


def z_score(lhs, lhs_se, rhs, rhs_se):
    """Standardized difference; zero when both sides carry no error."""
    se = math.hypot(lhs_se, rhs_se)
    if se == 0.0:
        return 0.0 if lhs == rhs else math.copysign(math.inf, lhs - rhs)
    return (lhs - rhs) / se


def make_validation(name, lhs, lhs_se, rhs, rhs_se, lhs_n=None, rhs_n=None, extras=None):
    return ValidationReport(
        name=name,
        lhs=float(lhs),
        lhs_se=float(lhs_se),
        rhs=float(rhs),
        rhs_se=float(rhs_se),
        z=z_score(lhs, lhs_se, rhs, rhs_se),
        lhs_n=lhs_n,
        rhs_n=rhs_n,
        extras=extras or {},
    )


def write_json(report, path):
    with open(path, "w") as fh:
        json.dump(report.to_dict(), fh, indent=2)
        fh.write("\n")


def write_curve_csv(rows, path):
    """Per-scale regression points as delta,value lines."""
    with open(path, "w") as fh:
        fh.write("delta,value\n")
        for delta, value in rows:
            fh.write(f"{float(delta)!r},{float(value)!r}\n")
