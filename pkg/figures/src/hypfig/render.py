"""Panel rendering over simulator artifacts.

Three panel types: "cloud" draws the particle positions in the disk
model with the boundary measure as a histogram ring, "dimension-curves"
draws the two closed-form dimension curves with estimator points layered
on top, and "scaling-fit" draws one regression curve with the fitted
slope line from its report. Rendering is deterministic given identical
inputs; estimates and fit windows are taken from the report files as-is.
"""

import math
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.collections import LineCollection

from hypfig.curves import closure_curve, support_curve
from hypfig.readers import (
    read_curve,
    read_measure,
    read_particles,
    read_report,
    require_exists,
)

PANELS = ("cloud", "dimension-curves", "scaling-fit")
_HIST_BINS = 180
_DPI = 150


@dataclass(frozen=True)
class FigureSpec:
    panel: str
    output: str
    particles: str | None = None
    measure: str | None = None
    curve: str | None = None
    reports: tuple = field(default_factory=tuple)


def _disk_positions(x, logy):
    """Half-plane points to the unit disk, as two coordinate arrays."""
    z = x + 1j * np.exp(logy)
    w = (z - 1j) / (z + 1j)
    return w.real, w.imag


def _draw_cloud(spec, ax):
    x, logy = read_particles(require_exists(spec.particles))
    u, v = _disk_positions(x, logy)
    circle = np.linspace(0.0, 2.0 * math.pi, 512)
    ax.plot(np.cos(circle), np.sin(circle), color="0.3", linewidth=1.0)
    ax.scatter(u, v, s=2.0, color="tab:blue", linewidths=0.0)

    if spec.measure is not None:
        angles, weights = read_measure(require_exists(spec.measure))
        if angles.size:
            mass, edges = np.histogram(
                angles, bins=_HIST_BINS, range=(0.0, 2.0 * math.pi), weights=weights
            )
            peak = mass.max()
            if peak > 0.0:
                mids = (edges[:-1] + edges[1:]) / 2.0
                inner = 1.03
                heights = 0.22 * mass / peak
                segs = [
                    (
                        (inner * math.cos(a), inner * math.sin(a)),
                        ((inner + h) * math.cos(a), (inner + h) * math.sin(a)),
                    )
                    for a, h in zip(mids, heights)
                    if h > 0.0
                ]
                ax.add_collection(
                    LineCollection(segs, colors="tab:red", linewidths=1.6)
                )
    ax.set_xlim(-1.35, 1.35)
    ax.set_ylim(-1.35, 1.35)
    ax.set_aspect("equal")
    ax.set_axis_off()


_MARKERS = {"support": "o", "all-points": "s"}


def _draw_dimension_curves(spec, ax):
    grid = np.linspace(1e-4, 1.25, 600)
    ax.plot(grid, support_curve(grid), color="tab:blue", label="measure support")
    ax.plot(
        grid,
        closure_curve(grid),
        color="tab:red",
        linestyle="--",
        label="accumulation closure",
    )
    for saturation in (0.125, 0.5):
        ax.axvline(saturation, color="0.85", linewidth=0.8, zorder=0)
    for path in spec.reports:
        report = read_report(require_exists(path))
        beta = (report.get("params") or {}).get("beta")
        if beta is None:
            raise ValueError(f"{path}: report carries no branching rate")
        mode = next((m for m in _MARKERS if m in report["name"]), None)
        ax.errorbar(
            [float(beta)],
            [float(report["estimate"])],
            yerr=[float(report["stderr"])],
            marker=_MARKERS.get(mode, "^"),
            color="black",
            markerfacecolor="white",
            capsize=3.0,
            linestyle="none",
        )
    ax.set_xlim(0.0, 1.25)
    ax.set_ylim(0.0, 1.1)
    ax.set_xlabel("branching rate")
    ax.set_ylabel("dimension")
    ax.legend(loc="lower right", frameon=False)


def _draw_scaling_fit(spec, ax):
    deltas, values = read_curve(require_exists(spec.curve))
    positive = values > 0.0
    ax.loglog(
        deltas[positive], values[positive], marker="o", linestyle="none",
        markersize=4.0, color="tab:blue",
    )
    if spec.reports:
        report = read_report(require_exists(spec.reports[0]))
        lo, hi = (float(s) for s in report["scales"])
        estimate = float(report["estimate"])
        # Counting curves fall with the scale, mass curves rise with it.
        sign = -1.0 if report["name"].startswith("box-dimension") else 1.0
        inside = positive & (deltas >= lo * (1 - 1e-9)) & (deltas <= hi * (1 + 1e-9))
        if np.any(inside):
            mid = math.sqrt(lo * hi)
            anchor = np.argmin(np.abs(np.log(deltas[inside] / mid)))
            d0 = deltas[inside][anchor]
            v0 = values[inside][anchor]
            span = np.array([lo, hi])
            ax.loglog(
                span,
                v0 * (span / d0) ** (sign * estimate),
                color="tab:red",
                label=f"slope {estimate:.3f} $\\pm$ {float(report['stderr']):.3f}",
            )
            ax.legend(loc="best", frameon=False)
    ax.set_xlabel("scale")
    ax.set_ylabel("value")


def render(spec):
    """Render one panel to spec.output and return the output path."""
    if spec.panel not in PANELS:
        raise ValueError(f"panel must be one of {PANELS}, got {spec.panel!r}")
    if spec.panel == "cloud" and spec.particles is None:
        raise ValueError("cloud panel needs a particles table")
    if spec.panel == "scaling-fit" and spec.curve is None:
        raise ValueError("scaling-fit panel needs a curve table")
    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    try:
        if spec.panel == "cloud":
            _draw_cloud(spec, ax)
        elif spec.panel == "dimension-curves":
            _draw_dimension_curves(spec, ax)
        else:
            _draw_scaling_fit(spec, ax)
        fig.savefig(spec.output, dpi=_DPI)
    finally:
        plt.close(fig)
    return spec.output
