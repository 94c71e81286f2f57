"""Rendering for simulator outputs: pure views over CSV and JSON files.

Nothing here computes statistics; estimates, error bars, and fit windows
come verbatim from the report files the simulator wrote.
"""

from hypfig.curves import closure_curve, support_curve
from hypfig.render import FigureSpec, render

__all__ = ["FigureSpec", "render", "support_curve", "closure_curve"]
