"""Readers for the simulator's delimited and JSON outputs.

Parsing is strict on purpose: a malformed row raises ParseError naming
the file and the 1-based line it came from, so a truncated or shuffled
input fails loudly instead of drawing a wrong picture.
"""

import json
import math
import os

import numpy as np


class ParseError(ValueError):
    def __init__(self, path, line, detail):
        self.path = str(path)
        self.line = line
        super().__init__(f"{path} line {line}: {detail}")


def _rows(path, header, columns, blanks=()):
    """Yield parsed float rows, enforcing the header and column count.

    Columns listed in blanks may be empty (the writer's spelling of an
    absent value) and parse as nan.
    """
    with open(path) as fh:
        first = fh.readline().rstrip("\n")
        if first != header:
            raise ParseError(path, 1, f"expected header {header!r}, got {first!r}")
        for line_no, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                raise ParseError(path, line_no, "blank line")
            parts = line.split(",")
            if len(parts) != columns:
                raise ParseError(
                    path, line_no, f"expected {columns} fields, got {len(parts)}"
                )
            try:
                yield line_no, [
                    math.nan if p == "" and i in blanks else float(p)
                    for i, p in enumerate(parts)
                ]
            except ValueError:
                raise ParseError(path, line_no, f"not a number in {line!r}") from None


def read_particles(path):
    """Positions from a particle table: (x, logY) arrays."""
    header = "id,parent,birth_time,x,logY,typical_ok,first_violation"
    xs, logys = [], []
    for _, row in _rows(path, header, 7, blanks=(1, 6)):
        xs.append(row[3])
        logys.append(row[4])
    return np.asarray(xs), np.asarray(logys)


def read_measure(path):
    """Boundary atoms: (angles, weights) arrays, possibly empty."""
    angles, weights = [], []
    for line_no, row in _rows(path, "angle,weight,typical", 3):
        if not 0.0 <= row[0] < 2.0 * np.pi + 1e-9:
            raise ParseError(path, line_no, f"angle {row[0]!r} outside [0, 2pi)")
        angles.append(row[0])
        weights.append(row[1])
    return np.asarray(angles), np.asarray(weights)


def read_curve(path):
    """Regression points: (deltas, values) arrays."""
    deltas, values = [], []
    for line_no, row in _rows(path, "delta,value", 2):
        if row[0] <= 0.0:
            raise ParseError(path, line_no, f"scale {row[0]!r} must be positive")
        deltas.append(row[0])
        values.append(row[1])
    return np.asarray(deltas), np.asarray(values)


_REPORT_KEYS = {"name", "estimate", "stderr", "scales"}


def read_report(path):
    """An estimate report as a dict; key presence checked, values not."""
    with open(path) as fh:
        try:
            report = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(path, exc.lineno, exc.msg) from None
    if not isinstance(report, dict) or not _REPORT_KEYS <= set(report):
        raise ParseError(path, 1, f"report must carry keys {sorted(_REPORT_KEYS)}")
    return report


def require_exists(path):
    if not os.path.exists(path):
        raise FileNotFoundError(f"input {path} does not exist")
    return path
