"""Script entry: route input files by name into a FigureSpec and render.

Inputs are recognized by their basenames: particles.csv and measure.csv
feed the cloud panel, *.json files are reports, and any other .csv is a
regression curve. One image per invocation.
"""

import argparse
import sys

from hypfig.readers import ParseError
from hypfig.render import PANELS, FigureSpec, render


def _classify(paths):
    particles = measure = curve = None
    reports = []
    for path in paths:
        name = path.rsplit("/", 1)[-1]
        if name.endswith(".json"):
            reports.append(path)
        elif name == "particles.csv":
            particles = path
        elif name == "measure.csv":
            measure = path
        elif name.endswith(".csv"):
            curve = path
        else:
            raise ValueError(f"cannot classify input {path}")
    return particles, measure, curve, tuple(reports)


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="hypfig", description="Render one figure panel from simulator outputs."
    )
    parser.add_argument("--panel", required=True, choices=PANELS)
    parser.add_argument(
        "--input",
        action="append",
        required=True,
        metavar="PATH",
        help="input file; repeat the flag for several (routed by basename)",
    )
    parser.add_argument("--output", required=True, metavar="IMAGE")
    args = parser.parse_args(argv)
    try:
        particles, measure, curve, reports = _classify(args.input)
        render(
            FigureSpec(
                panel=args.panel,
                output=args.output,
                particles=particles,
                measure=measure,
                curve=curve,
                reports=reports,
            )
        )
    except (ParseError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
