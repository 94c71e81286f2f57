"""Command-line front end.

One subcommand per operation. Every flag may also be supplied through a
JSON config file (flat keys named like the flags, hyphens as
underscores); explicit flags win over file values, which win over the
built-in defaults. Each run writes its artifacts plus `config.json`
(the fully resolved settings, sufficient to reproduce every output file
byte for byte) and `meta.json` (seed, wall time, cap flag).

Exit statuses: 0 success, 1 runtime or I/O error, 2 strict-validation
breach, 64 usage error.
"""

import argparse
import json
import math
import secrets
import sys
import time
from pathlib import Path

import numpy as np

from hypbbm import rng as rng_mod
from hypbbm.engine import SimConfig, run, write_snapshot_csv
from hypbbm.errors import ConfigError
from hypbbm.measures import (
    project_to_boundary,
    write_cdf_csv,
    write_measure_csv,
)
from hypbbm.analysis.estimators import moment_exponent
from hypbbm.analysis.protocols import (
    DEFAULT_MASS_FLOOR,
    dimension_study,
    holder_study,
)
from hypbbm.analysis.reports import write_curve_csv, write_json
from hypbbm.analysis.validators import (
    validate_exit_bound,
    validate_exit_law,
    validate_growth_rate,
    validate_harmonic_martingale,
    validate_many_to_one,
    validate_many_to_two,
)

_USAGE_EXIT = 64
_STRICT_Z = 3.0
# Keys handled by the harness itself, never merged or recorded.
_META_KEYS = ("subcommand", "config", "out", "threads", "strict")

_REQUIRED = object()

# Per-subcommand defaults; _REQUIRED entries must arrive via flag or file.
_SPECS = {
    "simulate": {
        "beta": _REQUIRED,
        "horizon": _REQUIRED,
        "dt": 0.01,
        "lambda": 0.0,
        "onset": 1.0,
        "seed": rng_mod.DEFAULT_SEED,
        "max_particles": 2_000_000,
        "normalization": "by-count",
    },
    "exitlaw": {
        "t": 5.0,
        "samples": 100_000,
        "dt": 0.01,
        "lambda": 0.0,
        "seed": rng_mod.DEFAULT_SEED,
    },
    "dimension": {
        "beta": _REQUIRED,
        "mode": "support",
        "replicates": 20,
        "pop": 30_000,
        "mass_floor": DEFAULT_MASS_FLOOR,
        "dt": 0.01,
        "lambda": 0.0,
        "onset": 4.0,
        "seed": rng_mod.DEFAULT_SEED,
    },
    "moments": {
        "beta": _REQUIRED,
        "horizon": _REQUIRED,
        "k": 2,
        "replicates": 500,
        "eps_min": 0.02,
        "eps_max": 0.5,
        "n_eps": 8,
        "full": False,
        "dt": 0.01,
        "lambda": 0.0,
        "onset": 1.0,
        "seed": rng_mod.DEFAULT_SEED,
    },
    "holder": {
        "beta": _REQUIRED,
        "replicates": 20,
        "pop": 30_000,
        "dt": 0.01,
        "lambda": 0.0,
        "onset": 4.0,
        "seed": rng_mod.DEFAULT_SEED,
    },
    "validate": {
        "check": _REQUIRED,
        "beta": None,
        "t": None,
        "runs": 10_000,
        "f": "one",
        "a": -1.0,
        "b": 1.0,
        "singles": None,
        "pairs": None,
        "nodes": 64,
        "samples": 100_000,
        "dt": 0.01,
        "lambda": 0.0,
        "onset": 1.0,
        "seed": rng_mod.DEFAULT_SEED,
    },
    "growth": {
        "beta": _REQUIRED,
        "onset": 1.0,
        "generations": 10,
        "runs": 200,
        "dt": 0.01,
        "lambda": 0.0,
        "seed": rng_mod.DEFAULT_SEED,
    },
}


class _Parser(argparse.ArgumentParser):
    """argparse with the conventional usage-error exit status."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(_USAGE_EXIT, f"{self.prog}: error: {message}\n")


def _common_flags(p):
    p.add_argument("--config", help="JSON config file (path); flags override its values")
    p.add_argument("--out", default=".", help="output directory (path)")
    p.add_argument(
        "--threads",
        type=int,
        default=1,
        help="worker threads for replicates (count); output is independent of it",
    )
    p.add_argument(
        "--seed",
        default=argparse.SUPPRESS,
        help="RNG seed (integer), or 'random' to draw and record one",
    )


def _f(p, name, help_text, **kw):
    kw.setdefault("type", float)
    p.add_argument(name, default=argparse.SUPPRESS, help=help_text, **kw)


def _build_parser():
    parser = _Parser(
        prog="hypbbm",
        description="Simulation and estimation for branching diffusion "
        "on the hyperbolic half-plane.",
    )
    subs = parser.add_subparsers(dest="subcommand", metavar="subcommand", required=True)

    p = subs.add_parser("simulate", help="run one branching simulation and export it")
    _f(p, "--beta", "branching rate (splits per unit time)")
    _f(p, "--horizon", "simulation end time (time units)")
    _f(p, "--dt", "integrator step (time units)")
    _f(p, "--lambda", "drift tilt of the vertical motion (dimensionless)")
    _f(p, "--onset", "typicality onset time (time units)")
    _f(p, "--max-particles", "population cap (count)", type=int)
    p.add_argument(
        "--normalization",
        choices=("by-count", "by-mean"),
        default=argparse.SUPPRESS,
        help="atom weighting: by-count (1/n) or by-mean (exp(-beta*duration))",
    )
    _common_flags(p)

    p = subs.add_parser("exitlaw", help="KS check of simulated exits against the exact law")
    _f(p, "--t", "path length before the exact exit draw (time units)")
    _f(p, "--samples", "number of simulated exits (count)", type=int)
    _f(p, "--dt", "integrator step (time units)")
    _f(p, "--lambda", "drift tilt (dimensionless)")
    _common_flags(p)

    p = subs.add_parser("dimension", help="replicated box-counting dimension study")
    _f(p, "--beta", "branching rate (splits per unit time)")
    p.add_argument(
        "--mode",
        choices=("support", "all-points"),
        default=argparse.SUPPRESS,
        help="support: typical atoms with a mass floor; all-points: every atom",
    )
    _f(p, "--replicates", "independent runs to average (count)", type=int)
    _f(p, "--pop", "target population per run (count)", type=int)
    _f(p, "--mass-floor", "support-mode occupancy threshold (fraction of total mass)")
    _f(p, "--dt", "integrator step (time units)")
    _f(p, "--lambda", "drift tilt (dimensionless)")
    _f(p, "--onset", "typicality onset time (time units)")
    _common_flags(p)

    p = subs.add_parser("moments", help="interval-mass moment decay exponent")
    _f(p, "--beta", "branching rate (splits per unit time)")
    _f(p, "--horizon", "simulation end time per replicate (time units)")
    _f(p, "--k", "moment order (integer >= 2)", type=int)
    _f(p, "--replicates", "independent runs to average (count)", type=int)
    _f(p, "--eps-min", "smallest interval width (half-plane units)")
    _f(p, "--eps-max", "largest interval width (half-plane units)")
    _f(p, "--n-eps", "number of widths, log-spaced (count)", type=int)
    p.add_argument(
        "--full",
        action="store_true",
        default=argparse.SUPPRESS,
        help="use the full projection instead of the typical sub-measure",
    )
    _f(p, "--dt", "integrator step (time units)")
    _f(p, "--lambda", "drift tilt (dimensionless)")
    _f(p, "--onset", "typicality onset time (time units)")
    _common_flags(p)

    p = subs.add_parser("holder", help="modulus-of-continuity slope of the boundary mass")
    _f(p, "--beta", "branching rate (splits per unit time)")
    _f(p, "--replicates", "independent runs to average (count)", type=int)
    _f(p, "--pop", "target population per run (count)", type=int)
    _f(p, "--dt", "integrator step (time units)")
    _f(p, "--lambda", "drift tilt (dimensionless)")
    _f(p, "--onset", "typicality onset time (time units)")
    _common_flags(p)

    p = subs.add_parser("validate", help="Monte Carlo check of an exact identity")
    p.add_argument(
        "--check",
        choices=("many-to-one", "many-to-two", "harmonic", "exit-bound"),
        default=argparse.SUPPRESS,
        help="which identity to test",
    )
    _f(p, "--beta", "branching rate (splits per unit time)")
    _f(p, "--t", "evaluation time (time units)")
    _f(p, "--runs", "branching replicates (count)", type=int)
    p.add_argument(
        "--f",
        choices=("one", "interval", "envelope"),
        default=argparse.SUPPRESS,
        help="many-to-one functional: particle count, interval hit, or typicality",
    )
    _f(p, "--a", "interval left endpoint (half-plane units, -inf allowed)")
    _f(p, "--b", "interval right endpoint (half-plane units, inf allowed)")
    _f(p, "--singles", "single-path comparison samples (count)", type=int)
    _f(p, "--pairs", "coupled-pair samples per split node (count)", type=int)
    _f(p, "--nodes", "split-time quadrature nodes (count)", type=int)
    _f(p, "--samples", "exit-bound sample count (count)", type=int)
    _f(p, "--dt", "integrator step (time units)")
    _f(p, "--lambda", "drift tilt (dimensionless)")
    _f(p, "--onset", "typicality onset time (time units)")
    p.add_argument(
        "--strict",
        action="store_true",
        help="exit 2 when the |z|-score exceeds 3",
    )
    _common_flags(p)

    p = subs.add_parser("growth", help="geometric descendant-count statistic along stages")
    _f(p, "--beta", "branching rate (splits per unit time)")
    _f(p, "--onset", "stage length and typicality onset (time units)")
    _f(p, "--generations", "number of stages per run (count)", type=int)
    _f(p, "--runs", "accepted runs to average (count)", type=int)
    _f(p, "--dt", "integrator step (time units)")
    _f(p, "--lambda", "drift tilt (dimensionless)")
    p.add_argument(
        "--strict",
        action="store_true",
        help="exit 2 when the |z|-score exceeds 3",
    )
    _common_flags(p)
    return parser


def _load_config_file(path, sub, spec):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}")
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    out = {}
    for raw_key, value in data.items():
        key = str(raw_key).replace("-", "_")
        if key == "subcommand":
            if value != sub:
                raise ConfigError(
                    f"config file targets subcommand {value!r}, not {sub!r}"
                )
            continue
        if key not in spec:
            raise ConfigError(f"unknown config key {raw_key!r} for {sub}")
        out[key] = value
    return out


def _resolve_seed(value):
    """Returns the integer seed and whether it was freshly drawn."""
    if isinstance(value, str):
        if value == "random":
            return secrets.randbits(31), True
        try:
            return int(value), False
        except ValueError:
            raise ConfigError(f"seed must be an integer or 'random', got {value!r}")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"seed must be an integer or 'random', got {value!r}")
    if isinstance(value, float) and not value.is_integer():
        raise ConfigError(f"seed must be an integer, got {value!r}")
    return int(value), False


def _resolve(parser, ns):
    sub = ns.subcommand
    spec = _SPECS[sub]
    explicit = {
        k.replace("-", "_"): v for k, v in vars(ns).items() if k not in _META_KEYS
    }
    merged = {k: v for k, v in spec.items() if v is not _REQUIRED}
    config_path = getattr(ns, "config", None)
    if config_path:
        merged.update(_load_config_file(config_path, sub, spec))
    merged.update(explicit)

    missing = [k for k in spec if spec[k] is _REQUIRED and k not in merged]
    if missing:
        flags = ", ".join("--" + k.replace("_", "-") for k in missing)
        parser.error(f"the following arguments are required: {flags}")
    if "seed" in merged:
        merged["seed"], _ = _resolve_seed(merged["seed"])
    return {k: merged[k] for k in spec if k in merged}


def _require_positive(resolved, *keys):
    for key in keys:
        value = resolved.get(key)
        if value is None or value <= 0:
            raise ConfigError(f"{key} must be > 0, got {value}")


def _sim_config(r, horizon, max_particles=2_000_000, normalization="by-count"):
    return SimConfig(
        beta=r["beta"],
        horizon=horizon,
        dt=r["dt"],
        lam=r["lambda"],
        onset=r.get("onset", 1.0),
        seed=r["seed"],
        max_particles=max_particles,
        normalization=normalization,
    )


def _cmd_simulate(r, out, threads, strict):
    config = _sim_config(
        r, r["horizon"], int(r["max_particles"]), r["normalization"]
    )
    snap = run(config)
    write_snapshot_csv(snap, out / "particles.csv")
    measure = project_to_boundary(snap)
    write_measure_csv(measure, out / "measure.csv")
    write_cdf_csv(measure, out / "cdf.csv")
    if snap.capped:
        print(
            f"warning: population cap {config.max_particles} reached at "
            f"t={snap.time}; horizon truncated",
            file=sys.stderr,
        )
    return 0, snap.capped


def _cmd_exitlaw(r, out, threads, strict):
    _require_positive(r, "t", "samples", "dt")
    config = SimConfig(
        beta=1.0, horizon=r["t"], dt=r["dt"], lam=r["lambda"], seed=r["seed"]
    )
    report = validate_exit_law(config, r["t"], samples=int(r["samples"]))
    write_json(report, out / "exitlaw.json")
    return 0, False


def _cmd_dimension(r, out, threads, strict):
    report = dimension_study(
        beta=r["beta"],
        mode=r["mode"],
        replicates=int(r["replicates"]),
        target_population=int(r["pop"]),
        lam=r["lambda"],
        dt=r["dt"],
        onset=r["onset"],
        seed=r["seed"],
        mass_floor=r["mass_floor"],
        threads=threads,
    )
    write_json(report, out / "dimension.json")
    write_curve_csv(report.curve, out / "curve.csv")
    return 0, report.params["degenerate_replicates"] > 0


def _cmd_moments(r, out, threads, strict):
    _require_positive(r, "eps_min", "eps_max")
    config = _sim_config(r, r["horizon"])
    eps = np.logspace(
        math.log10(r["eps_min"]), math.log10(r["eps_max"]), int(r["n_eps"])
    )
    onset = None if r["full"] else r["onset"]
    report = moment_exponent(
        config, int(r["k"]), eps, int(r["replicates"]), onset=onset, threads=threads
    )
    write_json(report, out / "moments.json")
    write_curve_csv(report.curve, out / "curve.csv")
    return 0, False


def _cmd_holder(r, out, threads, strict):
    report = holder_study(
        beta=r["beta"],
        replicates=int(r["replicates"]),
        target_population=int(r["pop"]),
        lam=r["lambda"],
        dt=r["dt"],
        onset=r["onset"],
        seed=r["seed"],
        threads=threads,
    )
    write_json(report, out / "holder.json")
    write_curve_csv(report.curve, out / "curve.csv")
    return 0, report.params["degenerate_replicates"] > 0


def _cmd_validate(r, out, threads, strict):
    check = r["check"]
    if check == "exit-bound":
        _require_positive(r, "samples")
        report = validate_exit_bound(
            samples=int(r["samples"]), lam=r["lambda"], seed=r["seed"]
        )
    else:
        for key in ("beta", "t"):
            if r.get(key) is None:
                raise ConfigError(f"--{key} is required for check {check}")
        _require_positive(r, "beta", "t", "runs", "dt")
        config = _sim_config(r, r["t"])
        interval = (r["a"], r["b"])
        if check == "many-to-one":
            singles = None if r["singles"] is None else int(r["singles"])
            report = validate_many_to_one(
                config,
                r["t"],
                f=r["f"],
                runs=int(r["runs"]),
                interval=interval,
                single_samples=singles,
                threads=threads,
            )
        elif check == "many-to-two":
            pairs = None if r["pairs"] is None else int(r["pairs"])
            report = validate_many_to_two(
                config,
                interval,
                r["t"],
                runs=int(r["runs"]),
                pair_samples=pairs,
                nodes=int(r["nodes"]),
                threads=threads,
            )
        else:
            report = validate_harmonic_martingale(
                config, interval, r["t"], runs=int(r["runs"]), threads=threads
            )
    write_json(report, out / "validation.json")
    if strict and abs(report.z) > _STRICT_Z:
        print(f"strict: |z| = {abs(report.z):.3f} > {_STRICT_Z}", file=sys.stderr)
        return 2, False
    return 0, False


def _cmd_growth(r, out, threads, strict):
    _require_positive(r, "onset", "generations", "runs")
    horizon = r["generations"] * r["onset"]
    config = SimConfig(
        beta=r["beta"],
        horizon=horizon,
        dt=r["dt"],
        lam=r["lambda"],
        onset=r["onset"],
        seed=r["seed"],
    )
    report = validate_growth_rate(
        config,
        onset=r["onset"],
        generations=int(r["generations"]),
        runs=int(r["runs"]),
    )
    write_json(report, out / "growth.json")
    if strict and abs(report.z) > _STRICT_Z:
        print(f"strict: |z| = {abs(report.z):.3f} > {_STRICT_Z}", file=sys.stderr)
        return 2, False
    return 0, False


_HANDLERS = {
    "simulate": _cmd_simulate,
    "exitlaw": _cmd_exitlaw,
    "dimension": _cmd_dimension,
    "moments": _cmd_moments,
    "holder": _cmd_holder,
    "validate": _cmd_validate,
    "growth": _cmd_growth,
}


def _write_dict(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def main(argv=None):
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    started = time.perf_counter()
    try:
        try:
            resolved = _resolve(parser, ns)
        except SystemExit as exc:
            return int(exc.code or 0)
        out = Path(ns.out)
        out.mkdir(parents=True, exist_ok=True)
        _write_dict(out / "config.json", {"subcommand": ns.subcommand, **resolved})
        code, cap_hit = _HANDLERS[ns.subcommand](
            resolved, out, max(1, ns.threads), getattr(ns, "strict", False)
        )
        _write_dict(
            out / "meta.json",
            {
                "seed": resolved.get("seed"),
                "wall_time_s": time.perf_counter() - started,
                "cap_hit": bool(cap_hit),
                "threads": ns.threads,
                "argv": list(argv) if argv is not None else sys.argv[1:],
            },
        )
        return code
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _USAGE_EXIT
    except KeyboardInterrupt:
        raise
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
