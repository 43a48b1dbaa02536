"""Command-line entry point: configure, run, and emit bit-stable results.

One invocation runs a list of world configurations (one per sigma value)
on a shared T grid and writes results.csv plus a results.json metadata
sidecar into the output directory. Numbers are serialized with 17
significant digits so a rerun from the sidecar reproduces the CSV
byte-identically. Exit codes: 0 success, 1 unsatisfied bounds under
--check-bounds, 2 configuration validation failure, 3 runtime failure.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import json
import os
import sys
import time
from typing import Sequence

from . import __version__
from .beliefs import MODELS, REVEALED_QUALITY, REVEALED_VALUE, UnsupportedModelError
from .bounds import BoundReport, curve_bound_reports
from .reservation import NonConvergenceError
from .search import StepCapExceeded
from .society import (
    UTILITY_CONVENTIONS,
    UTILITY_OUTSIDE,
    ConfigError,
    CurvePoint,
    WorldConfig,
    default_t_grid,
    estimate_curve,
)

RESULTS_CSV = "results.csv"
SIDECAR_JSON = "results.json"
BOUNDS_CSV = "bounds.csv"

CSV_COLUMNS = [
    "sigma", "T", "mean_avg_utility", "se_avg_utility",
    "alt_convention_utility", "mean_max_quality", "se_max_quality",
    "mean_items_explored", "runs", "seed", "model", "cost",
    "diamond_p", "diamond_D",
]

BOUNDS_COLUMNS = ["name", "bound_value", "observed_value", "satisfied", "slack"]

EXIT_OK = 0
EXIT_UNSATISFIED_BOUNDS = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


@dataclasses.dataclass
class ExperimentSpec:
    """Everything one invocation runs; the unit the sidecar round-trips."""

    sigmas: list[float]
    cost: float
    rounds: int
    runs: int
    seed: int = 0
    model: str = REVEALED_QUALITY
    diamond: tuple[float, float] | None = None
    common_random_numbers: bool = True
    utility_convention: str = UTILITY_OUTSIDE
    t_grid: list[int] | None = None
    check_bounds: bool = False

    def configs(self) -> list[WorldConfig]:
        return [
            WorldConfig(
                sigma=s, cost=self.cost, rounds=self.rounds, model=self.model,
                diamond=self.diamond, runs=self.runs, seed=self.seed,
                common_random_numbers=self.common_random_numbers,
                utility_convention=self.utility_convention,
            )
            for s in self.sigmas
        ]


def _grid_125(limit: int) -> list[int]:
    grid = []
    base = 1
    while base <= limit:
        for mult in (1, 2, 5):
            if base * mult <= limit:
                grid.append(base * mult)
        base *= 10
    if grid[-1] != limit:
        grid.append(limit)
    return grid


PRESETS: dict[str, ExperimentSpec] = {
    "figure1-c01": ExperimentSpec(
        sigmas=[0.0, 0.25, 0.5, 0.75, 1.0], cost=0.1, rounds=100, runs=10**5,
    ),
    "figure1-c02": ExperimentSpec(
        sigmas=[0.0, 0.25, 0.5, 0.75, 1.0], cost=0.2, rounds=100, runs=10**5,
    ),
    "diamond-demo": ExperimentSpec(
        sigmas=[0.0, 1.0], cost=0.3, rounds=5000, runs=2000,
        model=REVEALED_VALUE, diamond=(0.002, 100.0),
    ),
    "bounds-grid": ExperimentSpec(
        sigmas=[0.25, 0.5, 0.75], cost=0.1, rounds=10**5, runs=3000,
        t_grid=_grid_125(10**5), check_bounds=True,
    ),
}


def _fmt(value: float) -> str:
    return "%.17g" % value


def _parse_diamond(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise ConfigError("--diamond expects P,D (two comma-separated numbers)")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise ConfigError(f"--diamond expects numbers, got {text!r}") from exc


def _parse_grid(text: str) -> list[int]:
    try:
        grid = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigError(f"--rounds-grid expects comma-separated integers, got {text!r}") from exc
    if not grid:
        raise ConfigError("--rounds-grid must name at least one checkpoint")
    return grid


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="boxsearch",
        description="Simulate sequential social learning with optimal search.",
    )
    parser.add_argument("--preset", choices=sorted(PRESETS))
    parser.add_argument("--config", help="INI config file or a results.json sidecar")
    parser.add_argument("--sigma", action="append", type=float,
                        help="signal share in [0,1]; repeatable")
    parser.add_argument("--cost", type=float)
    parser.add_argument("--rounds", type=int)
    parser.add_argument("--rounds-grid",
                        help="comma-separated T checkpoints (default: geometric grid)")
    parser.add_argument("--runs", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--model", choices=list(MODELS))
    parser.add_argument("--diamond", metavar="P,D",
                        help="rare-jump quality model parameters")
    parser.add_argument("--crn", action=argparse.BooleanOptionalAction,
                        help="share random numbers across sigma values (default on)")
    parser.add_argument("--utility-convention", choices=list(UTILITY_CONVENTIONS))
    parser.add_argument("--workers", type=int)
    parser.add_argument("--output", default="results", metavar="DIR")
    parser.add_argument("--check-bounds", action="store_true", default=None,
                        help="append bound reports; exit 1 if any is violated")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return parser


def _spec_from_mapping(data: dict) -> ExperimentSpec:
    spec = ExperimentSpec(sigmas=[0.5], cost=0.1, rounds=100, runs=1000)
    return _apply_mapping(spec, data)


def _apply_mapping(spec: ExperimentSpec, data: dict) -> ExperimentSpec:
    updates: dict = {}
    for key, raw in data.items():
        if key == "sigmas" or key == "sigma":
            if isinstance(raw, str):
                updates["sigmas"] = [float(part) for part in raw.split(",") if part.strip()]
            elif isinstance(raw, (int, float)):
                updates["sigmas"] = [float(raw)]
            else:
                updates["sigmas"] = [float(v) for v in raw]
        elif key in ("cost",):
            updates["cost"] = float(raw)
        elif key in ("rounds", "runs", "seed"):
            updates[key] = int(raw)
        elif key == "model":
            updates["model"] = str(raw)
        elif key == "diamond":
            if raw is None or raw == "":
                updates["diamond"] = None
            elif isinstance(raw, str):
                updates["diamond"] = _parse_diamond(raw)
            else:
                p, jump = raw
                updates["diamond"] = (float(p), float(jump))
        elif key in ("common_random_numbers", "crn"):
            if isinstance(raw, str):
                updates["common_random_numbers"] = raw.strip().lower() in ("1", "true", "yes", "on")
            else:
                updates["common_random_numbers"] = bool(raw)
        elif key == "utility_convention":
            updates["utility_convention"] = str(raw)
        elif key in ("t_grid", "rounds_grid"):
            if raw is None:
                updates["t_grid"] = None
            elif isinstance(raw, str):
                updates["t_grid"] = _parse_grid(raw)
            else:
                updates["t_grid"] = [int(v) for v in raw]
        elif key == "check_bounds":
            updates["check_bounds"] = bool(raw)
        else:
            raise ConfigError(f"unknown configuration key {key!r}")
    return dataclasses.replace(spec, **updates)


def _load_config_file(path: str, base: ExperimentSpec | None) -> ExperimentSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    spec = base
    if path.endswith(".json") or text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        mapping = data.get("experiment", data)
        if spec is None:
            return _spec_from_mapping(mapping)
        return _apply_mapping(spec, mapping)
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError:
        parser = configparser.ConfigParser()
        parser.read_string("[experiment]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"config file {path} is not valid INI: {exc}") from exc
    merged: dict = {}
    for section in parser.sections():
        merged.update(dict(parser[section]))
    merged.update(dict(parser.defaults()))
    if spec is None:
        return _spec_from_mapping(merged)
    return _apply_mapping(spec, merged)


def build_spec(args: argparse.Namespace) -> ExperimentSpec:
    spec: ExperimentSpec | None = None
    if args.preset:
        spec = dataclasses.replace(PRESETS[args.preset])
    if args.config:
        spec = _load_config_file(args.config, spec)
    overrides: dict = {}
    if args.sigma is not None:
        overrides["sigmas"] = args.sigma
    for key in ("cost", "rounds", "runs", "seed", "model"):
        value = getattr(args, key)
        if value is not None:
            overrides[key] = value
    if args.diamond is not None:
        overrides["diamond"] = _parse_diamond(args.diamond)
    if args.crn is not None:
        overrides["common_random_numbers"] = args.crn
    if args.utility_convention is not None:
        overrides["utility_convention"] = args.utility_convention
    if args.rounds_grid is not None:
        overrides["t_grid"] = _parse_grid(args.rounds_grid)
    if args.check_bounds is not None:
        overrides["check_bounds"] = True
    if spec is None:
        missing = [
            flag for flag, value in (
                ("--sigma", args.sigma), ("--cost", args.cost),
                ("--rounds", args.rounds), ("--runs", args.runs),
            ) if value is None
        ]
        if missing:
            raise ConfigError(
                "without --preset or --config, these flags are required: "
                + ", ".join(missing)
            )
        spec = ExperimentSpec(
            sigmas=list(args.sigma), cost=args.cost, rounds=args.rounds, runs=args.runs,
        )
        for handled in ("sigmas", "cost", "rounds", "runs"):
            overrides.pop(handled, None)
    return _apply_overrides(spec, overrides)


def _apply_overrides(spec: ExperimentSpec, overrides: dict) -> ExperimentSpec:
    if not overrides:
        return spec
    return dataclasses.replace(spec, **overrides)


def _curve_rows(config: WorldConfig, points: Sequence[CurvePoint]) -> list[list[str]]:
    p, jump = config.diamond if config.diamond is not None else (None, None)
    rows = []
    for pt in points:
        rows.append([
            _fmt(pt.sigma), str(pt.T), _fmt(pt.mean_avg_utility),
            _fmt(pt.se_avg_utility), _fmt(pt.alt_convention_utility),
            _fmt(pt.mean_max_quality), _fmt(pt.se_max_quality),
            _fmt(pt.mean_items_explored), str(pt.runs), str(config.seed),
            config.model, _fmt(config.cost),
            "" if p is None else _fmt(p), "" if jump is None else _fmt(jump),
        ])
    return rows


def _write_csv(path: str, header: list[str], rows: list[list[str]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _sidecar_payload(spec: ExperimentSpec, t_grid: list[int], wall: float) -> dict:
    return {
        "engine_version": __version__,
        "experiment": {
            "sigmas": spec.sigmas,
            "cost": spec.cost,
            "rounds": spec.rounds,
            "runs": spec.runs,
            "seed": spec.seed,
            "model": spec.model,
            "diamond": list(spec.diamond) if spec.diamond else None,
            "common_random_numbers": spec.common_random_numbers,
            "utility_convention": spec.utility_convention,
            "t_grid": t_grid,
            "check_bounds": spec.check_bounds,
        },
        "seed": spec.seed,
        "wall_time_seconds": wall,
        "output_csv": RESULTS_CSV,
    }


def run_experiment(spec: ExperimentSpec, output_dir: str, workers: int | None) -> int:
    t_grid = spec.t_grid if spec.t_grid is not None else default_t_grid(spec.rounds)
    configs = spec.configs()  # validates every WorldConfig up front
    os.makedirs(output_dir, exist_ok=True)
    started = time.time()
    rows: list[list[str]] = []
    reports: list[BoundReport] = []
    for config in configs:
        points = estimate_curve(config, t_grid, workers=workers)
        rows.extend(_curve_rows(config, points))
        if spec.check_bounds:
            reports.extend(curve_bound_reports(config, points))
    wall = time.time() - started
    _write_csv(os.path.join(output_dir, RESULTS_CSV), CSV_COLUMNS, rows)
    with open(os.path.join(output_dir, SIDECAR_JSON), "w", encoding="utf-8") as fh:
        json.dump(_sidecar_payload(spec, t_grid, wall), fh, indent=2)
        fh.write("\n")
    if spec.check_bounds:
        bound_rows = [
            [r.name, _fmt(r.bound_value), _fmt(r.observed_value),
             "true" if r.satisfied else "false", _fmt(r.slack)]
            for r in reports
        ]
        _write_csv(os.path.join(output_dir, BOUNDS_CSV), BOUNDS_COLUMNS, bound_rows)
        unsatisfied = [r for r in reports if not r.satisfied]
        if unsatisfied:
            for r in unsatisfied:
                print(f"bound violated: {r.name} observed={r.observed_value:.6g} "
                      f"bound={r.bound_value:.6g}", file=sys.stderr)
            return EXIT_UNSATISFIED_BOUNDS
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        spec = build_spec(args)
        return run_experiment(spec, args.output, args.workers)
    except (ConfigError, UnsupportedModelError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (StepCapExceeded, NonConvergenceError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
