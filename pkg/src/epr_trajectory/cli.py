"""Command-line entry point.

Exit codes: 0 success, 1 unexpected error, 2 configuration error,
3 infeasible entanglement target, 4 numerical failure, 5 I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import __version__
from .config import parse_config
from .emit import FORMATS, emit, summary_line
from .errors import ConfigError, EprTrajectoryError, InfeasibleTarget, NumericalFailure
from .scenarios import ScenarioConfig, run_scenario

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_NUMERICAL = 4
EXIT_IO = 5


@dataclass(frozen=True)
class RunManifest:
    config_path: Path
    config: ScenarioConfig
    seed: int
    out_dir: Path
    format: str = "both"
    version: str = __version__


def run(manifest: RunManifest, workers: int = 1) -> int:
    """Execute one manifest, write outputs and print the summary line."""
    try:
        report = run_scenario(manifest.config, workers=workers)
        emit(report, manifest.out_dir, manifest.format, manifest.version)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleTarget as exc:
        print(f"infeasible target: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except EprTrajectoryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(summary_line(report))
    return EXIT_OK


def build_manifest(args: argparse.Namespace) -> RunManifest:
    path = Path(args.config)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    config = parse_config(text)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.runs is not None:
        overrides["n_runs"] = args.runs
    if overrides:
        config = dataclasses.replace(config, **overrides)
    return RunManifest(path, config, config.seed, Path(args.out), args.format)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="epr-trajectory",
        description="Simulate trajectory measurements with an entangled negative-mass reference.",
    )
    p.add_argument("--config", required=True, help="YAML scenario document")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--runs", type=int, help="override n_runs")
    p.add_argument("--out", default=".", help="output directory (default: .)")
    p.add_argument("--format", choices=FORMATS, default="both")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    if args.seed is not None and not 0 <= args.seed < 2**64:
        print("config error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG
    try:
        manifest = build_manifest(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(manifest)


if __name__ == "__main__":
    sys.exit(main())
