"""CSV and JSON writers for scenario reports.

File names are ``<scenario>.csv`` and ``<scenario>.summary.json``. Output is
a pure function of the report so identical runs give identical bytes.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Literal

import numpy as np

from . import __version__
from .config import config_to_dict
from .scenarios import ScenarioReport

FORMATS = ("csv", "json", "both")

CSV_COLUMNS = {
    "uncorrelated_trajectory": ("run", "x_end", "p_end"),
    "entangled_trajectory": ("run", "x_end", "p_end"),
    "epr_decay": ("t", "var_x_minus", "var_p_plus", "delta_epr"),
    "mass_sign_comparison": ("t", "var_rel_pos", "var_rel_neg"),
}


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def csv_rows(report: ScenarioReport) -> tuple[tuple[str, ...], list[list]]:
    columns = CSV_COLUMNS[report.config.scenario]
    if report.endpoints is not None:
        rows = [[i, x, p] for i, (x, p) in enumerate(report.endpoints)]
    else:
        rows = [list(r) for r in zip(*(report.series[c] for c in columns))]
    return columns, rows


def _floats(a) -> list[float]:
    return [float(v) for v in np.ravel(a)]


def summary(report: ScenarioReport, version: str = __version__) -> dict:
    cfg = report.config
    stats: dict = {
        "kappa_entangle": report.kappa_entangle,
        "epr_times": _floats(report.epr_times),
        "delta_epr": _floats(report.delta_epr),
        "var_x_minus": [e.var_x_minus for e in report.epr],
        "var_p_plus": [e.var_p_plus for e in report.epr],
        "entangled": [e.entangled for e in report.epr],
    }
    if report.stats is not None:
        s = report.stats
        stats.update(
            n_runs=s.n_runs,
            mean_endpoint=_floats(s.mean_endpoint),
            std=_floats(s.std),
            std_error=_floats(s.std_error),
            std_ratio=_floats(s.std_ratio),
            std_ratio_to_sql=s.std_ratio_to_sql,
        )
    if cfg.scenario == "mass_sign_comparison":
        for name in ("var_rel_pos", "var_rel_neg"):
            v = report.series[name]
            stats[f"{name}_min"] = float(v.min())
            stats[f"{name}_max"] = float(v.max())
    return {
        "scenario": cfg.scenario,
        "config": config_to_dict(cfg),
        "statistics": stats,
        "provenance": {"seed": cfg.seed, "version": version, "tool": "epr-trajectory"},
    }


def summary_line(report: ScenarioReport) -> str:
    cfg = report.config
    head = f"{cfg.scenario}: kappa_entangle={report.kappa_entangle:.6g}"
    if report.stats is not None:
        s = report.stats
        return (
            f"{head} n_runs={s.n_runs} std_ratio={s.std_ratio_to_sql:.4f} "
            f"(x {s.std_ratio[0]:.4f}, p {s.std_ratio[1]:.4f})"
        )
    if cfg.scenario == "epr_decay":
        d = report.delta_epr
        t = report.epr_times
        return f"{head} delta_epr(t={t[0]:g})={d[0]:.4f} delta_epr(t={t[-1]:g})={d[-1]:.4f}"
    if cfg.scenario == "mass_sign_comparison":
        pos, neg = report.series["var_rel_pos"], report.series["var_rel_neg"]
        return f"{head} max var_rel_pos={pos.max():.4f} max var_rel_neg={neg.max():.4f}"
    return f"{head} delta_epr={report.delta_epr[-1]:.4f}"


def emit(
    report: ScenarioReport,
    out_dir: str | Path,
    fmt: Literal["csv", "json", "both"] = "both",
    version: str = __version__,
) -> list[Path]:
    """Write the report; returns the paths written."""
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}, got {fmt!r}")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    written = []
    name = report.config.scenario
    if fmt in ("csv", "both"):
        path = out / f"{name}.csv"
        columns, rows = csv_rows(report)
        try:
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(columns)
                w.writerows([_fmt(v) for v in row] for row in rows)
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc}") from exc
        written.append(path)
    if fmt in ("json", "both"):
        path = out / f"{name}.summary.json"
        try:
            path.write_text(json.dumps(summary(report, version), indent=2, sort_keys=True) + "\n")
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc}") from exc
        written.append(path)
    return written
