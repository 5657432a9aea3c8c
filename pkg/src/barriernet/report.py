"""Bit-stable CSV and manifest output.

Numbers are written with 17 significant digits (``repr``-exact for doubles),
lines end in LF, and column order is fixed, so identical runs produce
identical bytes.
"""

from __future__ import annotations

import csv
import json
import math
import platform
from importlib import metadata
from pathlib import Path

import numpy as np

SWEEP_COLUMNS = (
    "eps", "alpha", "beta", "alpha_lower", "beta_upper", "iters", "residual",
    "holder_k0", "holder_k1g", "holder_k2g", "schauder_ratio", "status",
)
GROWTH_COLUMNS = ("norm", "slope", "fit_residual", "verdict")
CRITICAL_COLUMNS = ("j", "eps", "alpha", "beta_prime", "beta", "M", "iters", "residual", "status", "h1_diff_next")


def fmt(value) -> str:
    """``.17g`` for floats, ``str`` for everything else."""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        return format(v, ".17g")
    return str(value)


def write_csv(path, columns, rows) -> Path:
    """Write ``rows`` (sequences aligned with ``columns``) with LF endings."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def versions() -> dict:
    out = {"python": platform.python_version(), "numpy": np.__version__}
    for key, dist in (("barriernet", "artifact"), ("scipy", "scipy")):
        try:
            out[key] = metadata.version(dist)
        except metadata.PackageNotFoundError:
            out[key] = "unknown"
    return out


def write_manifest(out_dir, config, extra=None) -> Path:
    """``manifest.json``: config hash, library versions and the effective config.

    The file parses back with :func:`barriernet.config.parse_config`.
    """
    doc = {"config_hash": config.hash(), "versions": versions(), "config": config.to_dict()}
    if extra:
        doc.update(extra)
    path = Path(out_dir) / "manifest.json"
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def emit_report(report, out_dir, config=None) -> dict:
    """Write ``sweep.csv``, ``growth.csv`` and (with a config) ``manifest.json``.

    An empty report gives header-only CSVs.  Returns the written paths by name.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = report.rows if report is not None else ()
    growth = report.growth if report is not None else ()
    paths = {
        "sweep": write_csv(out / "sweep.csv", SWEEP_COLUMNS, ([getattr(r, c) for c in SWEEP_COLUMNS] for r in rows)),
        "growth": write_csv(out / "growth.csv", GROWTH_COLUMNS, ((g.name, g.slope, g.fit_residual, g.verdict) for g in growth)),
    }
    if config is not None:
        verdict = report.verdict if report is not None else "inconclusive"
        paths["manifest"] = write_manifest(out, config, {"verdict": verdict})
    return paths


def emit_critical(report, out_dir, config=None) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"critical": write_csv(out / "critical.csv", CRITICAL_COLUMNS, ([getattr(r, c) for c in CRITICAL_COLUMNS] for r in report.rows))}
    if config is not None:
        summary = {
            "beta": report.beta,
            "decreasing": report.decreasing,
            "contraction": report.contraction,
            "beta_bounded": report.beta_bounded,
            "cauchy_evidence": report.cauchy_evidence,
        }
        paths["manifest"] = write_manifest(out, config, {"critical": summary})
    return paths


def emit_solution(u, trace, out_dir, config=None, summary=None) -> dict:
    """``solution.csv`` (node coordinates and ``u``) and ``trace.csv`` (per-iteration diagnostics)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    grid = u.grid
    coords = [m.ravel() for m in grid.mesh]
    names = ("x", "y")[: grid.dim]
    paths = {
        "solution": write_csv(out / "solution.csv", (*names, "u"), zip(*coords, u.values.ravel())),
        "trace": write_csv(
            out / "trace.csv", ("iteration", "update_sup", "residual_sup", "u_min", "u_max", "violation"), trace.as_rows()
        ),
    }
    if config is not None:
        paths["manifest"] = write_manifest(out, config, {"solve": summary or {}})
    return paths
