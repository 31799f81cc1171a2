"""File formats: records CSV, grid snapshots, run manifests, threshold JSON.

The CSV stream has one row per EnergyRecord with the fixed column order of
functionals.CSV_COLUMNS.  Snapshots are text dumps with a one-line header
(t, L, B, N, M) followed by the modal coefficients row-major by mode.
Manifests echo the fully resolved configuration (parseable as a config
file) plus the package version, so a manifest reproduces its run.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import numpy as np

from .config import RunConfig, config_lines
from .functionals import CSV_COLUMNS
from .inequalities import ThresholdReport


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def write_records_csv(path, records) -> None:
    lines = [",".join(CSV_COLUMNS)]
    for rec in records:
        lines.append(",".join(_fmt(v) for v in rec.as_row()))
    Path(path).write_text("\n".join(lines) + "\n")


def read_records_csv(path) -> dict:
    """Column arrays keyed by name."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    if data.shape == ():
        data = data.reshape(1)
    names = data.dtype.names
    return {name: np.atleast_1d(data[name]) for name in names}


def write_snapshot(path, t: float, g: np.ndarray, config: RunConfig) -> None:
    N, Mp1 = g.shape
    header = (f"t={t!r} L={config.domain.L!r} B={config.domain.B!r} "
              f"N={N} M={Mp1 - 1}")
    rows = [" ".join(_fmt(v) for v in row) for row in g]
    Path(path).write_text("# zk2d snapshot\n" + header + "\n" + "\n".join(rows) + "\n")


def read_snapshot(path):
    """Returns (t, L, B, N, M, g) with g of shape (N, M+1)."""
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0].strip() != "# zk2d snapshot":
        raise ValueError(f"{path}: not a zk2d snapshot")
    meta = dict(item.split("=", 1) for item in lines[1].split())
    t, L, B = float(meta["t"]), float(meta["L"]), float(meta["B"])
    N, M = int(meta["N"]), int(meta["M"])
    g = np.array([[float(v) for v in line.split()] for line in lines[2:2 + N]])
    if g.shape != (N, M + 1):
        raise ValueError(f"{path}: payload shape {g.shape} does not match header (N={N}, M={M})")
    return t, L, B, N, M, g


def write_manifest(path, config: RunConfig, version: str) -> None:
    body = "\n".join(config_lines(config))
    Path(path).write_text(f"# zk2d manifest (version {version})\n"
                          "# rerunning this file as a config reproduces the records byte for byte\n"
                          + body + "\n")


def write_threshold(path, report: ThresholdReport) -> None:
    Path(path).write_text(json.dumps(dataclasses.asdict(report), indent=2) + "\n")


def read_threshold(path) -> ThresholdReport:
    return ThresholdReport(**json.loads(Path(path).read_text()))


def write_margins_csv(path, margins: dict) -> None:
    names = [k for k in ("l4", "l8", "sup", "steklov") if k in margins]
    n = len(margins[names[0]])
    lines = ["sample," + ",".join(f"{name}_margin" for name in names)]
    for k in range(n):
        lines.append(f"{k}," + ",".join(_fmt(margins[name][k]) for name in names))
    Path(path).write_text("\n".join(lines) + "\n")


def write_decay_fits_csv(path, report) -> None:
    lines = ["quantity,fitted_rate,envelope_rate,envelope_satisfied,first_violation,n_samples"]
    for f in report.fits:
        ok = "" if f.envelope_satisfied is None else str(f.envelope_satisfied).lower()
        bad = "" if f.first_violation is None else _fmt(f.first_violation)
        lines.append(f"{f.quantity},{_fmt(f.rate)},{_fmt(f.envelope_rate)},{ok},{bad},{f.n_samples}")
    Path(path).write_text("\n".join(lines) + "\n")
