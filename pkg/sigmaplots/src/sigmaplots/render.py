"""Render the four standard diagnostic figures from a run-log CSV.

The CSV must carry exactly the sigmaflow run-log header:

    t, dt, residual_sup, F_tilde, F_nk, mu_mass, chi_min_eig, chi_max_eig,
    osc_phi, phidot_min, phidot_max, sigma_ratio_min, sigma_ratio_max

Figures (fixed names, for CI artifact collection): residual.png (log y),
ftilde.png, eigs.png (min/max eigenvalue band), osc.png.  The plotted
arrays are the CSV columns verbatim; no smoothing or resampling.

Exit codes: 0 ok, 1 usage/data error.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

RUNLOG_COLUMNS = [
    "t", "dt", "residual_sup", "F_tilde", "F_nk", "mu_mass",
    "chi_min_eig", "chi_max_eig", "osc_phi", "phidot_min", "phidot_max",
    "sigma_ratio_min", "sigma_ratio_max",
]

FIGURES = ("residual.png", "ftilde.png", "eigs.png", "osc.png")


class SchemaError(ValueError):
    pass


def load_runlog(path) -> dict:
    """Parse the CSV into {column: float array}; strict schema check."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise SchemaError(
            f"{path}: empty file; expected header {','.join(RUNLOG_COLUMNS)}")
    header = [c.strip() for c in rows[0]]
    if header != RUNLOG_COLUMNS:
        missing = [c for c in RUNLOG_COLUMNS if c not in header]
        extra = [c for c in header if c not in RUNLOG_COLUMNS]
        raise SchemaError(
            f"{path}: header mismatch; missing columns {missing}, "
            f"unexpected columns {extra}")
    data = rows[1:]
    if not data:
        raise SchemaError(f"{path}: no data rows")
    try:
        values = np.array([[float(v) for v in row] for row in data])
    except ValueError as exc:
        raise SchemaError(f"{path}: non-numeric entry: {exc}") from exc
    if values.shape[1] != len(RUNLOG_COLUMNS):
        raise SchemaError(f"{path}: ragged rows")
    return {c: values[:, i] for i, c in enumerate(RUNLOG_COLUMNS)}


def _save(fig, path):
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_run(csv_path, out_dir) -> list:
    """Write residual.png, ftilde.png, eigs.png, osc.png; returns paths."""
    log = load_runlog(csv_path)
    os.makedirs(out_dir, exist_ok=True)
    t = log["t"]
    written = []

    fig, ax = plt.subplots()
    ax.plot(t, log["residual_sup"], marker=".", label="sup residual")
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("sup residual")
    ax.set_title("residual vs time")
    path = os.path.join(out_dir, "residual.png")
    _save(fig, path)
    written.append(path)

    fig, ax = plt.subplots()
    ax.plot(t, log["F_tilde"], marker=".", label="F_tilde")
    ax.set_xlabel("t")
    ax.set_ylabel("F_tilde")
    ax.set_title("energy functional vs time")
    path = os.path.join(out_dir, "ftilde.png")
    _save(fig, path)
    written.append(path)

    fig, ax = plt.subplots()
    ax.plot(t, log["chi_min_eig"], marker=".", label="min eigenvalue")
    ax.plot(t, log["chi_max_eig"], marker=".", label="max eigenvalue")
    ax.fill_between(t, log["chi_min_eig"], log["chi_max_eig"], alpha=0.2)
    ax.set_xlabel("t")
    ax.set_ylabel("relative eigenvalues of chi")
    ax.set_title("eigenvalue bounds vs time")
    ax.legend()
    path = os.path.join(out_dir, "eigs.png")
    _save(fig, path)
    written.append(path)

    fig, ax = plt.subplots()
    ax.plot(t, log["osc_phi"], marker=".", label="oscillation")
    ax.set_xlabel("t")
    ax.set_ylabel("osc(phi)")
    ax.set_title("potential oscillation vs time")
    path = os.path.join(out_dir, "osc.png")
    _save(fig, path)
    written.append(path)

    return written


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="sigmaplots",
        description="render diagnostic figures from a sigmaflow run-log CSV",
    )
    parser.add_argument("csv", help="run-log CSV path")
    parser.add_argument("--out", default=".", help="output directory")
    args = parser.parse_args(argv)
    try:
        written = render_run(args.csv, args.out)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
