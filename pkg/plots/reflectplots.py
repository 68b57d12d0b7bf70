"""Figure rendering for sweep CSV files.

Draws the two figure kinds produced by the sweep CLI: the eigen kind shows
eigenvalues and eigenvector directions of the position information versus
prior accuracy (log x), the peb kind shows Rx and VA-1 position error
bounds versus prior accuracy (log-log) with both reflector cases overlaid.
Rendering is read-only: every number on a figure comes from a CSV cell,
nothing is recomputed. Rows flagged singular (infinite bound) appear as
gaps in the curves.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

# published sweep CSV schemas; header must match exactly
EIGEN_COLUMNS = (
    "sigma_ref",
    "lambda1",
    "lambda2",
    "dir1_deg",
    "dir2_deg",
    "scenario_hash",
    "pilot_seed",
)
PEB_COLUMNS = (
    "sigma_ref",
    "case",
    "peb_rx",
    "peb_va1",
    "singular",
    "scenario_hash",
    "pilot_seed",
)

SIGMA_LABEL = r"prior accuracy $\sigma_\mathrm{ref}$ [m]"
KIND_COLUMNS = {"eigen": (EIGEN_COLUMNS,), "peb": (PEB_COLUMNS, PEB_COLUMNS)}


class SchemaMismatch(Exception):
    """CSV header does not match the published sweep schema."""


@dataclass(frozen=True)
class FigureSpec:
    """What to render: input CSVs, output image, figure kind.

    kind "eigen" takes one CSV, kind "peb" takes two (one per reflector
    case). Axis labels are fixed per kind.
    """

    kind: str
    csv_paths: tuple
    out_path: str

    def __post_init__(self):
        if self.kind not in KIND_COLUMNS:
            raise ValueError(f"kind must be 'eigen' or 'peb', got {self.kind!r}")
        object.__setattr__(self, "csv_paths", tuple(self.csv_paths))
        expected = len(KIND_COLUMNS[self.kind])
        if len(self.csv_paths) != expected:
            raise ValueError(
                f"kind {self.kind!r} takes {expected} CSV path(s), "
                f"got {len(self.csv_paths)}"
            )


def read_rows(path, columns) -> list:
    """Read one sweep CSV as a list of dicts, enforcing the exact header.

    Raises:
        FileNotFoundError: path does not exist.
        SchemaMismatch: header absent or different from columns.
    """
    with open(Path(path), newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = tuple(next(reader))
        except StopIteration:
            raise SchemaMismatch(f"{path}: no header; expected {columns}") from None
        if header != tuple(columns):
            raise SchemaMismatch(
                f"{path}: header {header} does not match the published schema {columns}"
            )
        return [dict(zip(columns, row)) for row in reader]


def column(rows, name) -> np.ndarray:
    return np.array([float(row[name]) for row in rows])


def log_curve(values, mask_out=None) -> np.ndarray:
    """Curve values for a log axis: non-finite, non-positive or masked-out
    entries become NaN so matplotlib draws a gap."""
    arr = np.asarray(values, dtype=float).copy()
    bad = ~np.isfinite(arr) | (arr <= 0)
    if mask_out is not None:
        bad |= np.asarray(mask_out, dtype=bool)
    arr[bad] = np.nan
    return arr


def _render_eigen(spec: FigureSpec):
    rows = read_rows(spec.csv_paths[0], EIGEN_COLUMNS)
    fig, (ax_val, ax_dir) = plt.subplots(
        2, 1, sharex=True, figsize=(6.0, 7.0), constrained_layout=True
    )
    if rows:
        sigma = column(rows, "sigma_ref")
        ax_val.plot(sigma, log_curve(column(rows, "lambda1")), label=r"$\lambda_1$")
        ax_val.plot(sigma, log_curve(column(rows, "lambda2")), label=r"$\lambda_2$")
        ax_dir.plot(sigma, column(rows, "dir1_deg"), label="direction 1")
        ax_dir.plot(sigma, column(rows, "dir2_deg"), label="direction 2")
        ax_val.legend()
        ax_dir.legend()
    ax_val.set_xscale("log")
    ax_val.set_yscale("log")
    ax_val.set_ylabel(r"position information eigenvalues [m$^{-2}$]")
    ax_val.grid(True, which="both", alpha=0.3)
    ax_dir.set_ylim(0.0, 180.0)
    ax_dir.set_yticks([0, 45, 90, 135, 180])
    ax_dir.set_ylabel("eigenvector direction [deg]")
    ax_dir.set_xlabel(SIGMA_LABEL)
    ax_dir.grid(True, alpha=0.3)
    return fig


def _render_peb(spec: FigureSpec):
    fig, ax = plt.subplots(figsize=(6.0, 4.5), constrained_layout=True)
    any_rows = False
    for fallback, path in zip("AB", spec.csv_paths):
        rows = read_rows(path, PEB_COLUMNS)
        if not rows:
            continue
        any_rows = True
        case = rows[0]["case"] or fallback
        sigma = column(rows, "sigma_ref")
        singular = column(rows, "singular") > 0.5
        ax.plot(
            sigma,
            log_curve(column(rows, "peb_rx"), singular),
            label=f"Rx PEB, case {case}",
        )
        ax.plot(
            sigma,
            log_curve(column(rows, "peb_va1"), singular),
            linestyle="--",
            label=f"VA 1 PEB, case {case}",
        )
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(SIGMA_LABEL)
    ax.set_ylabel("position error bound [m]")
    ax.grid(True, which="both", alpha=0.3)
    if any_rows:
        ax.legend()
    return fig


def render(spec: FigureSpec):
    """Render the figure described by spec and write it to spec.out_path.

    Returns the matplotlib figure (caller closes it). An input CSV with a
    header but no rows yields empty axes, not an error.
    """
    fig = _render_eigen(spec) if spec.kind == "eigen" else _render_peb(spec)
    fig.savefig(spec.out_path, dpi=150)
    return fig


def render_to_file(spec: FigureSpec) -> None:
    """Render and release the figure; entry point for the scripts."""
    plt.close(render(spec))
