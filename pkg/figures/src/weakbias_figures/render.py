"""Deterministic figure rendering from sweep CSV files.

The input format is the sweep CSV emitted by the analysis CLI: a comma-
separated header naming each column, then one row per swept point with
``nan`` for undefined entries.  `render` reads one x column and one y column,
drops rows where either is nan (reporting how many), and writes both a raster
(PNG) and a vector (SVG) variant of the same plot.

Determinism: the figure size, dpi, and SVG element-id salt are pinned, and
date/creator metadata is stripped, so a given spec and CSV always produce
byte-identical files.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

__all__ = [
    "FigureSpec",
    "RenderError",
    "MissingColumnError",
    "EmptyDataError",
    "load_table",
    "render",
]

_FIGSIZE = (6.4, 4.4)
_DPI = 150
_SVG_HASH_SALT = "weakbias-figures"


class RenderError(Exception):
    """Base error for figure rendering."""


class MissingColumnError(RenderError):
    """A requested column is not present in the CSV header."""

    def __init__(self, column: str, available: tuple[str, ...]) -> None:
        self.column = column
        super().__init__(f"column {column!r} not in CSV header {list(available)}")


class EmptyDataError(RenderError):
    """No plottable rows remain after dropping undefined values."""


@dataclass(frozen=True)
class FigureSpec:
    """Everything needed to turn one sweep CSV into one plot.

    ``output_image`` may carry a ``.png`` or ``.svg`` extension or none at
    all; both variants are always written next to each other with the same
    stem.
    """

    input_csv: str
    x_column: str
    output_image: str
    y_column: str = "ratio"
    x_scale: str = "linear"
    y_scale: str = "linear"
    title: str = ""
    x_label: str = ""
    y_label: str = ""
    annotations: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        for name in ("x_scale", "y_scale"):
            value = getattr(self, name)
            if value not in ("linear", "log"):
                raise RenderError(f'{name} must be "linear" or "log", got {value!r}')

    def output_paths(self) -> tuple[str, str]:
        stem, ext = os.path.splitext(self.output_image)
        if ext.lower() not in (".png", ".svg"):
            stem = self.output_image
        return stem + ".png", stem + ".svg"


def load_table(path: str) -> tuple[tuple[str, ...], list[dict]]:
    """Read a sweep CSV into (header, rows of raw strings)."""
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise RenderError(f"{path}: empty CSV, no header row")
        header = tuple(reader.fieldnames)
        rows = list(reader)
    return header, rows


def _series(spec: FigureSpec) -> tuple[list[float], list[float], int]:
    header, rows = load_table(spec.input_csv)
    for column in (spec.x_column, spec.y_column):
        if column not in header:
            raise MissingColumnError(column, header)
    xs: list[float] = []
    ys: list[float] = []
    skipped = 0
    for row in rows:
        try:
            x = float(row[spec.x_column])
            y = float(row[spec.y_column])
        except (TypeError, ValueError) as exc:
            raise RenderError(
                f"{spec.input_csv}: non-numeric value in column "
                f"{spec.x_column!r}/{spec.y_column!r}: {exc}"
            ) from exc
        if math.isnan(x) or math.isnan(y):
            skipped += 1
            continue
        xs.append(x)
        ys.append(y)
    return xs, ys, skipped


def render(spec: FigureSpec) -> tuple[str, str]:
    """Plot ``y_column`` against ``x_column`` and write PNG + SVG files.

    Rows whose x or y is nan are skipped and the count is reported on
    standard output.  Raises `EmptyDataError` (before creating any file)
    when nothing remains to plot.
    """
    xs, ys, skipped = _series(spec)
    total = len(xs) + skipped
    print(f"{spec.input_csv}: plotted {len(xs)} of {total} rows, skipped {skipped} undefined")
    if not xs:
        raise EmptyDataError(f"{spec.input_csv}: no plottable rows after skipping {skipped} undefined")

    png_path, svg_path = spec.output_paths()
    with plt.rc_context({"svg.hashsalt": _SVG_HASH_SALT}):
        fig, ax = plt.subplots(figsize=_FIGSIZE)
        try:
            ax.plot(xs, ys, marker="o", markersize=4, linewidth=1.2)
            ax.set_xscale(spec.x_scale)
            ax.set_yscale(spec.y_scale)
            ax.set_xlabel(spec.x_label or spec.x_column)
            ax.set_ylabel(spec.y_label or spec.y_column)
            if spec.title:
                ax.set_title(spec.title)
            for note in spec.annotations:
                ax.annotate(note, xy=(0.02, 0.95), xycoords="axes fraction", fontsize=8)
            ax.grid(True, which="both", alpha=0.3)
            fig.tight_layout()
            # Each backend embeds its own build/date stamp under a different
            # key; passing None drops the default so output is reproducible.
            fig.savefig(png_path, dpi=_DPI, metadata={"Software": None})
            fig.savefig(svg_path, metadata={"Date": None, "Creator": None})
        finally:
            plt.close(fig)
    return png_path, svg_path
