"""Render sweep CSVs produced by the weakbias CLI as figures.

This package talks to the analysis package only through its CSV format: a
header row naming the columns and one numeric row per swept point, with
``nan`` marking undefined values.  Rendering is deterministic — identical
input produces byte-identical PNG and SVG files.
"""

from .render import EmptyDataError, FigureSpec, MissingColumnError, RenderError, load_table, render

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "FigureSpec",
    "RenderError",
    "MissingColumnError",
    "EmptyDataError",
    "load_table",
    "render",
]
