"""Command-line front end for figure rendering.

``render_figure`` is the generic entry point; ``render_fig1`` / ``render_fig2``
/ ``render_fig3`` are one-figure shortcuts that pin the matching preset.
Presets mirror the analysis CLI's sweep presets: ratio against the
postselection angle (log x), the coupling (linear x), and the decoherence
strength (log x).  Explicit flags override preset values.

Exit codes: 0 success, 1 rendering or I/O error, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .render import FigureSpec, RenderError, render

__all__ = ["main", "main_fig1", "main_fig2", "main_fig3", "PRESETS"]

_RATIO_LABEL = "bias ratio  dg_p / dg_n"

PRESETS = {
    "fig1": {
        "x": "param_value",
        "xscale": "log",
        "xlabel": "postselection angle delta",
        "title": "Bias suppression vs postselection angle",
    },
    "fig2": {
        "x": "param_value",
        "xscale": "linear",
        "xlabel": "coupling g",
        "title": "Bias ratio vs coupling",
    },
    "fig3": {
        "x": "param_value",
        "xscale": "log",
        "xlabel": "decoherence strength eps_D",
        "title": "Bias ratio vs decoherence strength",
    },
}


class UsageError(Exception):
    """Missing or inconsistent flags; maps to exit code 2."""


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="render_figure",
        description="Plot one column of a weakbias sweep CSV against another.",
    )
    parser.add_argument("--input", help="sweep CSV to read")
    parser.add_argument("--x", help="x-axis column name")
    parser.add_argument("--y", help='y-axis column name (default "ratio")')
    parser.add_argument("--xscale", choices=("linear", "log"), help="x-axis scale")
    parser.add_argument("--yscale", choices=("linear", "log"), help="y-axis scale")
    parser.add_argument("--title", help="figure title")
    parser.add_argument("--xlabel", help="x-axis label (defaults to the column name)")
    parser.add_argument("--ylabel", help="y-axis label")
    parser.add_argument("--out", help="output image path; .png and .svg are both written")
    parser.add_argument("--preset", choices=sorted(PRESETS), help="bundled figure style")
    return parser


def _spec_from(args: argparse.Namespace) -> FigureSpec:
    merged: dict = {"y": "ratio", "xscale": "linear", "yscale": "linear",
                    "title": "", "xlabel": "", "ylabel": _RATIO_LABEL}
    if args.preset is not None:
        merged.update(PRESETS[args.preset])
    explicit = {k: v for k, v in vars(args).items() if v is not None and k != "preset"}
    merged.update(explicit)

    for key, flag in (("input", "--input"), ("out", "--out"), ("x", "--x")):
        if merged.get(key) is None:
            raise UsageError(f"{flag} is required (directly or through a preset)")
    if merged["y"] != "ratio" and merged["ylabel"] == _RATIO_LABEL:
        merged["ylabel"] = merged["y"]
    return FigureSpec(
        input_csv=merged["input"],
        x_column=merged["x"],
        output_image=merged["out"],
        y_column=merged["y"],
        x_scale=merged["xscale"],
        y_scale=merged["yscale"],
        title=merged["title"],
        x_label=merged["xlabel"],
        y_label=merged["ylabel"],
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        png_path, svg_path = render(_spec_from(args))
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except RenderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {png_path} and {svg_path}")
    return 0


def _preset_main(preset: str, argv: Optional[Sequence[str]]) -> int:
    args = list(sys.argv[1:] if argv is None else argv)
    return main(["--preset", preset, *args])


def main_fig1(argv: Optional[Sequence[str]] = None) -> int:
    return _preset_main("fig1", argv)


def main_fig2(argv: Optional[Sequence[str]] = None) -> int:
    return _preset_main("fig2", argv)


def main_fig3(argv: Optional[Sequence[str]] = None) -> int:
    return _preset_main("fig3", argv)


if __name__ == "__main__":
    sys.exit(main())
