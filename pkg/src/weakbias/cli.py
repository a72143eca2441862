"""Command-line interface: bias at a point, parameter sweeps to CSV, validation.

Subcommands
    point      print one bias record as CSV on standard output
    sweep      write a CSV of bias records over a parameter grid
    validate   run the numerical validation suite and report each check

Values resolve in order: built-in defaults, then an optional flat key=value
config file, then a figure preset, then explicit flags.  Exit codes: 0 on
success, 1 for model or I/O errors, 2 for usage errors.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .dephasing import SWEEP_AXES, DephasingParams, bias_point, sweep
from .errors import InvalidParameterError, WeakBiasError
from .sweepio import records_to_csv, write_csv
from .validation import run_all

__all__ = ["main", "PRESETS"]

#: Sweep bundles reproducing the three figure-style scans: bias ratio against
#: the postselection angle, the coupling, and the decoherence strength.
PRESETS = {
    "fig1": {"axis": "delta", "from": 1e-4, "to": 1e-2, "points": 50, "spacing": "log"},
    "fig2": {"axis": "g", "from": -1e-4, "to": 1e-4, "points": 41, "spacing": "linear"},
    "fig3": {"axis": "eps_d", "from": 1e-6, "to": 1e-4, "points": 30, "spacing": "log"},
}

_FLOAT_KEYS = ("beta", "theta", "delta", "g", "epsd", "t", "from", "to")
_INT_KEYS = ("points", "seed")
_BOOL_KEYS = ("oracle", "zerotolerance")

#: config-file key -> parser destination (flag name with dashes removed)
_CONFIG_DESTS = {
    "beta": "beta",
    "theta": "theta",
    "delta": "delta",
    "g": "g",
    "epsd": "eps_d",
    "t": "t",
    "nmax": "nmax",
    "axis": "axis",
    "from": "from_",
    "to": "to",
    "points": "points",
    "spacing": "spacing",
    "oracle": "oracle",
    "out": "out",
    "preset": "preset",
    "seed": "seed",
    "zerotolerance": "zero_tolerance",
}

_DEFAULTS = {
    "beta": 1.0,
    "theta": 0.39269908169872414,  # pi/8
    "delta": 1e-3,
    "g": 1e-5,
    "eps_d": 1e-5,
    "t": 1.0,
    "nmax": "auto",
    "axis": None,
    "from_": None,
    "to": None,
    "points": None,
    "spacing": "linear",
    "oracle": False,
    "out": None,
    "seed": 0,
    "zero_tolerance": False,
}


class UsageError(Exception):
    """Invalid flag or config value; maps to exit code 2."""


def _parse_config_value(key: str, raw: str):
    try:
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in _INT_KEYS:
            return int(raw)
        if key in _BOOL_KEYS:
            lowered = raw.lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
    except ValueError as exc:
        raise UsageError(f"config key {key!r}: cannot parse value {raw!r}") from exc
    return raw


def _read_config(path: str) -> dict:
    """Parse a flat key=value file; '#' starts a comment, blank lines skipped."""
    values = {}
    try:
        with open(path, "r", encoding="utf-8") as handle:
            lines = handle.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {stripped!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in _CONFIG_DESTS:
            raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
        values[_CONFIG_DESTS[key]] = _parse_config_value(key, raw)
    return values


def _parse_nmax(raw) -> object:
    if isinstance(raw, int):
        value = raw
    else:
        text = str(raw).strip().lower()
        if text == "auto":
            return "auto"
        try:
            value = int(text)
        except ValueError as exc:
            raise UsageError(f"--nmax expects an integer or 'auto', got {raw!r}") from exc
    if value < 0:
        raise UsageError(f"--nmax must be nonnegative, got {value}")
    return value


def _add_model_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--beta", type=float, help="inverse bath temperature (>0)")
    parser.add_argument("--theta", type=float, help="probe readout-basis rotation angle")
    parser.add_argument("--delta", type=float, help="postselection angle (A_w = cot delta)")
    parser.add_argument("--g", type=float, help="true system-probe coupling")
    parser.add_argument("--eps-d", type=float, help="decoherence strength (>= 0)")
    parser.add_argument("--t", type=float, help="decoherence duration (> 0)")
    parser.add_argument("--nmax", help="Fock-space truncation: integer or 'auto'")
    parser.add_argument("--oracle", action="store_true", default=None,
                        help="also report maximum-likelihood oracle biases")
    parser.add_argument("--config", help="flat key=value config file")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weakbias",
        description="First-order systematic bias of weakly measured couplings under probe decoherence.",
    )
    subparsers = parser.add_subparsers(dest="subcommand", required=True)

    point = subparsers.add_parser("point", help="print the bias record at one parameter point")
    _add_model_flags(point)

    swp = subparsers.add_parser("sweep", help="write bias records over a parameter grid to CSV")
    _add_model_flags(swp)
    swp.add_argument("--axis", choices=SWEEP_AXES, help="parameter to sweep")
    swp.add_argument("--from", dest="from_", type=float, help="sweep start value")
    swp.add_argument("--to", type=float, help="sweep end value")
    swp.add_argument("--points", type=int, help="number of grid points (>= 2)")
    swp.add_argument("--spacing", choices=("linear", "log"), help="grid spacing")
    swp.add_argument("--preset", choices=sorted(PRESETS), help="bundled figure sweep")
    swp.add_argument("--out", help="output CSV path")

    val = subparsers.add_parser("validate", help="run the numerical validation suite")
    val.add_argument("--seed", type=int, help="seed for randomized checks (>= 0)")
    val.add_argument("--zero-tolerance", action="store_true", default=None,
                     help="negative control: collapse every pass bound to 0")
    val.add_argument("--config", help="flat key=value config file")
    return parser


def _resolve(args: argparse.Namespace) -> dict:
    """Merge defaults, config file, preset, and explicit flags (in that order)."""
    merged = dict(_DEFAULTS)
    explicit = {k: v for k, v in vars(args).items() if k != "subcommand" and v is not None}

    config_path = explicit.pop("config", None)
    if config_path is not None:
        merged.update(_read_config(config_path))

    preset = explicit.pop("preset", merged.pop("preset", None))
    if preset is not None:
        if preset not in PRESETS:
            raise UsageError(f"unknown preset {preset!r}")
        bundle = PRESETS[preset]
        merged.update(
            {
                "axis": bundle["axis"],
                "from_": bundle["from"],
                "to": bundle["to"],
                "points": bundle["points"],
                "spacing": bundle["spacing"],
            }
        )
    merged.update(explicit)
    merged["nmax"] = _parse_nmax(merged["nmax"])
    if merged["seed"] < 0:
        raise UsageError(f"--seed must be nonnegative, got {merged['seed']}")
    return merged


def _params_from(merged: dict) -> DephasingParams:
    return DephasingParams(
        beta=merged["beta"],
        theta=merged["theta"],
        delta=merged["delta"],
        g=merged["g"],
        eps_d=merged["eps_d"],
        t=merged["t"],
        n_max=merged["nmax"],
    )


def _run_point(merged: dict) -> int:
    record = bias_point(_params_from(merged), compute_oracle=merged["oracle"])
    sys.stdout.write(records_to_csv([record]))
    return 0


def _run_sweep(merged: dict) -> int:
    for key, flag in (("axis", "--axis"), ("from_", "--from"), ("to", "--to"),
                      ("points", "--points"), ("out", "--out")):
        if merged[key] is None:
            raise UsageError(f"sweep requires {flag} (or a preset/config supplying it)")
    records = sweep(
        _params_from(merged),
        sweep_axis=merged["axis"],
        sweep_range=(merged["from_"], merged["to"]),
        points=merged["points"],
        spacing=merged["spacing"],
        compute_oracle=merged["oracle"],
    )
    write_csv(records, merged["out"])
    return 0


def _run_validate(merged: dict) -> int:
    results = run_all(seed=merged["seed"], zero_tolerance=merged["zero_tolerance"])
    failures = 0
    for check in results:
        status = "PASS" if check.passed else "FAIL"
        failures += 0 if check.passed else 1
        print(
            f"{status}  {check.name:<26} measured {check.measured:.3e} "
            f"{check.comparison} bound {check.bound:.3e}  ({check.detail})"
        )
    print(f"{len(results) - failures}/{len(results)} checks passed")
    return 0 if failures == 0 else 1


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        merged = _resolve(args)
        if args.subcommand == "point":
            return _run_point(merged)
        if args.subcommand == "sweep":
            return _run_sweep(merged)
        return _run_validate(merged)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except InvalidParameterError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except WeakBiasError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
