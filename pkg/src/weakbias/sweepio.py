"""CSV serialization of sweep records.

Numbers are emitted as Python's shortest round-trip decimal representation,
so parsing an emitted file reproduces every value bit-exactly and identical
inputs produce byte-identical files.  Undefined values are the literal
``nan``.  Files are UTF-8 with LF line endings and are written atomically
(temporary file in the target directory, then rename).
"""

from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from typing import Optional, Sequence

from .dephasing import SweepRecord
from .errors import ValidationError

__all__ = [
    "BASE_COLUMNS",
    "ORACLE_COLUMNS",
    "format_number",
    "parse_number",
    "records_to_csv",
    "csv_to_records",
    "write_csv",
    "read_csv",
]

BASE_COLUMNS = (
    "param_name",
    "param_value",
    "dg_n",
    "dg_p",
    "ratio",
    "postselect_prob",
    "fisher_n",
    "fisher_p",
)
ORACLE_COLUMNS = ("dg_n_oracle", "dg_p_oracle")


def format_number(x: Optional[float]) -> str:
    """Shortest decimal that round-trips to the same float; None/nan -> ``nan``."""
    if x is None:
        return "nan"
    x = float(x)
    if math.isnan(x):
        return "nan"
    return repr(x)


def parse_number(text: str) -> float:
    return float(text)


def _has_oracle(records: Sequence[SweepRecord]) -> bool:
    return any(r.dg_n_oracle is not None or r.dg_p_oracle is not None for r in records)


def records_to_csv(records: Sequence[SweepRecord]) -> str:
    """Render records as CSV text (header + one row per record, LF endings)."""
    with_oracle = _has_oracle(records)
    columns = BASE_COLUMNS + ORACLE_COLUMNS if with_oracle else BASE_COLUMNS
    lines = [",".join(columns)]
    for r in records:
        row = [
            r.param_name,
            format_number(r.param_value),
            format_number(r.dg_n),
            format_number(r.dg_p),
            format_number(r.ratio),
            format_number(r.postselect_prob),
            format_number(r.fisher_n),
            format_number(r.fisher_p),
        ]
        if with_oracle:
            row.append(format_number(r.dg_n_oracle))
            row.append(format_number(r.dg_p_oracle))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def csv_to_records(text: str) -> list[SweepRecord]:
    """Parse CSV text produced by `records_to_csv`."""
    reader = csv.reader(io.StringIO(text))
    rows = [row for row in reader if row]
    if not rows:
        raise ValidationError("empty CSV: missing header")
    header = tuple(rows[0])
    if header == BASE_COLUMNS:
        with_oracle = False
    elif header == BASE_COLUMNS + ORACLE_COLUMNS:
        with_oracle = True
    else:
        raise ValidationError(f"unexpected CSV header: {header!r}")
    records = []
    for row in rows[1:]:
        if len(row) != len(header):
            raise ValidationError(f"row has {len(row)} fields, header has {len(header)}")
        values = [parse_number(v) for v in row[1:]]
        records.append(
            SweepRecord(
                param_name=row[0],
                param_value=values[0],
                dg_n=values[1],
                dg_p=values[2],
                ratio=values[3],
                postselect_prob=values[4],
                fisher_n=values[5],
                fisher_p=values[6],
                dg_n_oracle=values[7] if with_oracle else None,
                dg_p_oracle=values[8] if with_oracle else None,
            )
        )
    return records


def write_csv(records: Sequence[SweepRecord], path: str) -> None:
    """Atomically write records to ``path`` (UTF-8, LF)."""
    text = records_to_csv(records)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(prefix=".sweep-", suffix=".csv.tmp", dir=directory)
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(text.encode("utf-8"))
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def read_csv(path: str) -> list[SweepRecord]:
    """Read records from a CSV file produced by `write_csv`."""
    with open(path, "r", encoding="utf-8", newline="") as handle:
        return csv_to_records(handle.read())
