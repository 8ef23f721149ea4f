"""Result tables and their CSV / JSON serialisation.

CSV files start with one comment line, frozen at version 1::

    # tiercache-csv v1 kind=<kind> config=<sha256> seed=<n>

followed by the column header and one line per row.  Floats are written
with 12 significant digits (``{:.12g}``), missing values as ``nan``.  The
JSON layout carries the same metadata next to ``columns`` and ``rows``.
"""
from __future__ import annotations

import csv
import io as _io
import json
import math
import os
import re
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = ["Table", "CSV_VERSION", "format_value", "emit", "dumps", "read_table"]

CSV_VERSION = 1
_HEADER = re.compile(r"^# tiercache-csv v(\d+) kind=(\S+) config=([0-9a-f]+|-) seed=(\d+)$")


@dataclass
class Table:
    """Column names, rows in order, and ``kind`` / ``config`` / ``seed`` metadata."""

    columns: list
    rows: list = field(default_factory=list)
    kind: str = "table"
    config: str = "-"
    seed: int = 0

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def as_dicts(self) -> list:
        return [dict(zip(self.columns, r)) for r in self.rows]


def format_value(v) -> str:
    if v is None:
        return "nan"
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "{:.12g}".format(float(v))
    return str(v)


def _json_value(v):
    if v is None:
        return None
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return float("{:.12g}".format(v)) if math.isfinite(v) else None
    return str(v)


def dumps(table: Table, fmt: str = "csv") -> str:
    """Serialise ``table`` to a string in ``fmt`` (``csv`` or ``json``)."""
    if fmt == "csv":
        buf = _io.StringIO()
        buf.write(f"# tiercache-csv v{CSV_VERSION} kind={table.kind} config={table.config} seed={table.seed}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(table.columns)
        for r in table.rows:
            w.writerow([format_value(v) for v in r])
        return buf.getvalue()
    if fmt == "json":
        doc = {
            "format": "tiercache-json",
            "version": CSV_VERSION,
            "kind": table.kind,
            "config": table.config,
            "seed": int(table.seed),
            "columns": list(table.columns),
            "rows": [[_json_value(v) for v in r] for r in table.rows],
        }
        return json.dumps(doc, indent=1) + "\n"
    raise ValueError(f"unknown format {fmt!r}; expected csv or json")


def emit(table: Table, fmt: str, path: Optional[str]) -> None:
    """Write ``table`` to ``path`` (``None`` or ``-`` means standard output).

    The file is written to a temporary name and renamed, so a failed run
    never leaves a truncated file behind.
    """
    text = dumps(table, fmt)
    if path in (None, "-"):
        import sys

        sys.stdout.write(text)
        return
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _parse_cell(s: str):
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def read_table(path: str) -> Table:
    """Read a file written by :func:`emit` (format chosen by content)."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        rows = [[math.nan if v is None else v for v in r] for r in doc["rows"]]
        return Table(doc["columns"], rows, doc["kind"], doc["config"], doc["seed"])
    first, _, body = text.partition("\n")
    m = _HEADER.match(first)
    if m is None:
        raise ValueError(f"{path}: missing tiercache-csv header line")
    if int(m.group(1)) != CSV_VERSION:
        raise ValueError(f"{path}: unsupported csv version {m.group(1)}")
    reader = csv.reader(_io.StringIO(body))
    cols = next(reader, [])
    rows = [[_parse_cell(c) for c in r] for r in reader]
    return Table(cols, rows, m.group(2), m.group(3), int(m.group(4)))
