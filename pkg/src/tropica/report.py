"""Run reports and their byte-stable CSV/JSON emission."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

SCHEMA_VERSION = 1


@dataclass
class Table:
    columns: tuple
    rows: list = field(default_factory=list)

    def add(self, *row):
        if len(row) != len(self.columns):
            raise ValueError(f"row has {len(row)} cells, table has {len(self.columns)} columns")
        self.rows.append(tuple(row))


@dataclass
class RunReport:
    subcommand: str
    inputs: dict
    tables: dict = field(default_factory=dict)  # name -> Table, the first one is primary
    assertions: list = field(default_factory=list)  # (name, passed)
    data: dict = field(default_factory=dict)  # scalar results outside the tables

    def table(self, name: str, *columns) -> Table:
        t = Table(tuple(columns))
        self.tables[name] = t
        return t

    def check(self, name: str, passed: bool) -> bool:
        self.assertions.append((name, bool(passed)))
        return bool(passed)

    @property
    def failed(self) -> list:
        return [n for n, ok in self.assertions if not ok]

    @property
    def digest(self) -> str:
        return hashlib.sha256(dump_json(self.inputs).encode()).hexdigest()

    def to_obj(self) -> dict:
        return {
            "version": SCHEMA_VERSION,
            "subcommand": self.subcommand,
            "inputs_digest": self.digest,
            "outputs": {name: [dict(zip(t.columns, r)) for r in t.rows] for name, t in self.tables.items()},
            "assertions": [{"name": n, "passed": ok} for n, ok in self.assertions],
            "result": self.data,
        }


def fmt_scalar(v) -> str:
    """Text form of a cell: '.17g' floats, 'num/den' rationals (integral ones bare), 'inf' for infinities."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    if v is None:
        return ""
    if isinstance(v, (tuple, list)):
        return " ".join(fmt_scalar(x) for x in v)
    return str(v)


def dump_json(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with sorted keys and fixed number formatting.

    json.dumps cannot be told to print floats with 17 significant digits,
    hence this small writer.
    """
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dump_json(obj[k], indent, _level + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + dump_json(x, indent, _level + 1) for x in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return fmt_scalar(obj) if math.isfinite(obj) else json.dumps(fmt_scalar(obj))
    if isinstance(obj, Fraction):
        return json.dumps(fmt_scalar(obj))
    return json.dumps(str(obj))


def dump_csv(t: Table) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(t.columns)
    for r in t.rows:
        w.writerow([fmt_scalar(v) for v in r])
    return buf.getvalue()


def render(report: RunReport, fmt: str = "json") -> str:
    if fmt == "json":
        return dump_json(report.to_obj()) + "\n"
    if fmt == "csv":
        if not report.tables:
            return dump_csv(Table(("name", "passed"), list(report.assertions)))
        return dump_csv(next(iter(report.tables.values())))
    raise ValueError(f"unknown format {fmt!r}")


def emit(report: RunReport, fmt: str = "json", path=None) -> str:
    """Render and write to ``path`` (bytes, LF endings) or return the text for stdout."""
    text = render(report, fmt)
    if path is not None:
        Path(path).write_bytes(text.encode("utf-8"))
    return text
