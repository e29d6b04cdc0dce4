"""Self-describing experiment reports with CSV and JSON encodings.

Both encodings carry the same values: floats are written with ``repr`` (the
shortest round-tripping form) and list-valued cells are joined with ``;``
in CSV. CSV files open with ``#``-prefixed metadata lines holding the
experiment name, artifact version, config echo and summary as compact JSON,
followed by a mandatory header row.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

from . import __version__

FORMATS = ("csv", "json")


def _plain(value):
    """Convert numpy scalars, tuples and sets into JSON-ready values."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, (set, frozenset)):
        return sorted(_plain(v) for v in value)
    if hasattr(value, "item") and not isinstance(value, (str, bytes)):
        return value.item()
    return value


def _cell(value) -> str:
    value = _plain(value)
    if value is None:
        return ""
    if isinstance(value, list):
        return ";".join(_cell(v) for v in value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass
class Report:
    experiment: str
    config: dict
    columns: list
    records: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    timings: dict | None = None

    def add(self, **row):
        missing = set(self.columns) ^ set(row)
        if missing:
            raise KeyError(f"record fields {sorted(missing)} do not match columns")
        self.records.append(row)

    def header(self) -> dict:
        head = {
            "experiment": self.experiment,
            "version": __version__,
            "config": _plain(self.config),
            "summary": _plain(self.summary),
        }
        if self.timings is not None:
            head["timings"] = _plain(self.timings)
        return head

    def to_json(self) -> str:
        doc = self.header()
        doc["columns"] = list(self.columns)
        doc["records"] = [{c: _plain(r[c]) for c in self.columns} for r in self.records]
        return json.dumps(doc, indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        for key, value in self.header().items():
            text = value if isinstance(value, str) else json.dumps(value, separators=(",", ":"))
            buf.write(f"# {key}={text}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for r in self.records:
            writer.writerow([_cell(r[c]) for c in self.columns])
        return buf.getvalue()

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return self.to_json()
        if fmt == "csv":
            return self.to_csv()
        raise ValueError(f"unknown format {fmt!r}")


def read_csv(text: str) -> tuple[dict, list[dict]]:
    """Parse a CSV report back into (metadata, rows of strings)."""
    meta, body = {}, []
    for line in text.splitlines(keepends=True):
        if line.startswith("# ") and not body:
            key, _, value = line[2:].rstrip("\n").partition("=")
            meta[key] = value if key in ("experiment", "version") else json.loads(value)
        else:
            body.append(line)
    rows = list(csv.DictReader(body))
    return meta, rows
