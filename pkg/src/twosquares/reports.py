"""Serialization of report records to CSV, JSON and plot-ready TSV."""

from __future__ import annotations

import csv
import dataclasses
import io
import json

__all__ = ["format_rows", "row_dict"]


def _fmt(value):
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def row_dict(record) -> dict:
    """Field mapping for a record: dataclass fields, or its own as_row()."""
    as_row = getattr(record, "as_row", None)
    if as_row is not None:
        return as_row()
    return dataclasses.asdict(record)


def format_rows(records, fmt: str = "csv", tsv_fields=None) -> str:
    """Render records in one of the supported formats.

    csv carries every field with a header line; json is an array of objects;
    tsv emits the two columns named in tsv_fields (default: first two fields),
    the plot-ready form.
    """
    records = list(records)
    if not records:
        return ""
    rows = [row_dict(r) for r in records]
    fields = list(rows[0].keys())
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(fields)
        for row in rows:
            writer.writerow([_fmt(row[f]) for f in fields])
        return buf.getvalue()
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    if fmt == "tsv":
        pair = tsv_fields if tsv_fields is not None else fields[:2]
        lines = ["\t".join(_fmt(row[f]) for f in pair) for row in rows]
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown output format {fmt!r}")
