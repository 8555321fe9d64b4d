"""CSV and JSON documents that carry their own resolved configuration.

Both formats hold one table (named columns, one row per record) plus the
resolved configuration and free-form metadata.  Missing values (NaN) are
written as an empty CSV cell or JSON ``null``.  Reading a document and
writing it again reproduces the original bytes.

CSV layout::

    # tlrcool <version> format 1 kind=<kind>
    # config: <compact JSON>
    # meta: <compact JSON>
    col1,col2,...
    v11,v12,...
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

from . import __version__

FORMAT_VERSION = 1


@dataclass
class Document:
    kind: str
    columns: list[str]
    rows: list[list]
    config: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)


def _clean(value):
    """JSON-safe copy: NaN/inf floats become None, tuples become lists,
    complex numbers become [re, im]."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, bool) or value is None or isinstance(value, (str, int)):
        return value
    if isinstance(value, complex):
        return [_clean(value.real), _clean(value.imag)]
    if hasattr(value, "item"):  # numpy scalar
        return _clean(value.item())
    if hasattr(value, "value") and isinstance(getattr(value, "value"), str):  # enums
        return value.value
    f = float(value)
    return f if math.isfinite(f) else None


def _compact(obj) -> str:
    return json.dumps(_clean(obj), separators=(",", ":"), allow_nan=False)


def to_json(doc: Document) -> str:
    payload = {
        "tool": "tlrcool",
        "version": __version__,
        "format": FORMAT_VERSION,
        "kind": doc.kind,
        "config": doc.config,
        "meta": doc.meta,
        "columns": list(doc.columns),
        "rows": [dict(zip(doc.columns, row)) for row in doc.rows],
    }
    return json.dumps(_clean(payload), indent=2, allow_nan=False) + "\n"


def from_json(text: str) -> Document:
    data = json.loads(text)
    if data.get("tool") != "tlrcool":
        raise ValueError("not a tlrcool document")
    columns = data["columns"]
    rows = [[r.get(c) for c in columns] for r in data["rows"]]
    return Document(kind=data["kind"], columns=columns, rows=rows, config=data["config"], meta=data["meta"])


def _cell(value) -> str:
    value = _clean(value)
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, dict)):
        return _compact(value)
    return str(value)


def _parse_cell(text: str):
    if text == "":
        return None
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    if text[:1] in "[{":
        try:
            return json.loads(text)
        except json.JSONDecodeError:
            pass
    return text


def to_csv(doc: Document) -> str:
    buf = io.StringIO()
    buf.write(f"# tlrcool {__version__} format {FORMAT_VERSION} kind={doc.kind}\n")
    buf.write(f"# config: {_compact(doc.config)}\n")
    buf.write(f"# meta: {_compact(doc.meta)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(doc.columns)
    for row in doc.rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def from_csv(text: str) -> Document:
    lines = text.splitlines(keepends=True)
    if len(lines) < 4 or not lines[0].startswith("# tlrcool "):
        raise ValueError("not a tlrcool CSV document")
    kind = lines[0].rsplit("kind=", 1)[1].strip()
    config = json.loads(lines[1].split(": ", 1)[1])
    meta = json.loads(lines[2].split(": ", 1)[1])
    reader = csv.reader(io.StringIO("".join(lines[3:])))
    columns = next(reader)
    rows = [[_parse_cell(c) for c in r] for r in reader]
    return Document(kind=kind, columns=columns, rows=rows, config=config, meta=meta)


def dumps(doc: Document, fmt: str) -> str:
    if fmt == "json":
        return to_json(doc)
    if fmt == "csv":
        return to_csv(doc)
    raise ValueError(f"unknown format {fmt!r}")


def loads(text: str) -> Document:
    """Parse either format, detected from the first character."""
    return from_json(text) if text.lstrip().startswith("{") else from_csv(text)
