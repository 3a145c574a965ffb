"""Certificate output and the plain-text matrix file format.

Matrix files hold one or more square integer blocks separated by blank lines.
A comment line ``# NAME`` directly above a block names it; other text after
``#`` on that line is ignored.  Unnamed blocks are called M1, M2, ...
"""

from __future__ import annotations

import json
import re
import sys
from pathlib import Path

from .errors import IoFailure, ParseError
from .matqz import IntMatrix

_INT = re.compile(r"[+-]?\d+\Z")


def dumps_json(doc: dict) -> str:
    return json.dumps(doc, ensure_ascii=False, sort_keys=True, indent=2) + "\n"


def dumps_text(doc: dict) -> str:
    lines = [
        f"scenario:   {doc.get('scenario')}",
        f"conclusion: {doc.get('conclusion')}",
    ]
    if doc.get("epsilon"):
        lines.append(f"epsilon:    {doc['epsilon']}")
    if doc.get("powers"):
        lines.append("powers:     " + ", ".join(f"{k}^{v}" for k, v in sorted(doc["powers"].items())))
    checks = doc.get("checks", [])
    failed = sum(c["status"] != "pass" for c in checks)
    lines.append(f"checks:     {len(checks)} ({failed} failed)")
    lines.append("")
    for c in checks:
        margin = f"  margin {c['margin']}" if c.get("margin") else ""
        lines.append(f"[{c['status']}] {c['kind']}: {c['name']}  ({c['lhs']} | {c['rhs']}){margin}")
    if doc.get("notes"):
        lines.append("")
        lines.extend(f"note: {n}" for n in doc["notes"])
    lines.append(f"version: {doc.get('version')}")
    return "\n".join(lines) + "\n"


def emit(doc: dict, fmt: str = "json", path: str | Path | None = None) -> str:
    """Render a certificate document and write it to `path` (stdout when None)."""
    if fmt == "json":
        text = dumps_json(doc)
    elif fmt == "text":
        text = dumps_text(doc)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return text
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    return text


def parse_matrix_text(text: str) -> dict:
    """Parse the matrix file format; returns {name: IntMatrix} in file order."""
    blocks: list[tuple[str | None, list, int]] = []
    rows: list = []
    name = None
    pending = None
    start = 0
    width = None

    def close(lineno):
        nonlocal rows, name, width
        if rows:
            if len(rows) != width:
                raise ParseError(f"block of {len(rows)} rows with {width} columns is not square", start, 1)
            blocks.append((name, rows, start))
        rows, name, width = [], None, None

    for lineno, raw in enumerate(text.splitlines(), 1):
        body, _, comment = raw.partition("#")
        if not body.strip():
            if "#" in raw:
                close(lineno)
                tokens = comment.split()
                pending = tokens[0].rstrip(":") if tokens else None
            else:
                close(lineno)
                pending = None
            continue
        row = []
        col = 0
        for tok in body.split():
            col = raw.index(tok, col) + 1
            if not _INT.match(tok):
                raise ParseError(f"entry {tok!r} is not an integer", lineno, col)
            row.append(int(tok))
            col += len(tok) - 1
        if not rows:
            name, pending, start, width = pending, None, lineno, len(row)
        elif len(row) != width:
            raise ParseError(f"row has {len(row)} entries, expected {width}", lineno, 1)
        rows.append(row)
    close(None)
    if not blocks:
        raise ParseError("no matrix found", 1, 1)
    out = {}
    for i, (nm, rws, ln) in enumerate(blocks, 1):
        key = nm or f"M{i}"
        if key in out:
            raise ParseError(f"duplicate matrix name {key!r}", ln, 1)
        out[key] = IntMatrix(rws)
    return out


def parse_matrix_file(path: str | Path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    return parse_matrix_text(text)
