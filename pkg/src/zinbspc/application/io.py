"""CSV ingestion of count series."""

from __future__ import annotations

import csv
import io
import os
from typing import TextIO

from ..errors import NegativeCountError, ParseError


def _parse_count(text: str, line: int) -> int:
    text = text.strip()
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"not a number: {text!r}", line) from None
    if value != int(value):
        raise ParseError(f"not an integer count: {text!r}", line)
    if value < 0:
        raise NegativeCountError(f"negative count: {text!r}", line)
    return int(value)


def _looks_numeric(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def read_counts(stream: TextIO, column: str | int | None = None) -> list[int]:
    """Counts from one CSV column, in file order.

    ``column`` is a header name or a 0-based index (default: first column).
    A first row whose selected cell is not numeric is taken as the header.
    Blank lines are skipped.
    """
    rows = [(num, row) for num, row in enumerate(csv.reader(stream), start=1) if any(c.strip() for c in row)]
    if not rows:
        return []
    first_line, first = rows[0]
    index = column if isinstance(column, int) else 0
    has_header = False
    if isinstance(column, str) and not column.isdigit():
        names = [c.strip() for c in first]
        if column not in names:
            raise ParseError(f"column {column!r} not found in header {names}", first_line)
        index, has_header = names.index(column), True
    elif isinstance(column, str):
        index = int(column)
    if not has_header:
        has_header = index < len(first) and not _looks_numeric(first[index].strip())
    counts = []
    for num, row in rows[1:] if has_header else rows:
        if index >= len(row):
            raise ParseError(f"missing column {index}", num)
        counts.append(_parse_count(row[index], num))
    return counts


def ingest_counts(path: str | os.PathLike, column: str | int | None = None) -> list[int]:
    with open(path, newline="", encoding="utf-8") as fh:
        return read_counts(fh, column)


def parse_counts_text(text: str, column: str | int | None = None) -> list[int]:
    return read_counts(io.StringIO(text), column)
