"""Numeric CSV matrices in and out.

Writing uses ``repr`` for floats (shortest round-trip form), so a matrix
written and read back is bit-identical. Files are RFC 4180 with LF line
endings and '.' as the decimal mark.
"""

from __future__ import annotations

import csv
import io
import math
from typing import Iterable, Sequence

import numpy as np

from .errors import ParseError


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def parse_matrix(text: str, source: str | None = None) -> tuple[np.ndarray, list[str] | None]:
    """Parse CSV text into a float matrix; a non-numeric first row is taken as a header.

    Row numbers in errors are 1-based physical line numbers of the file
    (blank lines are skipped but still counted); columns are 1-based fields.
    """
    reader = csv.reader(io.StringIO(text))
    numbered = [(reader.line_num, r) for r in reader if r and any(c.strip() for c in r)]
    if not numbered:
        raise ParseError("no data rows", path=source)
    lines = [ln for ln, _ in numbered]
    rows = [r for _, r in numbered]
    header = None
    first = 0
    if not all(_is_number(c.strip()) for c in rows[0]):
        header = [c.strip() for c in rows[0]]
        first = 1
    if first >= len(rows):
        raise ParseError("header present but no data rows", path=source)
    width = len(rows[first])
    if header is not None and len(header) != width:
        raise ParseError(f"header has {len(header)} fields but data rows have {width}",
                         path=source, row=lines[0])
    data = np.empty((len(rows) - first, width), dtype=np.float64)
    for i, row in enumerate(rows[first:]):
        line = lines[i + first]
        if len(row) != width:
            raise ParseError(f"expected {width} fields, found {len(row)}", path=source, row=line)
        for j, cell in enumerate(row):
            try:
                v = float(cell.strip())
            except ValueError:
                raise ParseError(f"not a number: {cell!r}", path=source, row=line, column=j + 1) from None
            if not math.isfinite(v):
                raise ParseError(f"non-finite value {cell!r}", path=source, row=line, column=j + 1)
            data[i, j] = v
    return data, header


def read_matrix(path: str) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        data, _ = parse_matrix(fh.read(), source=str(path))
    return data


def format_float(v: float) -> str:
    return repr(float(v))


def write_rows(fh, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v for v in row])


def matrix_to_csv(m: np.ndarray, header: Sequence[str] | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header is not None:
        w.writerow(header)
    for row in np.atleast_2d(m):
        w.writerow([format_float(v) for v in row])
    return buf.getvalue()
