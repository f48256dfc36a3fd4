"""Deterministic delimited output: UTF-8 CSV, comma separated, '.' decimal
point, header line first, reals at 10 significant digits."""

from __future__ import annotations

import csv
import io
import sys
from contextlib import contextmanager
from typing import Iterable, Optional, Sequence

import numpy as np


def format_cell(value) -> str:
    """Render one cell: floats at 10 significant digits, ints verbatim,
    booleans as 1/0, None as the empty string."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".10g")
    return str(value)


@contextmanager
def _open_out(path: Optional[str]):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def write_csv(path: Optional[str], header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """Write header + rows to path, or to stdout when path is None."""
    with _open_out(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(header))
        for row in rows:
            writer.writerow([format_cell(v) for v in row])


def render_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    """Same as write_csv but returning the text, for tests and previews."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(header))
    for row in rows:
        writer.writerow([format_cell(v) for v in row])
    return buf.getvalue()
