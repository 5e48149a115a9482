import csv
import io
import math
import os
import tempfile
import contextlib
from pathlib import Path
from typing import Dict, Iterable, Optional, Sequence

import click
import numpy as np

from .errors import ParameterError


def format_value(value) -> str:
    """CSV cell text: integers as-is, reals with 17 significant digits."""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        x = float(value)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    return str(value)


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def series_csv(series: Dict[str, np.ndarray], columns: Optional[Sequence[str]] = None) -> str:
    """Columns of equal length, in ``columns`` order (default: insertion order)."""
    names = list(columns) if columns is not None else list(series)
    if not names:
        raise ParameterError("nothing to write")
    cols = [np.asarray(series[name]) for name in names]
    lengths = {len(c) for c in cols}
    if len(lengths) != 1:
        raise ParameterError(f"columns differ in length: {dict(zip(names, map(len, cols)))}")
    return csv_text(names, zip(*cols))


@contextlib.contextmanager
def atomic_output(path):
    """Yield a temporary file next to ``path``; it replaces ``path`` only on success.

    Args:
        path: Destination file

    Yields:
        Path object for the temporary file
    """
    target = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=target.parent or ".")
    os.close(fd)
    try:
        yield Path(tmp)
        os.replace(tmp, target)
    finally:
        if os.path.exists(tmp):
            try:
                os.unlink(tmp)
            except OSError:
                pass


def emit_csv(text: str, out: Optional[str] = None):
    """CSV to ``out`` (atomically) or to stdout."""
    if out is None:
        click.echo(text, nl=False)
        return
    with atomic_output(out) as tmp:
        with open(tmp, "w", newline="") as f:
            f.write(text)
