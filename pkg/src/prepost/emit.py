"""CSV/JSON writers with a fixed float format.

Floats are written with 12 significant digits so that repeated runs produce
byte-identical files.
"""

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .errors import EmptyRecords, IoError

SIG_DIGITS = 12


def fmt_float(x):
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return repr(x)
    return format(x, f".{SIG_DIGITS}g")


def _round(obj):
    """Recursively round floats to 12 significant digits; numpy scalars become Python scalars."""
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _round(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if not math.isfinite(x) else float(fmt_float(x))
    return obj


def to_json_text(obj):
    return json.dumps(_round(obj), indent=2) + "\n"


def to_csv_text(records):
    buf = io.StringIO()
    fields = list(records[0])
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for rec in records:
        writer.writerow([fmt_float(rec[f]) if isinstance(rec[f], (float, np.floating)) else rec[f] for f in fields])
    return buf.getvalue()


def emit_results(records, fmt, path):
    """Write records as CSV (header from the first record's keys) or JSON.

    ``records`` is a list of dicts; a single dict is written as one JSON
    object (or a one-row CSV).
    """
    single = isinstance(records, dict)
    rows = [records] if single else list(records)
    if not rows:
        raise EmptyRecords("nothing to write")
    if fmt == "csv":
        text = to_csv_text(rows)
    elif fmt == "json":
        text = to_json_text(records if single else rows)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
