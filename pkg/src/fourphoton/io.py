"""CSV/JSON writers with stable formatting, so identical runs give identical bytes."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .exact import Surd

SIG_DIGITS = 12
SAMPLE_COLUMNS = ("angle_or_outcome", "value", "count", "std_error")


def fmt_float(x: float) -> str:
    return f"{float(x) + 0.0:.{SIG_DIGITS}g}"  # + 0.0 folds -0.0


def fmt_fraction(q: Fraction) -> str:
    """``"num/den"``; integers drop the ``/1``."""
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def fmt_surd(x: Surd) -> str:
    return fmt_fraction(x.a) if x.is_rational else f"{fmt_fraction(x.a)} + {fmt_fraction(x.b)}*sqrt2"


def to_jsonable(obj):
    """Recursively convert numbers to stable JSON values.

    Floats are rounded to 12 significant digits, fractions become
    ``"num/den"`` strings and surds ``"a + b*sqrt2"``.
    """
    if isinstance(obj, Mapping):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return fmt_fraction(obj)
    if isinstance(obj, Surd):
        return fmt_surd(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return str(x)
        return float(fmt_float(x))
    if isinstance(obj, complex):
        return {"re": to_jsonable(obj.real), "im": to_jsonable(obj.imag)}
    return obj


def dumps_json(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, Fraction):
        return fmt_fraction(v)
    if isinstance(v, Surd):
        return fmt_surd(v)
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    return str(v)


def dumps_csv(header: Sequence[str], rows: Iterable[Mapping]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(row.get(col)) for col in header])
    return buf.getvalue()


def write_text(path: Path, text: str) -> str:
    """Write UTF-8 text and return its sha256 hex digest."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        data = text.encode("utf-8")
        path.write_bytes(data)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return hashlib.sha256(data).hexdigest()


def file_digest(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
