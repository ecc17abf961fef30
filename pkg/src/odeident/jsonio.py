"""Deterministic JSON and CSV emission.

Reports must be byte-identical across runs with the same inputs, so floats
are always rendered with ``format(x, '.17g')`` (shortest 17-significant-
digit form, lossless for doubles), keys are sorted, and non-finite floats
become null (callers carry an explicit flag wherever infinity is
meaningful).
"""

from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

from .errors import InvalidInputError


def format_float(x):
    """Canonical text for one float."""
    x = float(x)
    if not math.isfinite(x):
        return "null"
    if x == 0.0:
        x = 0.0  # normalize -0.0
    return format(x, ".17g")


def _serialize(obj, out, indent, level):
    pad = " " * (indent * level)
    pad_in = " " * (indent * (level + 1))
    if obj is None:
        out.write("null")
    elif isinstance(obj, bool) or isinstance(obj, np.bool_):
        out.write("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.write(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.write(format_float(obj))
    elif isinstance(obj, str):
        out.write(json.dumps(obj, ensure_ascii=True))
    elif isinstance(obj, np.ndarray):
        _serialize(obj.tolist(), out, indent, level)
    elif isinstance(obj, dict):
        keys = list(obj.keys())
        if any(not isinstance(k, str) for k in keys):
            raise InvalidInputError("JSON object keys must be strings")
        if not keys:
            out.write("{}")
            return
        out.write("{\n")
        for i, k in enumerate(sorted(keys)):
            out.write(pad_in)
            out.write(json.dumps(k, ensure_ascii=True))
            out.write(": ")
            _serialize(obj[k], out, indent, level + 1)
            out.write(",\n" if i + 1 < len(keys) else "\n")
        out.write(pad + "}")
    elif isinstance(obj, (list, tuple)):
        items = list(obj)
        if not items:
            out.write("[]")
            return
        out.write("[\n")
        for i, v in enumerate(items):
            out.write(pad_in)
            _serialize(v, out, indent, level + 1)
            out.write(",\n" if i + 1 < len(items) else "\n")
        out.write(pad + "]")
    else:
        raise InvalidInputError(
            f"cannot serialize {type(obj).__name__} deterministically")


def dumps(obj, indent=2):
    """Serialize to canonical JSON text (sorted keys, 17-digit floats)."""
    out = io.StringIO()
    _serialize(obj, out, indent, 0)
    out.write("\n")
    return out.getvalue()


def csv_text(header, rows):
    """CSV text with canonical float formatting.

    ``rows`` may contain floats (formatted canonically), ints, bools, or
    strings; None becomes the empty field.
    """
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        rendered = []
        for v in row:
            if v is None:
                rendered.append("")
            elif isinstance(v, bool):
                rendered.append("true" if v else "false")
            elif isinstance(v, (float, np.floating)):
                rendered.append(format_float(v))
            else:
                rendered.append(v)
        writer.writerow(rendered)
    return out.getvalue()
