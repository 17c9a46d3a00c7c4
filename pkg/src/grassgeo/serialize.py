"""JSON encoding of spaces, points, tangents and reports.

Real scalars are JSON numbers, complex scalars are ``[re, im]`` pairs.
Matrices are lists of rows.  Floats are written with ``repr`` precision, so
a round trip reproduces every bit.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .hermitian import COMPLEX, REAL, GrassmannPoint, HermitianSpace, TangentVector


class ParseError(ValueError):
    """Malformed input; the message names the file and field."""


def _encode_scalar(x):
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (np.integer, int)) and not isinstance(x, bool):
        return int(x)
    return float(x)


def encode(obj):
    """Recursively turn arrays and numpy scalars into JSON-ready values."""
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return np.stack([obj.real, obj.imag], axis=-1).tolist()
        return obj.tolist()
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    if isinstance(obj, (np.generic, complex, float, int)) and not isinstance(obj, bool):
        return _encode_scalar(obj.item() if isinstance(obj, np.generic) else obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(encode(obj), indent=2, sort_keys=False, allow_nan=False) + "\n"


def load_json(path, text=None):
    """Parse a JSON file, reporting the line and column of syntax errors."""
    try:
        if text is None:
            text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"{path}: cannot read file ({exc.strerror})") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _scalar(v, field, where):
    if isinstance(v, bool):
        raise ParseError(f"{where}: expected a number, got a boolean")
    if isinstance(v, (int, float)):
        if not math.isfinite(v):
            raise ParseError(f"{where}: non-finite value")
        return complex(v) if field == COMPLEX else float(v)
    if isinstance(v, list) and len(v) == 2 and all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in v):
        if field == REAL:
            if v[1] != 0:
                raise ParseError(f"{where}: complex value {v} over the real field")
            return float(v[0])
        return complex(v[0], v[1])
    raise ParseError(f"{where}: expected a number or an [re, im] pair, got {v!r}")


def decode_matrix(data, field, where, shape=None) -> np.ndarray:
    if not isinstance(data, list) or not data or not all(isinstance(r, list) for r in data):
        raise ParseError(f"{where}: expected a nonempty list of rows")
    ncol = len(data[0])
    rows = []
    for a, row in enumerate(data):
        if len(row) != ncol:
            raise ParseError(f"{where}: row {a} has length {len(row)}, expected {ncol}")
        rows.append([_scalar(v, field, f"{where}[{a}][{b}]") for b, v in enumerate(row)])
    M = np.array(rows, dtype=np.complex128 if field == COMPLEX else np.float64)
    if shape is not None and M.shape != shape:
        raise ParseError(f"{where}: expected shape {shape}, got {M.shape}")
    return M


def _field(doc, where):
    f = doc.get("field", REAL)
    if f not in (REAL, COMPLEX):
        raise ParseError(f"{where}: field 'field' must be \"R\" or \"C\", got {f!r}")
    return f


def _require(doc, key, where):
    if not isinstance(doc, dict):
        raise ParseError(f"{where}: expected a JSON object")
    if key not in doc:
        raise ParseError(f"{where}: missing field '{key}'")
    return doc[key]


def decode_space(doc, where="input") -> HermitianSpace:
    if not isinstance(doc, dict):
        raise ParseError(f"{where}: expected a JSON object")
    field = _field(doc, where)
    J = decode_matrix(_require(doc, "J", where), field, f"{where}: field 'J'")
    if J.shape[0] != J.shape[1]:
        raise ParseError(f"{where}: field 'J' must be square, got shape {J.shape}")
    if "n" in doc and doc["n"] != J.shape[0]:
        raise ParseError(f"{where}: field 'n' is {doc['n']!r} but J is {J.shape[0]} x {J.shape[0]}")
    try:
        return HermitianSpace(J, field)
    except ValueError as exc:
        raise ParseError(f"{where}: {exc}") from None


def _matrix_key(doc, key):
    if isinstance(doc, dict) and key not in doc and "matrix" in doc:
        return "matrix"
    return key


def decode_point(doc, where="input", space=None) -> GrassmannPoint:
    """A point from {"field", "J", "p"}, or from {"matrix"} with a separate space."""
    space = space or decode_space(doc, where)
    key = _matrix_key(doc, "p")
    p = decode_matrix(_require(doc, key, where), space.field, f"{where}: field '{key}'")
    try:
        return GrassmannPoint(space, p)
    except ValueError as exc:
        raise ParseError(f"{where}: field 'p': {exc}") from None


def decode_tangent(doc, point, where="input", key="tau") -> TangentVector:
    key = _matrix_key(doc, key)
    tau = decode_matrix(_require(doc, key, where), point.space.field, f"{where}: field '{key}'", point.p.shape)
    try:
        return TangentVector(point, tau)
    except ValueError as exc:
        raise ParseError(f"{where}: field '{key}': {exc}") from None


def encode_point(point: GrassmannPoint) -> dict:
    return {"field": point.space.field, "J": encode(point.space.J), "p": encode(point.p)}


def decode_gram(doc, where="input") -> np.ndarray:
    U = decode_matrix(_require(doc, "gram", where), REAL, f"{where}: field 'gram'")
    if U.shape[0] != U.shape[1]:
        raise ParseError(f"{where}: field 'gram' must be square, got shape {U.shape}")
    bad = np.argwhere(U != U.T)
    if bad.size:
        i, j = bad[0]
        raise ParseError(f"{where}: Gram matrix is not symmetric at ({i}, {j}): {U[i, j]!r} != {U[j, i]!r}")
    return U
