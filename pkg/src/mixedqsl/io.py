"""JSON matrix files and schedule files.

A matrix file holds one object::

    {"dim": 2, "kind": "density", "matrix": [[[0.8, 0.0], [0.0, 0.0]],
                                              [[0.0, 0.0], [0.2, 0.0]]]}

Entries are ``[re, im]`` pairs. Floats are written with 17 significant
digits, so a write followed by a read reproduces every entry exactly.

A schedule file is either ``{"kind": "constant", "hamiltonian": "h.json"}``
or ``{"kind": "piecewise", "knots": [{"t": 0.0, "hamiltonian": "h0.json"}, ...]}``;
relative paths resolve against the schedule file's directory.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .dynamics import HamiltonianSchedule
from .errors import QSLError
from .operator_core import hermitize
from .states import DensityOperator, validate_density

KINDS = ("density", "hermitian")


class MatrixFileError(QSLError):
    """Malformed matrix or schedule file; the message names the file and line."""


def _line_of(text: str, needle: str) -> int:
    pos = text.find(needle)
    return text.count("\n", 0, pos) + 1 if pos >= 0 else 1


def _load_json(path: Path) -> tuple[dict, str]:
    text = Path(path).read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MatrixFileError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise MatrixFileError(f"{path}:1: expected a JSON object")
    return obj, text


def _key_line(text: str, key: str) -> int:
    return _line_of(text, '"' + key + '"')


def _row_line(text: str, row: int) -> int:
    """Line on which row ``row`` of the matrix array opens (bracket counting)."""
    start = text.find('"matrix"')
    if start < 0:
        return 1
    depth, seen = 0, -1
    for pos in range(start, len(text)):
        ch = text[pos]
        if ch == "[":
            depth += 1
            if depth == 2:
                seen += 1
                if seen == row:
                    return text.count("\n", 0, pos) + 1
        elif ch == "]":
            depth -= 1
            if depth == 0:
                break
    return _key_line(text, "matrix")


def parse_matrix(obj: dict, text: str = "", source: str = "<matrix>") -> tuple[str, np.ndarray]:
    """Convert a decoded matrix object into ``(kind, ndarray)`` without validation."""
    for key in ("dim", "kind", "matrix"):
        if key not in obj:
            raise MatrixFileError(f"{source}:1: missing key {key!r}")
    kind = obj["kind"]
    if kind not in KINDS:
        raise MatrixFileError(f"{source}:{_key_line(text, 'kind')}: kind must be one of {KINDS}, got {kind!r}")
    dim = obj["dim"]
    if not isinstance(dim, int) or dim < 1:
        raise MatrixFileError(f"{source}:{_key_line(text, 'dim')}: dim must be a positive integer")
    rows = obj["matrix"]
    if not isinstance(rows, list) or len(rows) != dim:
        raise MatrixFileError(f"{source}:{_key_line(text, 'matrix')}: matrix must have {dim} rows")
    M = np.empty((dim, dim), dtype=complex)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != dim:
            raise MatrixFileError(f"{source}:{_row_line(text, i)}: row {i} must have {dim} entries")
        for j, entry in enumerate(row):
            ok = (
                isinstance(entry, list)
                and len(entry) == 2
                and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in entry)
            )
            if not ok:
                raise MatrixFileError(
                    f"{source}:{_row_line(text, i)}: entry ({i}, {j}) must be a [re, im] pair of numbers"
                )
            M[i, j] = complex(entry[0], entry[1])
    return kind, M


def read_matrix(path) -> tuple[str, np.ndarray]:
    obj, text = _load_json(Path(path))
    return parse_matrix(obj, text, str(path))


def _validated(path, kind: str, M: np.ndarray):
    try:
        return validate_density(M) if kind == "density" else hermitize(M)
    except QSLError as exc:
        raise type(exc)(f"{path}: {exc}") from None


def read_density(path) -> DensityOperator:
    kind, M = read_matrix(path)
    if kind != "density":
        raise MatrixFileError(f"{path}:1: expected kind 'density', got {kind!r}")
    return _validated(path, kind, M)


def read_hermitian(path) -> np.ndarray:
    kind, M = read_matrix(path)
    return _validated(path, "hermitian", M)



def format_matrix(M, kind: str = "hermitian") -> str:
    """Serialize with one row per line and 17 significant digits per float."""
    M = np.asarray(M, dtype=complex)
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    rows = []
    for row in M:
        entries = ", ".join(f"[{float(z.real):.17g}, {float(z.imag):.17g}]" for z in row)
        rows.append(f"    [{entries}]")
    body = ",\n".join(rows)
    return f'{{"dim": {M.shape[0]}, "kind": "{kind}", "matrix": [\n{body}\n]}}\n'


def write_matrix(path, M, kind: str = "hermitian") -> None:
    Path(path).write_text(format_matrix(M, kind))


def matrix_to_pairs(M) -> list:
    M = np.asarray(M, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def read_schedule(path) -> HamiltonianSchedule:
    path = Path(path)
    obj, text = _load_json(path)
    base = path.parent
    kind = obj.get("kind")
    if kind == "constant":
        if "hamiltonian" not in obj:
            raise MatrixFileError(f"{path}:1: constant schedule needs a 'hamiltonian' path")
        return HamiltonianSchedule.constant(read_hermitian(base / obj["hamiltonian"]))
    if kind == "piecewise":
        knots = obj.get("knots")
        if not isinstance(knots, list) or not knots:
            raise MatrixFileError(f"{path}:{_key_line(text, 'knots')}: piecewise schedule needs knots")
        ts, hs = [], []
        for k, knot in enumerate(knots):
            if not isinstance(knot, dict) or "t" not in knot or "hamiltonian" not in knot:
                raise MatrixFileError(f"{path}:{_key_line(text, 'knots')}: knot {k} needs 't' and 'hamiltonian'")
            ts.append(float(knot["t"]))
            hs.append(read_hermitian(base / knot["hamiltonian"]))
        try:
            return HamiltonianSchedule.piecewise(ts, hs)
        except ValueError as exc:
            raise MatrixFileError(f"{path}: {exc}") from None
    raise MatrixFileError(f"{path}:{_key_line(text, 'kind')}: schedule kind must be 'constant' or 'piecewise'")
