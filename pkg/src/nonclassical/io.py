"""JSON density matrices and CSV tables with stable formatting."""
from __future__ import annotations

import csv
import io
import json
import math
from typing import Iterable, Mapping, Sequence, TextIO

import numpy as np

from .errors import MalformedInputError
from .fock import DensityMatrix

SIG_DIGITS = 12


def density_to_dict(rho: DensityMatrix) -> dict:
    """``{"dim": D, "entries": [[re, im], ...]}`` in row-major order."""
    e = rho.entries
    return {
        "dim": int(e.shape[0]),
        "entries": [[float(z.real), float(z.imag)] for z in e.ravel()],
    }


def density_from_dict(obj) -> DensityMatrix:
    if not isinstance(obj, Mapping) or "dim" not in obj or "entries" not in obj:
        raise MalformedInputError("density matrix JSON needs 'dim' and 'entries'")
    dim = obj["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise MalformedInputError(f"'dim' must be a positive integer, got {dim!r}")
    entries = obj["entries"]
    if not isinstance(entries, list) or len(entries) != dim * dim:
        raise MalformedInputError(f"'entries' must hold dim^2 = {dim * dim} [re, im] pairs")
    try:
        arr = np.array(entries, dtype=float)
    except (TypeError, ValueError) as exc:
        raise MalformedInputError(f"non-numeric entry: {exc}") from None
    if arr.shape != (dim * dim, 2):
        raise MalformedInputError("each entry must be a [re, im] pair")
    return DensityMatrix((arr[:, 0] + 1j * arr[:, 1]).reshape(dim, dim))


def dumps_density(rho: DensityMatrix) -> str:
    # repr-precision floats so parse -> serialize -> parse is lossless
    return json.dumps(density_to_dict(rho))


def loads_density(text: str) -> DensityMatrix:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedInputError(f"invalid JSON: {exc}") from None
    return density_from_dict(obj)


def read_density(path: str) -> DensityMatrix:
    with open(path, encoding="utf-8") as fh:
        return loads_density(fh.read())


def write_density(rho: DensityMatrix, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_density(rho) + "\n")


def fmt(value) -> str:
    """CSV cell text; floats get 12 significant digits."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        out = f"{v:.{SIG_DIGITS}g}"
        return "0" if out == "-0" else out
    return str(value)


def write_csv(rows: Iterable[Mapping], columns: Sequence[str], stream: TextIO) -> None:
    """Header plus one line per row, columns in the given order, ``\\n`` endings."""
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(row.get(c, "")) for c in columns])


def csv_text(rows: Iterable[Mapping], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    write_csv(rows, columns, buf)
    return buf.getvalue()


def _jsonable(value):
    if isinstance(value, (complex, np.complexfloating)):
        return [_jsonable(value.real), _jsonable(value.imag)]
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return None if math.isnan(v) or math.isinf(v) else v
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, Mapping):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def json_text(payload) -> str:
    """Deterministic JSON (NaN becomes null, complex becomes ``[re, im]``)."""
    return json.dumps(_jsonable(payload), indent=2, sort_keys=False) + "\n"
