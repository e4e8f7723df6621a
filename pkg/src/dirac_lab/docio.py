"""JSON documents exchanged by the command line.

Top level is ``{"kind", "m1", "m2", "data"}``.  For the matrix kinds
(``schur``, ``potential``, ``taylor``, ``snode``) ``data`` is an array of
matrices, a matrix is an array of rows and an entry is ``[re, im]``.  The
``snode`` data are ``[A, S, Pi]``; a ``report`` carries an object.

Output is canonical: fixed key order, floats with 17 significant digits,
negative zero written as zero.  Parsing a document and writing it again
reproduces the same bytes.
"""
from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .jalgebra import Signature
from .potential import DiracPotential, SchurSequence
from .snode import SNode
from .taylor import TaylorData

MATRIX_KINDS = ("schur", "potential", "taylor", "snode")
KINDS = MATRIX_KINDS + ("report",)


def _format_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValidationError(f"cannot serialize non-finite value {x}")
    if x == 0:
        return "0"
    return format(x, ".17g")


def _depth(value) -> int:
    if isinstance(value, list):
        return 1 + max((_depth(v) for v in value), default=0)
    return 0


def _has_dict(value) -> bool:
    if isinstance(value, dict):
        return True
    if isinstance(value, list):
        return any(_has_dict(v) for v in value)
    return False


def _emit(value, indent: int) -> str:
    pad = "  " * indent
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f'{pad}  {json.dumps(str(k))}: {_emit(v, indent + 1)}' for k, v in value.items()]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(value, list):
        if not value:
            return "[]"
        # a matrix (rows of [re, im]) or anything smaller stays on one line
        if _depth(value) <= 3 and not _has_dict(value):
            return "[" + ", ".join(_emit(v, 0) for v in value) + "]"
        items = [f"{pad}  {_emit(v, indent + 1)}" for v in value]
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    if isinstance(value, bool) or value is None:
        return json.dumps(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return _format_float(float(value))
    if isinstance(value, (complex, np.complexfloating)):
        return _emit([float(value.real), float(value.imag)], indent)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, np.ndarray):
        return _emit(to_plain(value), indent)
    raise ValidationError(f"cannot serialize {type(value).__name__}")


def to_plain(value):
    """Arrays and complex numbers to nested lists with ``[re, im]`` leaves."""
    if isinstance(value, np.ndarray):
        if np.iscomplexobj(value):
            return [to_plain(v) for v in value] if value.ndim else [float(value.real), float(value.imag)]
        return value.tolist()
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, dict):
        return {k: to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    return value


def dumps(doc: dict) -> str:
    return _emit(doc, 0) + "\n"


def make_document(kind: str, sig: Signature, data) -> dict:
    if kind not in KINDS:
        raise ValidationError(f"unknown document kind {kind!r}")
    if kind in MATRIX_KINDS:
        # real input still gets [re, im] entries
        data = [np.asarray(m, dtype=complex) for m in data]
    return {"kind": kind, "m1": sig.m1, "m2": sig.m2, "data": to_plain(data)}


def schur_document(schur: SchurSequence) -> dict:
    return make_document("schur", schur.sig, schur.rho)


def potential_document(pot: DiracPotential) -> dict:
    return make_document("potential", pot.sig, pot.C)


def taylor_document(data: TaylorData) -> dict:
    return make_document("taylor", data.sig, data.phi)


def snode_document(node: SNode) -> dict:
    return make_document("snode", node.sig, [node.A, node.S, node.Pi])


def report_document(sig: Signature, report: dict) -> dict:
    return make_document("report", sig, report)


# ---------------------------------------------------------------------------
# parsing


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _parse_matrix(mat, where: str) -> np.ndarray:
    if not isinstance(mat, list) or not mat or not all(isinstance(row, list) for row in mat):
        raise ValidationError(f"{where}: a matrix must be a non-empty array of rows")
    width = len(mat[0])
    out = np.empty((len(mat), width), dtype=complex)
    for i, row in enumerate(mat):
        if len(row) != width or width == 0:
            raise ValidationError(f"{where}: rows have inconsistent or zero length")
        for k, entry in enumerate(row):
            if not (isinstance(entry, list) and len(entry) == 2 and all(_is_number(v) for v in entry)):
                raise ValidationError(f"{where}[{i}][{k}]: an entry must be [re, im]")
            out[i, k] = complex(entry[0], entry[1])
    if not np.all(np.isfinite(out)):
        raise ValidationError(f"{where}: non-finite entries")
    return out


def parse_document(doc) -> dict:
    """Structural checks; returns the document with ``sig`` and parsed
    matrices (a list of arrays) under ``matrices`` for the matrix kinds."""
    if not isinstance(doc, dict):
        raise ValidationError("document must be a JSON object")
    missing = {"kind", "m1", "m2", "data"} - set(doc)
    if missing:
        raise ValidationError(f"document is missing fields: {sorted(missing)}")
    kind = doc["kind"]
    if kind not in KINDS:
        raise ValidationError(f"unknown document kind {kind!r}")
    for name in ("m1", "m2"):
        if not isinstance(doc[name], int) or isinstance(doc[name], bool):
            raise ValidationError(f"{name} must be an integer")
    sig = Signature(doc["m1"], doc["m2"])
    out = {"kind": kind, "sig": sig, "data": doc["data"]}
    if kind in MATRIX_KINDS:
        data = doc["data"]
        if not isinstance(data, list) or not data:
            raise ValidationError("data must be a non-empty array of matrices")
        out["matrices"] = [_parse_matrix(m, f"data[{i}]") for i, m in enumerate(data)]
    return out


def loads(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON: {exc}") from exc
    return parse_document(doc)


def read_document(path: str | Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    return loads(text)


def _stack(parsed: dict, shape: tuple[int, int], kind: str) -> np.ndarray:
    mats = parsed["matrices"]
    for i, m in enumerate(mats):
        if m.shape != shape:
            raise ValidationError(f"{kind} data[{i}] has shape {m.shape}, expected {shape}")
    return np.array(mats)


def as_schur(parsed: dict) -> SchurSequence:
    sig = parsed["sig"]
    return SchurSequence(sig, _stack(parsed, (sig.m1, sig.m2), "schur"))


def as_potential(parsed: dict, tol: float | None = None) -> DiracPotential:
    sig = parsed["sig"]
    return DiracPotential(sig, _stack(parsed, (sig.m, sig.m), "potential"), tol)


def as_taylor(parsed: dict) -> TaylorData:
    sig = parsed["sig"]
    return TaylorData(sig, _stack(parsed, (sig.m2, sig.m1), "taylor"))


def write_text(text: str, path: str | Path | None) -> None:
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise ValidationError(f"cannot write {path}: {exc}") from exc
