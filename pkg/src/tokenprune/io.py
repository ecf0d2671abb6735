"""Byte-exact file formats: FMAT/FVEC binaries, CSV fallbacks, selection
documents, sweep CSVs, and PGM selection masks.

The binary layouts are deliberately trivial so any language can read them:

    FMAT: magic "FMAT" | u32 version=1 | u64 n_tokens | u64 dim | u8 dtype
          | row-major little-endian payload
    FVEC: magic "FVEC" | u32 version=1 | u64 length | u8 dtype | payload

dtype code 0 is float32, 1 is float64; 32-bit payloads are widened to
float64 in memory. All writers go through a temp file and rename, so a
crash never leaves a half-written artifact behind.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile
from typing import Iterable, Sequence

import numpy as np

from .core import FeatureMatrix, Selection, as_importance
from .errors import DomainError, FormatError, ValidationError
from .metrics import TradeoffPoint

_FMAT_MAGIC = b"FMAT"
_FVEC_MAGIC = b"FVEC"
_VERSION = 1
_FMAT_HEADER = struct.Struct("<4sIQQB")
_FVEC_HEADER = struct.Struct("<4sIQB")
_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("<f8")}
_DTYPE_CODES = {"f4": 0, "f8": 1}


def _atomic_write(path, blob: bytes) -> None:
    target = os.path.abspath(os.fspath(path))
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(target), prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(blob)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _payload(blob: bytes, header_size: int, count: int, dtype_code: int, offset_name: str) -> np.ndarray:
    if dtype_code not in _DTYPES:
        raise FormatError(f"unknown dtype code {dtype_code} at byte offset {offset_name}")
    dt = _DTYPES[dtype_code]
    expected = count * dt.itemsize
    actual = len(blob) - header_size
    if actual != expected:
        raise FormatError(
            f"payload size mismatch: expected {expected} bytes, got {actual}"
            f" (payload starts at byte offset {header_size})"
        )
    return np.frombuffer(blob, dtype=dt, offset=header_size).astype(np.float64)


def write_features(matrix: FeatureMatrix, path, dtype: str = "f8") -> None:
    """Write a feature matrix as FMAT (or CSV when the path ends in .csv)."""
    if str(path).endswith(".csv"):
        _atomic_write(path, _matrix_csv_bytes(matrix.data))
        return
    if dtype not in _DTYPE_CODES:
        raise ValidationError(f"dtype must be 'f4' or 'f8', got {dtype!r}")
    code = _DTYPE_CODES[dtype]
    header = _FMAT_HEADER.pack(_FMAT_MAGIC, _VERSION, matrix.n_tokens, matrix.dim, code)
    payload = np.ascontiguousarray(matrix.data, dtype=_DTYPES[code]).tobytes()
    _atomic_write(path, header + payload)


def read_features(path) -> FeatureMatrix:
    """Read FMAT (or CSV) into a validated, float64 FeatureMatrix."""
    if str(path).endswith(".csv"):
        return FeatureMatrix(_read_csv_array(path, ndmin=2))
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _FMAT_HEADER.size:
        raise FormatError(
            f"truncated header: need {_FMAT_HEADER.size} bytes, file ends at byte offset {len(blob)}"
        )
    magic, version, n_tokens, dim, code = _FMAT_HEADER.unpack_from(blob)
    if magic != _FMAT_MAGIC:
        raise FormatError(f"bad magic {magic!r} at byte offset 0 (expected {_FMAT_MAGIC!r})")
    if version != _VERSION:
        raise FormatError(f"unsupported version {version} at byte offset 4")
    values = _payload(blob, _FMAT_HEADER.size, n_tokens * dim, code, "24")
    return FeatureMatrix(values.reshape(n_tokens, dim))


def write_importance(scores, path, dtype: str = "f8") -> None:
    """Write an importance vector as FVEC (or CSV, one value per line)."""
    wv = as_importance(scores)
    if str(path).endswith(".csv"):
        text = "".join(f"{float(v)!r}\n" for v in wv)
        _atomic_write(path, text.encode("ascii"))
        return
    if dtype not in _DTYPE_CODES:
        raise ValidationError(f"dtype must be 'f4' or 'f8', got {dtype!r}")
    code = _DTYPE_CODES[dtype]
    header = _FVEC_HEADER.pack(_FVEC_MAGIC, _VERSION, wv.size, code)
    _atomic_write(path, header + np.ascontiguousarray(wv, dtype=_DTYPES[code]).tobytes())


def read_importance(path) -> np.ndarray:
    """Read FVEC (or CSV) into a validated float64 vector."""
    if str(path).endswith(".csv"):
        return as_importance(_read_csv_array(path, ndmin=1))
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _FVEC_HEADER.size:
        raise FormatError(
            f"truncated header: need {_FVEC_HEADER.size} bytes, file ends at byte offset {len(blob)}"
        )
    magic, version, length, code = _FVEC_HEADER.unpack_from(blob)
    if magic != _FVEC_MAGIC:
        raise FormatError(f"bad magic {magic!r} at byte offset 0 (expected {_FVEC_MAGIC!r})")
    if version != _VERSION:
        raise FormatError(f"unsupported version {version} at byte offset 4")
    return as_importance(_payload(blob, _FVEC_HEADER.size, length, code, "16"))


def _matrix_csv_bytes(data: np.ndarray) -> bytes:
    lines = [",".join(repr(float(v)) for v in row) for row in data]
    return ("\n".join(lines) + "\n").encode("ascii")


def _read_csv_array(path, ndmin: int) -> np.ndarray:
    try:
        return np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=ndmin)
    except ValueError as exc:
        raise FormatError(f"malformed CSV {path}: {exc}") from exc


def write_selection(selection: Selection, path, provenance: dict | None = None) -> None:
    """Serialize a selection as a JSON document (indices in selection order)."""
    doc: dict = {"method": selection.method}
    if selection.lam is not None:
        doc["lambda"] = selection.lam
    doc["k"] = selection.k
    doc["indices"] = list(selection.indices)
    if selection.step_scores is not None:
        doc["step_scores"] = list(selection.step_scores)
    if provenance:
        doc["provenance"] = provenance
    _atomic_write(path, (json.dumps(doc, indent=2) + "\n").encode("ascii"))


def read_selection(path) -> Selection:
    """Parse and validate a selection document.

    ``step_scores`` and ``lambda`` are optional; unknown fields are ignored
    so documents may carry provenance metadata.
    """
    with open(path, "rb") as fh:
        text = fh.read().decode("utf-8", errors="replace")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(
            f"invalid selection document: {exc.msg} at line {exc.lineno} column {exc.colno}"
        ) from exc
    if not isinstance(doc, dict):
        raise FormatError("selection document must be a JSON object")
    for field in ("method", "k", "indices"):
        if field not in doc:
            raise FormatError(f"selection document missing field {field!r}")
    indices = doc["indices"]
    if not isinstance(indices, list) or not all(
        isinstance(i, int) and not isinstance(i, bool) for i in indices
    ):
        raise FormatError("field 'indices' must be a list of integers")
    if doc["k"] != len(indices):
        raise FormatError(f"field k={doc['k']} does not match {len(indices)} indices")
    scores = doc.get("step_scores")
    if scores is not None:
        if not isinstance(scores, list) or not all(isinstance(s, (int, float)) for s in scores):
            raise FormatError("field 'step_scores' must be a list of numbers")
        scores = tuple(float(s) for s in scores)
    lam = doc.get("lambda")
    if lam is not None and not isinstance(lam, (int, float)):
        raise FormatError("field 'lambda' must be a number")
    return Selection(
        method=str(doc["method"]),
        indices=tuple(indices),
        step_scores=scores,
        lam=None if lam is None else float(lam),
    )


def write_sweep_csv(points: Sequence[TradeoffPoint], path, comments: Iterable[str] = ()) -> None:
    """Plot-ready CSV: header ``method,lambda,hopkins,retention``, one row per
    point at 9 significant digits; lambda is left empty for lambda-free
    methods. Optional comment lines (prefixed ``#``) go above the header.
    """
    if not points:
        raise DomainError("sweep CSV needs at least one point")
    lines = [f"# {c}" for c in comments]
    lines.append("method,lambda,hopkins,retention")
    for p in points:
        lam = "" if p.lam is None else f"{p.lam:.9g}"
        lines.append(f"{p.method},{lam},{p.hopkins:.9g},{p.retention:.9g}")
    _atomic_write(path, ("\n".join(lines) + "\n").encode("ascii"))


def write_mask_pgm(selection: Selection, grid_w: int, grid_h: int, path) -> None:
    """Binary PGM (P5) mask of the selection on a grid_w x grid_h token grid.

    Token i maps to cell (i mod grid_w, i div grid_w); selected cells are
    255, pruned cells 0.
    """
    if grid_w < 1 or grid_h < 1:
        raise DomainError(f"grid must be at least 1x1, got {grid_w}x{grid_h}")
    n = grid_w * grid_h
    top = max(selection.indices)
    if top >= n:
        raise DomainError(
            f"grid {grid_w}x{grid_h} holds {n} tokens but selection references index {top}"
        )
    mask = np.zeros(n, dtype=np.uint8)
    mask[list(selection.indices)] = 255
    header = f"P5\n{grid_w} {grid_h}\n255\n".encode("ascii")
    _atomic_write(path, header + mask.tobytes())
