"""Matrix Market coordinate I/O plus plain-text vectors.

Matrices: `coordinate real general|symmetric` on input (symmetric files are expanded,
the diagonal is not duplicated), `coordinate real general` on output with 1-based
indices in row-major order and 17 significant digits. Reading is hand-written so that
parse errors carry line numbers; writing goes through `scipy.io.mmwrite`.

Vectors: one value per line; Matrix Market `array real general` with a single
column is accepted on input (IFISS exports).
"""
from __future__ import annotations
import logging
import math
import os
from typing import BinaryIO, Iterator

import numpy as np
import scipy.io

from saddlekit.errors import MatrixMarketParseError
from saddlekit.services.sparse_core import SparseMatrix

logger = logging.getLogger(__name__)

BANNER = "%%MatrixMarket"


def _lines(source: BinaryIO) -> Iterator[tuple[int, str]]:
    raw = source.read()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise MatrixMarketParseError("not_text", None, str(e)) from e
    for lineno, line in enumerate(text.splitlines(), start=1):
        yield lineno, line.strip()


def _data_lines(lines: Iterator[tuple[int, str]]) -> Iterator[tuple[int, str]]:
    for lineno, line in lines:
        if not line or line.startswith("%"):
            continue
        yield lineno, line


def _parse_header(lineno: int, line: str) -> tuple[str, str, str]:
    tokens = line.split()
    if len(tokens) != 5 or tokens[0].lower() != BANNER.lower() or tokens[1].lower() != "matrix":
        raise MatrixMarketParseError("malformed_header", lineno, line[:80])
    fmt, fld, symmetry = (t.lower() for t in tokens[2:])
    if fld != "real":
        raise MatrixMarketParseError("unsupported_field", lineno, f"field '{fld}' (only 'real' is supported)")
    return fmt, fld, symmetry


def _float(lineno: int, token: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise MatrixMarketParseError("bad_value", lineno, repr(token)) from None
    if not math.isfinite(value):
        raise MatrixMarketParseError("non_finite_value", lineno, repr(token))
    return value


def _int(lineno: int, token: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise MatrixMarketParseError("bad_integer", lineno, repr(token)) from None


def read_matrix_market(source: BinaryIO) -> SparseMatrix:
    lines = _lines(source)
    try:
        lineno, first = next(lines)
    except StopIteration:
        raise MatrixMarketParseError("empty_file", 1) from None
    fmt, _, symmetry = _parse_header(lineno, first)
    if fmt != "coordinate":
        raise MatrixMarketParseError("unsupported_format", lineno, f"format '{fmt}' (matrices must be 'coordinate')")
    if symmetry not in ("general", "symmetric"):
        raise MatrixMarketParseError("unsupported_symmetry", lineno, symmetry)

    body = _data_lines(lines)
    try:
        lineno, size_line = next(body)
    except StopIteration:
        raise MatrixMarketParseError("missing_size_line", lineno + 1) from None
    parts = size_line.split()
    if len(parts) != 3:
        raise MatrixMarketParseError("malformed_size_line", lineno, size_line)
    nrows, ncols, nnz = (_int(lineno, t) for t in parts)
    if nrows < 0 or ncols < 0 or nnz < 0:
        raise MatrixMarketParseError("malformed_size_line", lineno, size_line)
    if symmetry == "symmetric" and nrows != ncols:
        raise MatrixMarketParseError("symmetric_not_square", lineno, f"{nrows}x{ncols}")

    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    seen: dict[tuple[int, int], int] = {}

    def _put(i: int, j: int, v: float, at: int):
        if (i, j) in seen:
            raise MatrixMarketParseError("duplicate_entry", at, f"({i + 1}, {j + 1}) first seen on line {seen[(i, j)]}")
        seen[(i, j)] = at
        rows.append(i)
        cols.append(j)
        vals.append(v)

    count = 0
    last = lineno
    for lineno, line in body:
        last = lineno
        if count == nnz:
            raise MatrixMarketParseError("trailing_data", lineno, line[:80])
        tokens = line.split()
        if len(tokens) != 3:
            raise MatrixMarketParseError("malformed_entry", lineno, line[:80])
        i, j = _int(lineno, tokens[0]), _int(lineno, tokens[1])
        if not (1 <= i <= nrows and 1 <= j <= ncols):
            raise MatrixMarketParseError("index_out_of_range", lineno, f"({i}, {j}) outside {nrows}x{ncols}")
        v = _float(lineno, tokens[2])
        _put(i - 1, j - 1, v, lineno)
        if symmetry == "symmetric" and i != j:
            _put(j - 1, i - 1, v, lineno)
        count += 1
    if count != nnz:
        raise MatrixMarketParseError("truncated", last + 1, f"expected {nnz} entries, found {count}")
    logger.debug("[MatrixMarket] read %dx%d (%s, %d stored)", nrows, ncols, symmetry, len(vals))
    return SparseMatrix.from_triplets(rows, cols, vals, (nrows, ncols))


def write_matrix_market(M: SparseMatrix, sink: BinaryIO) -> None:
    scipy.io.mmwrite(sink, M.csr.tocoo(), field="real", symmetry="general", precision=17)


def read_vector(source: BinaryIO) -> np.ndarray:
    lines = _data_lines_keep_banner(_lines(source))
    values: list[float] = []
    try:
        lineno, first = next(lines)
    except StopIteration:
        return np.zeros(0)
    if first.startswith(BANNER):
        fmt, _, symmetry = _parse_header(lineno, first)
        if fmt != "array" or symmetry != "general":
            raise MatrixMarketParseError("unsupported_vector_format", lineno, f"{fmt} {symmetry}")
        body = (item for item in lines if not item[1].startswith("%"))
        try:
            lineno, size_line = next(body)
        except StopIteration:
            raise MatrixMarketParseError("missing_size_line", lineno + 1) from None
        parts = size_line.split()
        if len(parts) != 2 or _int(lineno, parts[1]) != 1:
            raise MatrixMarketParseError("not_a_column_vector", lineno, size_line)
        expected = _int(lineno, parts[0])
        last = lineno
        for lineno, line in body:
            last = lineno
            values.append(_float(lineno, line))
        if len(values) != expected:
            raise MatrixMarketParseError("truncated", last + 1, f"expected {expected} values, found {len(values)}")
        return np.asarray(values, dtype=np.float64)
    values.append(_float(lineno, first))
    for lineno, line in lines:
        if line.startswith("%"):
            continue
        values.append(_float(lineno, line))
    return np.asarray(values, dtype=np.float64)


def _data_lines_keep_banner(lines: Iterator[tuple[int, str]]) -> Iterator[tuple[int, str]]:
    for lineno, line in lines:
        if not line or line.startswith("#"):
            continue
        if line.startswith("%") and not line.startswith(BANNER):
            continue
        yield lineno, line


def write_vector(x, sink: BinaryIO) -> None:
    vec = np.asarray(x, dtype=np.float64).ravel()
    sink.write("".join(f"{float(v):.17g}\n" for v in vec).encode("ascii"))


# ---------------- path helpers ----------------

def load_matrix(path: str | os.PathLike) -> SparseMatrix:
    with open(path, "rb") as fh:
        return read_matrix_market(fh)


def save_matrix(path: str | os.PathLike, M: SparseMatrix) -> None:
    with open(path, "wb") as fh:
        write_matrix_market(M, fh)


def load_vector(path: str | os.PathLike) -> np.ndarray:
    with open(path, "rb") as fh:
        return read_vector(fh)


def save_vector(path: str | os.PathLike, x) -> None:
    with open(path, "wb") as fh:
        write_vector(x, fh)


__all__ = [
    "read_matrix_market", "write_matrix_market", "read_vector", "write_vector",
    "load_matrix", "save_matrix", "load_vector", "save_vector",
]
