import io

import numpy as np
import pytest
import scipy.sparse as sp

from saddlekit.errors import MatrixMarketParseError
from saddlekit.services.sparse_core import SparseMatrix
from saddlekit.storage.matrix_market import (
    load_matrix,
    read_matrix_market,
    read_vector,
    save_matrix,
    write_matrix_market,
    write_vector,
)


def _read(text: str) -> SparseMatrix:
    return read_matrix_market(io.BytesIO(text.encode("ascii")))


def _write(M: SparseMatrix) -> str:
    buf = io.BytesIO()
    write_matrix_market(M, buf)
    return buf.getvalue().decode("ascii")


def _body(text: str) -> list[str]:
    """Banner plus data lines, without comments."""
    lines = text.strip().splitlines()
    return lines[:1] + [ln for ln in lines[1:] if ln.strip() and not ln.startswith("%")]


def test_read_identity():
    M = _read("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n2 2 1.0\n")
    assert np.array_equal(M.to_dense(), np.eye(2))


def test_read_symmetric_expands_lower_triangle():
    M = _read(
        "%%MatrixMarket matrix coordinate real symmetric\n"
        "% lower triangle of [[4,2],[2,3]]\n"
        "2 2 3\n1 1 4\n2 1 2\n2 2 3\n"
    )
    assert M.nnz == 4
    assert np.array_equal(M.to_dense(), [[4.0, 2.0], [2.0, 3.0]])


def test_write_identity_and_empty():
    lines = _body(_write(SparseMatrix.identity(2)))
    assert lines[0].split() == ["%%MatrixMarket", "matrix", "coordinate", "real", "general"]
    assert lines[1].split() == ["2", "2", "2"]
    assert [tuple(float(t) for t in ln.split()) for ln in lines[2:]] == [(1, 1, 1), (2, 2, 1)]
    empty = _body(_write(SparseMatrix.zeros(3, 3)))
    assert [ln.split() for ln in empty[1:]] == [["3", "3", "0"]]


def test_roundtrip_is_lossless(rng):
    M = SparseMatrix.from_scipy(sp.random(50, 30, density=0.2, random_state=rng, data_rvs=rng.standard_normal))
    back = _read(_write(M))
    assert back.shape == M.shape
    assert np.array_equal(back.csr.indptr, M.csr.indptr)
    assert np.array_equal(back.csr.indices, M.csr.indices)
    assert np.array_equal(back.csr.data, M.csr.data)


def test_write_is_row_major():
    M = SparseMatrix.from_dense([[0, 5, 1], [2, 0, 0]])
    lines = _body(_write(M))[2:]
    assert [tuple(int(t) for t in ln.split()[:2]) for ln in lines] == [(1, 2), (1, 3), (2, 1)]


@pytest.mark.parametrize(
    "text, code, line",
    [
        ("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n", "unsupported_field", 1),
        ("%MatrixMarket matrix coordinate real general\n1 1 0\n", "malformed_header", 1),
        ("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n", "index_out_of_range", 3),
        ("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n1 1 2.0\n", "duplicate_entry", 4),
        ("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n", "truncated", 4),
        ("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 x\n", "bad_value", 3),
        ("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 nan\n", "non_finite_value", 3),
        ("%%MatrixMarket matrix array real general\n1 1\n1.0\n", "unsupported_format", 1),
        ("%%MatrixMarket matrix coordinate real hermitian\n1 1 0\n", "unsupported_symmetry", 1),
        ("%%MatrixMarket matrix coordinate real general\n1 1 0\n1 1 1.0\n", "trailing_data", 3),
    ],
)
def test_parse_errors_carry_code_and_line(text, code, line):
    with pytest.raises(MatrixMarketParseError) as exc:
        _read(text)
    assert exc.value.code == code
    assert exc.value.line == line
    assert f"line {line}" in str(exc.value)


def test_vectors_plain_and_array_format():
    buf = io.BytesIO()
    write_vector([1.0, -2.5, 1 / 3], buf)
    back = read_vector(io.BytesIO(buf.getvalue()))
    assert back.tolist() == [1.0, -2.5, 1 / 3]
    arr = read_vector(io.BytesIO(b"%%MatrixMarket matrix array real general\n% exported\n3 1\n1\n2\n3\n"))
    assert arr.tolist() == [1.0, 2.0, 3.0]
    with pytest.raises(MatrixMarketParseError):
        read_vector(io.BytesIO(b"%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n"))


def test_path_helpers(tmp_path):
    M = SparseMatrix.from_dense([[4, 2], [2, 3]])
    save_matrix(tmp_path / "S.mtx", M)
    assert np.array_equal(load_matrix(tmp_path / "S.mtx").to_dense(), M.to_dense())
