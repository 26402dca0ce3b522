"""Saddle point systems on disk: A.mtx, B.mtx, C.mtx, f.txt, g.txt and manifest.json."""
from __future__ import annotations
import logging
import os
from typing import Any, Literal, Optional

import numpy as np

from saddlekit.errors import ConfigError
from saddlekit.models.reports import GenerateManifest
from saddlekit.services.saddle_system import SaddlePointSystem, from_symmetric_form, make_rhs_for_ones
from saddlekit.storage.matrix_market import load_matrix, load_vector, save_matrix, save_vector
from saddlekit.storage.report_store import sha256_file, write_json

logger = logging.getLogger(__name__)

FILE_NAMES = {"A": "A.mtx", "B": "B.mtx", "C": "C.mtx", "f": "f.txt", "g": "g.txt"}
MANIFEST_NAME = "manifest.json"

# "nonsymmetric" is an alias of "paper"; both read the blocks as stored.
SignConvention = Literal["paper", "nonsymmetric", "symmetric"]


def save_system(directory: str | os.PathLike, sys: SaddlePointSystem, *, spec: dict[str, Any], seed: int) -> GenerateManifest:
    try:
        os.makedirs(directory, exist_ok=True)
        save_matrix(os.path.join(directory, FILE_NAMES["A"]), sys.A)
        save_matrix(os.path.join(directory, FILE_NAMES["B"]), sys.B)
        save_matrix(os.path.join(directory, FILE_NAMES["C"]), sys.C)
        save_vector(os.path.join(directory, FILE_NAMES["f"]), sys.f)
        save_vector(os.path.join(directory, FILE_NAMES["g"]), sys.g)
        manifest = GenerateManifest(
            spec=spec,
            seed=seed,
            n=sys.n,
            m=sys.m,
            nnz={"A": sys.A.nnz, "B": sys.B.nnz, "C": sys.C.nnz},
            checksums={name: sha256_file(os.path.join(directory, name)) for name in FILE_NAMES.values()},
        )
        write_json(os.path.join(directory, MANIFEST_NAME), manifest)
    except OSError as e:
        raise ConfigError(f"unwritable_path: {directory}: {e.strerror or e}") from e
    logger.info("[Generate] wrote n=%d m=%d system to %s", sys.n, sys.m, directory)
    return manifest


def _read(kind: str, path: str | os.PathLike, loader):
    try:
        return loader(path)
    except FileNotFoundError as e:
        raise ConfigError(f"missing_input: {kind} file {path} does not exist") from e
    except OSError as e:
        raise ConfigError(f"unreadable_input: {kind} file {path}: {e.strerror or e}") from e


def load_system(
    a: str | os.PathLike,
    b: str | os.PathLike,
    c: str | os.PathLike,
    f: Optional[str | os.PathLike] = None,
    g: Optional[str | os.PathLike] = None,
    *,
    sign_convention: SignConvention = "paper",
) -> SaddlePointSystem:
    """Load blocks; without f and g the right-hand side makes all-ones the solution.

    With `sign_convention="symmetric"` the files describe [A B^T; B D](x; y) = (f; g)
    and the (2,2) block is negated on load.
    """
    A = _read("A", a, load_matrix)
    B = _read("B", b, load_matrix)
    Cm = _read("C", c, load_matrix)
    if (f is None) != (g is None):
        raise ConfigError("incomplete_rhs: give both f and g, or neither")
    if f is None:
        fv, gv = np.zeros(A.nrows), np.zeros(B.nrows)
    else:
        fv, gv = _read("f", f, load_vector), _read("g", g, load_vector)
    if sign_convention == "symmetric":
        sys = from_symmetric_form(A, B, Cm, fv, gv)
    else:
        sys = SaddlePointSystem(A=A, B=B, C=Cm, f=fv, g=gv)
    return make_rhs_for_ones(sys) if f is None else sys


def load_system_dir(directory: str | os.PathLike, *, sign_convention: SignConvention = "paper") -> SaddlePointSystem:
    paths = {k: os.path.join(directory, v) for k, v in FILE_NAMES.items()}
    has_rhs = os.path.exists(paths["f"]) and os.path.exists(paths["g"])
    return load_system(
        paths["A"], paths["B"], paths["C"],
        paths["f"] if has_rhs else None, paths["g"] if has_rhs else None,
        sign_convention=sign_convention,
    )


__all__ = ["FILE_NAMES", "MANIFEST_NAME", "SignConvention", "save_system", "load_system", "load_system_dir"]
