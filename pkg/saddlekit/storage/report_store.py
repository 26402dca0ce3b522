"""JSON reports, residual-history CSV and bench tables.
Pure functions; headers are fixed so downstream scripts can rely on them.
"""
from __future__ import annotations
import csv
import hashlib
import logging
import os
from typing import Iterable, List, Sequence

from pydantic import BaseModel

from saddlekit.models.reports import BenchRow

logger = logging.getLogger(__name__)

RESIDUAL_HEADERS = ["iteration", "relative_residual"]
BENCH_HEADERS = [
    "grid", "n", "m", "precond", "method", "iters", "inner_iters",
    "setup_seconds", "solve_seconds", "converged", "final_relative_residual", "error",
]


def _ensure_parent(path: str | os.PathLike) -> None:
    parent = os.path.dirname(os.fspath(path))
    if parent:
        os.makedirs(parent, exist_ok=True)


def write_json(path: str | os.PathLike, report: BaseModel) -> None:
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8") as f:
        f.write(report.model_dump_json(indent=2))
        f.write("\n")
    logger.info("[Report] wrote %s", path)


def write_residual_csv(path: str | os.PathLike, history: Sequence[float]) -> None:
    _ensure_parent(path)
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(RESIDUAL_HEADERS)
        for i, value in enumerate(history):
            w.writerow([i, repr(float(value))])


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_bench_csv(path: str | os.PathLike, rows: Iterable[BenchRow]) -> None:
    _ensure_parent(path)
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(BENCH_HEADERS)
        for row in rows:
            data = row.model_dump()
            w.writerow([_cell(data[h]) for h in BENCH_HEADERS])
    logger.info("[Bench] wrote %s", path)


def format_bench_table(rows: List[BenchRow]) -> str:
    """Plain-text table: grid, n, m, then Iters / setup / solve per cell."""
    head = f"{'grid':>5} {'n':>7} {'m':>7} {'precond':>8} {'method':>10} {'iters':>7} {'inner':>8} {'setup s':>9} {'solve s':>9}  status"
    lines = [head, "-" * len(head)]
    for r in rows:
        def num(v, fmt):
            return format(v, fmt) if v is not None else "-"
        status = "ok" if r.converged else (r.error or "not converged")
        lines.append(
            f"{r.grid:>5} {r.n:>7} {r.m:>7} {r.precond:>8} {r.method:>10} {num(r.iters, 'd'):>7} "
            f"{num(r.inner_iters, 'd'):>8} {num(r.setup_seconds, '.3f'):>9} {num(r.solve_seconds, '.3f'):>9}  {status}"
        )
    return "\n".join(lines)


def sha256_file(path: str | os.PathLike) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


__all__ = [
    "RESIDUAL_HEADERS", "BENCH_HEADERS", "write_json", "write_residual_csv", "write_bench_csv",
    "format_bench_table", "sha256_file",
]
