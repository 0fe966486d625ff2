"""Standard-form conic programs over free, nonnegative and PSD blocks.

The primal form is

    min  c.x   s.t.  A x = b,   x in K,

with K an ordered product of free(k), nonneg(k) and psd(s) blocks.  PSD blocks
are stored packed: a symmetric s x s matrix occupies s*(s+1)/2 consecutive
entries in svec order (column-stacked upper triangle) with off-diagonal
entries scaled by sqrt(2), so the packed Euclidean inner product equals the
matrix Frobenius inner product.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

SQRT2 = float(np.sqrt(2.0))

Cone = Tuple[str, int]  # ("free" | "nonneg", count) or ("psd", side)

_KINDS = ("free", "nonneg", "psd")


def cone_dim(cone: Cone) -> int:
    kind, size = cone
    if kind == "psd":
        return size * (size + 1) // 2
    return size


def svec(M: np.ndarray) -> np.ndarray:
    """Pack a symmetric matrix into svec order with sqrt(2)-scaled off-diagonals."""
    s = M.shape[0]
    out = np.empty(s * (s + 1) // 2)
    k = 0
    for j in range(s):
        for i in range(j + 1):
            out[k] = M[i, j] if i == j else SQRT2 * M[i, j]
            k += 1
    return out


def smat(v: np.ndarray, side: int) -> np.ndarray:
    """Inverse of svec."""
    M = np.empty((side, side))
    k = 0
    for j in range(side):
        for i in range(j + 1):
            if i == j:
                M[i, j] = v[k]
            else:
                M[i, j] = M[j, i] = v[k] / SQRT2
            k += 1
    return M


def svec_indices(side: int) -> tuple[np.ndarray, np.ndarray]:
    """(row, col) index arrays of the packed entries, in svec order."""
    rows, cols = [], []
    for j in range(side):
        for i in range(j + 1):
            rows.append(i)
            cols.append(j)
    return np.array(rows), np.array(cols)


@dataclass
class ConicProgram:
    """min c.x s.t. A x = b, x in the ordered cone product."""

    c: np.ndarray
    A: sp.csr_matrix
    b: np.ndarray
    cones: List[Cone]

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        if not sp.issparse(self.A):
            self.A = sp.csr_matrix(np.atleast_2d(np.asarray(self.A, dtype=float)))
        self.A = self.A.tocsr()
        for kind, size in self.cones:
            if kind not in _KINDS:
                raise ValueError(f"unknown cone kind {kind!r}")
            if size < 1:
                raise ValueError(f"cone {kind} has nonpositive size {size}")
        n = sum(cone_dim(c) for c in self.cones)
        if self.c.shape != (n,):
            raise ValueError(f"c has shape {self.c.shape}, expected ({n},)")
        if self.A.shape[1] != n:
            raise ValueError(f"A has {self.A.shape[1]} columns, cones give {n}")
        if self.A.shape[0] != self.b.shape[0]:
            raise ValueError("A row count does not match b")
        row_nnz = np.diff(self.A.indptr)
        if np.any(row_nnz == 0):
            empty = int(np.where(row_nnz == 0)[0][0])
            raise ValueError(f"equality row {empty} of A is entirely zero")

    @property
    def n_cols(self) -> int:
        return self.A.shape[1]

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]


@dataclass
class Solution:
    """Solver output; x and s follow the program's packed column layout."""

    x: np.ndarray
    y: np.ndarray
    s: np.ndarray
    status: str  # optimal | near_optimal | infeasible | unbounded | max_iter
    iterations: int
    primal_objective: float
    dual_objective: float
    primal_residual: float
    dual_residual: float
    gap: float


class SolverError(RuntimeError):
    """Typed failure raised on numerical breakdown inside the solver."""

    def __init__(self, message: str, diagnostics: Optional[dict] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


def residuals(prog: ConicProgram, sol: Solution) -> tuple[float, float, float]:
    """(primal_res, dual_res, gap) recomputed from scratch.

    primal_res = |A x - b|_2, dual_res = |A^T y + s - c|_2 and
    gap = c.x - b.y, independent of whatever the solver reported.
    """
    primal = float(np.linalg.norm(prog.A @ sol.x - prog.b))
    dual = float(np.linalg.norm(prog.A.T @ sol.y + sol.s - prog.c))
    gap = float(prog.c @ sol.x - prog.b @ sol.y)
    return primal, dual, gap


# -- debug dump -----------------------------------------------------------------
#
# Text format: a header line "n_cols n_rows", one line per cone block
# ("free k" / "nonneg k" / "psd s"), then "row col value" triplets where
# rows 0..n_rows-1 address A, row == n_rows addresses c (col = index), and
# col == n_cols addresses b (row = index).


def dump_program(prog: ConicProgram, path: str) -> None:
    lines = [f"{prog.n_cols} {prog.n_rows}"]
    for kind, size in prog.cones:
        lines.append(f"{kind} {size}")
    coo = prog.A.tocoo()
    for i, j, v in zip(coo.row, coo.col, coo.data):
        lines.append(f"{i} {j} {v!r}")
    for j in np.nonzero(prog.c)[0]:
        lines.append(f"{prog.n_rows} {j} {prog.c[j]!r}")
    for i in np.nonzero(prog.b)[0]:
        lines.append(f"{i} {prog.n_cols} {prog.b[i]!r}")
    with open(path, "w") as handle:
        handle.write("\n".join(lines) + "\n")


def load_program(path: str) -> ConicProgram:
    with open(path) as handle:
        raw = [line.strip() for line in handle if line.strip()]
    n_cols, n_rows = (int(t) for t in raw[0].split())
    cones: List[Cone] = []
    k = 1
    while k < len(raw):
        parts = raw[k].split()
        if parts[0] in _KINDS:
            cones.append((parts[0], int(parts[1])))
            k += 1
        else:
            break
    c = np.zeros(n_cols)
    b = np.zeros(n_rows)
    rows, cols, vals = [], [], []
    for line in raw[k:]:
        i_s, j_s, v_s = line.split()
        i, j, v = int(i_s), int(j_s), float(v_s)
        if i == n_rows:
            c[j] = v
        elif j == n_cols:
            b[i] = v
        else:
            rows.append(i)
            cols.append(j)
            vals.append(v)
    A = sp.csr_matrix((vals, (rows, cols)), shape=(n_rows, n_cols))
    return ConicProgram(c=c, A=A, b=b, cones=cones)
