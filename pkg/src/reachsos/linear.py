"""Direct treatment of linear dynamics with centered ellipsoidal constraints.

For x+ = A x with initial set {x : x^T V0 x <= 1} and state set
{x : x^T G x <= 1}, a quadratic invariant super-level set comes from the
small semidefinite program

    max  trace(M V)   s.t.  V0 >= V >= A^T V A,  V > 0,

where M is the second-order moment matrix of the Lebesgue measure on the
state ellipsoid.  The optimal V gives the certificate u = 0,
v(x) = 1 - x^T V x, w = 1 + v, whose super-level set {v >= 0} contains every
trajectory from the initial ellipsoid.  This reproduces what the generic
order-1 relaxation finds on the same data, at a fraction of the size.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from .conic import ConicProgram, Solution, svec
from .moments import DomainGeometry, geometry_moment
from .polynomials import Exponent, Polynomial
from .solver import get_backend

STRICTNESS_EPS = 1e-8  # V > 0 is imposed as V >= eps * I, below solver tolerance

_PSD_CHECK_TOL = 1e-9


@dataclass
class LinearReachProblem:
    """x+ = A x, initial ellipsoid {x^T V0 x <= 1}, state ellipsoid {x^T G x <= 1}."""

    A: np.ndarray
    V0: np.ndarray
    G: np.ndarray

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=float)
        self.V0 = np.asarray(self.V0, dtype=float)
        self.G = np.asarray(self.G, dtype=float)
        n = self.A.shape[0]
        for name, M in (("A", self.A), ("V0", self.V0), ("G", self.G)):
            if M.shape != (n, n):
                raise ValueError(f"{name} must be {n}x{n}, got {M.shape}")
        for name, M in (("V0", self.V0), ("G", self.G)):
            if not np.allclose(M, M.T, atol=1e-12):
                raise ValueError(f"{name} must be symmetric")
            if np.linalg.eigvalsh(M).min() <= 0:
                raise ValueError(f"{name} must be positive definite")
        # Initial set inside the state set means V0 dominates G.
        if np.linalg.eigvalsh(self.V0 - self.G).min() < -_PSD_CHECK_TOL:
            raise ValueError(
                "initial ellipsoid is not contained in the state ellipsoid "
                "(V0 - G has a negative eigenvalue)"
            )

    @property
    def n_vars(self) -> int:
        return self.A.shape[0]

    def state_geometry(self) -> DomainGeometry:
        return DomainGeometry.ellipsoid([0.0] * self.n_vars, self.G)


def second_moment_matrix(geometry: DomainGeometry) -> np.ndarray:
    """Matrix of degree-2 Lebesgue moments: M[i, j] = integral of x_i x_j."""
    n = geometry.n_vars
    M = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            beta = [0] * n
            beta[i] += 1
            beta[j] += 1
            M[i, j] = M[j, i] = geometry_moment(geometry, tuple(beta))
    return M


def assemble_linear(
    problem: LinearReachProblem, M: Optional[np.ndarray] = None
) -> ConicProgram:
    """Conic form of the quadratic-invariant program.

    Columns: V as a packed free symmetric block, then three packed PSD slack
    blocks tied to V0 - V, V - A^T V A and V - eps*I.
    """
    n = problem.n_vars
    if M is None:
        M = second_moment_matrix(problem.state_geometry())
    P = n * (n + 1) // 2
    n_cols = 4 * P
    cones = [("free", P), ("psd", n), ("psd", n), ("psd", n)]

    # Row group k ties slack block k entrywise to its affine expression in V.
    rows, cols, vals = [], [], []
    b = np.zeros(3 * P)

    def vmap_entries(transform: np.ndarray) -> np.ndarray:
        """Packed matrix of the linear map svec(V) -> svec(T^T V T)."""
        out = np.empty((P, P))
        basis = np.zeros((n, n))
        k = 0
        for j in range(n):
            for i in range(j + 1):
                basis[:, :] = 0.0
                if i == j:
                    basis[i, j] = 1.0
                else:
                    basis[i, j] = basis[j, i] = 1.0 / np.sqrt(2.0)
                out[:, k] = svec(transform.T @ basis @ transform)
                k += 1
        return out

    ident = np.eye(P)
    maps = [
        (-ident, svec(problem.V0)),  # S1 = V0 - V
        (ident - vmap_entries(problem.A), np.zeros(P)),  # S2 = V - A^T V A
        (ident, svec(STRICTNESS_EPS * np.eye(n))),  # S3 = V - eps I
    ]
    for k, (coefV, rhs) in enumerate(maps):
        for p in range(P):
            row = k * P + p
            rows.append(row)
            cols.append(P + k * P + p)  # slack entry
            vals.append(1.0)
            for q in range(P):
                if coefV[p, q] != 0.0:
                    rows.append(row)
                    cols.append(q)
                    vals.append(-coefV[p, q])
            b[row] = rhs[p]

    c = np.zeros(n_cols)
    c[:P] = -svec(M)  # maximize trace(M V)
    A = sp.csr_matrix(sp.coo_matrix((vals, (rows, cols)), shape=(3 * P, n_cols)))
    return ConicProgram(c=c, A=A, b=b, cones=cones)


def solve_linear(
    problem: LinearReachProblem,
    backend: str = "interior_point",
    feastol: float = 1e-9,
    gaptol: float = 1e-9,
    max_iter: int = 200,
) -> Tuple[np.ndarray, float, Solution]:
    """Solve the quadratic-invariant program; returns (V, trace(M V), solution)."""
    M = second_moment_matrix(problem.state_geometry())
    prog = assemble_linear(problem, M)
    sol = get_backend(backend)(prog, feastol=feastol, gaptol=gaptol, max_iter=max_iter)
    n = problem.n_vars
    P = n * (n + 1) // 2
    V = _unpack(sol.x[:P], n)
    return V, float(np.sum(M * V)), sol


def _unpack(v: np.ndarray, n: int) -> np.ndarray:
    M = np.empty((n, n))
    k = 0
    for j in range(n):
        for i in range(j + 1):
            if i == j:
                M[i, j] = v[k]
            else:
                M[i, j] = M[j, i] = v[k] / np.sqrt(2.0)
            k += 1
    return M


def quadratic_certificate(V: np.ndarray) -> Tuple[Polynomial, Polynomial]:
    """Certificate polynomials for an optimal V: u = 0, v = 1 - x^T V x, w = 1 + v."""
    n = V.shape[0]
    terms: Dict[Exponent, float] = {(0,) * n: 1.0}
    for i in range(n):
        for j in range(i, n):
            e = [0] * n
            e[i] += 1
            e[j] += 1
            coef = -V[i, i] if i == j else -2.0 * V[i, j]
            terms[tuple(e)] = coef
    v = Polynomial(n, terms)
    w = Polynomial.constant(n, 1.0) + v
    return v, w
