"""Assembly of the order-r moment and SOS semidefinite relaxations.

For a reachability problem with initial set X0 = {g0_j >= 0}, state set
X = {g_j >= 0}, polynomial map f of degree d and horizon T, the order-r dual
(SOS) program over polynomials v, w of degree <= 2r and a scalar u >= 0 is

    min  sum_beta w_beta * y_beta  +  u T y_0
    s.t. v                 in Q0[r]    (truncated quadratic module of X0)
         w - 1 - v         in Q[r]
         u + v o f - v     in Q[rd]
         w                 in Q[r]

where y are the Lebesgue moments of the state geometry.  Each module
membership becomes one Gram (PSD) matrix per constraint polynomial plus
coefficient-matching equality rows.  The composition v o f has degree up to
2rd, so the third membership is truncated at rd; the others live at r.  The
primal moment program is assembled as the exact conic dual: moment vectors
for four measures (initial, super-level, complement, occupation), with the
occupation blocks at order r*d so the two programs pair without any
relaxation gap.

All assembly happens in rescaled coordinates in which the state geometry is
the unit box or unit ball; certificates are mapped back through the affine
change of variables before being reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from .conic import ConicProgram, Solution, cone_dim
from .moments import DomainGeometry, MomentSequence, moment_vector
from .polynomials import (
    Exponent,
    MonomialBasis,
    Polynomial,
    affine_polynomials,
    coefficient_vector,
    enumerate_basis,
    from_coefficient_vector,
)
from .sets import ReachProblem, SemialgebraicSet, validate_archimedean
from .solver import get_backend

SQRT2 = float(np.sqrt(2.0))

CLEAN_EPS = 1e-12


class CertificateError(RuntimeError):
    """Raised when a solver outcome cannot back a certificate."""

    def __init__(self, message: str, diagnostics: Optional[dict] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


# -- change of variables ---------------------------------------------------------


@dataclass
class ProblemScaling:
    """Affine rescaling x = center + L u putting the state geometry in unit position."""

    problem: ReachProblem
    center: np.ndarray
    L: np.ndarray
    L_inv: np.ndarray
    det: float
    init_inequalities: List[Polynomial]
    state_inequalities: List[Polynomial]
    geometry: DomainGeometry  # unit box or unit ball
    dynamics: List[Polynomial]

    def to_original(self, p_scaled: Polynomial) -> Polynomial:
        """Pull a polynomial in scaled coordinates back to original coordinates."""
        phi = affine_polynomials(-self.L_inv @ self.center, self.L_inv)
        return p_scaled.compose(phi)

    def to_scaled_points(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return (pts - self.center) @ self.L_inv.T


def _normalized(p: Polynomial) -> Polynomial:
    scale = max(abs(c) for c in p.terms.values())
    return p.scale(1.0 / scale)


def scale_problem(problem: ReachProblem) -> ProblemScaling:
    """Rescale so the state geometry becomes the unit box or unit ball.

    Constraint polynomials are composed with the affine map and normalized to
    unit max coefficient; the Archimedean ball is re-derived in the clean
    coordinates (the original auto-added one would pick up linear terms).
    """
    n = problem.n_vars
    center, L = problem.state_geometry.to_unit_map()
    L_inv = np.linalg.inv(L)
    det = abs(float(np.linalg.det(L)))
    x_of_u = affine_polynomials(center, L)

    init_ineqs = [_normalized(g.compose(x_of_u)) for g in problem.init.inequalities]
    state_ineqs = [
        _normalized(g.compose(x_of_u))
        for g in problem.state_inequalities_without_ball()
    ]
    unit = problem.state_geometry.unit_geometry()
    scaled_state, _ = validate_archimedean(
        SemialgebraicSet(n, state_ineqs), bound_hint=float(n)
    )

    dynamics = []
    f_composed = [f.compose(x_of_u) for f in problem.system.components]
    for i in range(n):
        acc = Polynomial.constant(n, -float((L_inv @ center)[i]))
        for j in range(n):
            if L_inv[i, j] != 0.0:
                acc = acc + f_composed[j].scale(float(L_inv[i, j]))
        dynamics.append(acc)

    return ProblemScaling(
        problem=problem,
        center=center,
        L=L,
        L_inv=L_inv,
        det=det,
        init_inequalities=init_ineqs,
        state_inequalities=scaled_state.inequalities,
        geometry=unit,
        dynamics=dynamics,
    )


# -- moment / localizing matrix functionals ----------------------------------------


def moment_matrix_functional(
    n_vars: int, order: int, g: Polynomial
) -> Dict[Tuple[int, int], Dict[Exponent, float]]:
    """Entrywise linear functionals of the localizing matrix M_order(g y).

    Entry (i, j) maps moment index mu to its coefficient: the expansion of
    g(x) * x^(b_i + b_j).  Entries depend only on b_i + b_j, so rows are
    built once per distinct monomial and shared.
    """
    basis = enumerate_basis(n_vars, order)
    by_monomial: Dict[Exponent, Dict[Exponent, float]] = {}
    out: Dict[Tuple[int, int], Dict[Exponent, float]] = {}
    for i in range(len(basis)):
        for j in range(i, len(basis)):
            m = tuple(a + b for a, b in zip(basis[i], basis[j]))
            func = by_monomial.get(m)
            if func is None:
                func = {}
                for delta, coef in g.terms.items():
                    func[tuple(a + b for a, b in zip(m, delta))] = coef
                by_monomial[m] = func
            out[(i, j)] = func
    return out


def localizing_matrix(
    moments: MomentSequence, order: int, g: Polynomial
) -> np.ndarray:
    """Numeric localizing matrix M_order(g y); the moment matrix is the g = 1 case."""
    funcs = moment_matrix_functional(moments.n_vars, order, g)
    size = len(enumerate_basis(moments.n_vars, order))
    M = np.empty((size, size))
    for (i, j), func in funcs.items():
        value = sum(coef * moments.values[mu] for mu, coef in func.items())
        M[i, j] = M[j, i] = value
    return M


def moment_matrix(moments: MomentSequence, order: int) -> np.ndarray:
    return localizing_matrix(
        moments, order, Polynomial.constant(moments.n_vars, 1.0)
    )


class PushforwardTable:
    """Cached expansions of f(x)^beta = prod_i f_i(x)^beta_i."""

    def __init__(self, components: Sequence[Polynomial]):
        self.components = list(components)
        self._powers: Dict[Tuple[int, int], Polynomial] = {}

    def _power(self, i: int, k: int) -> Polynomial:
        key = (i, k)
        p = self._powers.get(key)
        if p is None:
            if k == 0:
                p = Polynomial.constant(self.components[i].n_vars, 1.0)
            else:
                p = self._power(i, k - 1) * self.components[i]
            self._powers[key] = p
        return p

    def expand(self, beta: Exponent) -> Polynomial:
        result = Polynomial.constant(self.components[0].n_vars, 1.0)
        for i, k in enumerate(beta):
            if k:
                result = result * self._power(i, k)
        return result


def pushforward_row(components: Sequence[Polynomial], beta: Exponent) -> Polynomial:
    """Expansion of prod_i f_i^beta_i as coefficients over the monomial basis."""
    return PushforwardTable(components).expand(beta)


# -- layouts -----------------------------------------------------------------------


@dataclass
class GramBlock:
    label: str
    constraint: Polynomial  # scaled coordinates; the implicit g_0 = 1 included
    order: int
    basis: MonomialBasis
    col_offset: int

    @property
    def side(self) -> int:
        return len(self.basis)

    @property
    def dim(self) -> int:
        return self.side * (self.side + 1) // 2


@dataclass
class Membership:
    """One quadratic-module membership: target polynomial == sum of sigma_j g_j."""

    label: str
    row_offset: int
    row_basis: MonomialBasis
    grams: List[GramBlock]


@dataclass
class DualLayout:
    order: int
    n_vars: int
    basis_2r: MonomialBasis
    v_offset: int
    w_offset: int
    u_col: Optional[int]
    memberships: List[Membership]
    scaling: ProblemScaling
    horizon: Optional[int]


@dataclass
class VariableLayout:
    """Primal moment-program layout: named moment blocks, then PSD tie blocks."""

    order: int
    n_vars: int
    blocks: Dict[str, Tuple[int, MonomialBasis]]  # name -> (col offset, basis)
    a_col: Optional[int]
    psd: List[Tuple[str, GramBlock]]  # (measure name, localizing block)
    scaling: ProblemScaling
    horizon: Optional[int]

    def column_of(self, measure: str, beta: Exponent) -> int:
        offset, basis = self.blocks[measure]
        return offset + basis.index_of(beta)


def _half_degree(g: Polynomial) -> int:
    return math.ceil(g.degree / 2)


def _with_unit(inequalities: Sequence[Polynomial], n_vars: int) -> List[Polynomial]:
    return [Polynomial.constant(n_vars, 1.0)] + list(inequalities)


def _require_order(problem: ReachProblem, r: int) -> None:
    if r < problem.r_min:
        raise ValueError(
            f"relaxation order r={r} is below the minimum r_min={problem.r_min}"
        )


# -- dual (SOS) assembly -------------------------------------------------------------


def assemble_dual(problem: ReachProblem, r: int) -> tuple[ConicProgram, DualLayout]:
    """Build the order-r SOS strengthening as a standard-form conic program."""
    _require_order(problem, r)
    scaling = scale_problem(problem)
    n = problem.n_vars
    d = problem.system.degree
    rd = r * d
    basis_2r = enumerate_basis(n, 2 * r)
    basis_2rd = enumerate_basis(n, 2 * rd)
    n_poly = len(basis_2r)
    moments = moment_vector(scaling.geometry, 2 * r)
    vol0 = moments.values[(0,) * n]
    u_zero = problem.u_zero

    v_off, w_off = 0, n_poly
    n_free = 2 * n_poly
    u_col = None if u_zero else n_free
    cones: List[tuple[str, int]] = [("free", n_free)]
    col = n_free
    if not u_zero:
        cones.append(("nonneg", 1))
        col += 1

    init_gens = _with_unit(scaling.init_inequalities, n)
    state_gens = _with_unit(scaling.state_inequalities, n)

    memberships: List[Membership] = []
    row = 0

    def add_membership(label: str, gens: List[Polynomial], trunc: int, rows: MonomialBasis):
        nonlocal col, row
        grams = []
        for j, g in enumerate(gens):
            order = trunc - _half_degree(g)
            block = GramBlock(
                label=f"{label}/g{j}",
                constraint=g,
                order=order,
                basis=enumerate_basis(n, order),
                col_offset=col,
            )
            cones.append(("psd", block.side))
            col += block.dim
            grams.append(block)
        memberships.append(Membership(label, row, rows, grams))
        row += len(rows)

    add_membership("init", init_gens, r, basis_2r)
    add_membership("indicator", state_gens, r, basis_2r)
    add_membership("invariance", state_gens, rd, basis_2rd)
    add_membership("nonneg", state_gens, r, basis_2r)

    n_cols, n_rows = col, row
    c = np.zeros(n_cols)
    for i, beta in enumerate(basis_2r.exponents):
        c[w_off + i] = moments.values[beta]
    if u_col is not None:
        c[u_col] = problem.horizon * vol0
    b = np.zeros(n_rows)

    rows_ix: List[int] = []
    cols_ix: List[int] = []
    vals: List[float] = []

    def add(i: int, j: int, v: float):
        rows_ix.append(i)
        cols_ix.append(j)
        vals.append(v)

    def add_gram_entries(mem: Membership):
        for block in mem.grams:
            exps = block.basis.exponents
            p = 0
            for bcol in range(block.side):
                for brow in range(bcol + 1):
                    m = tuple(a + b for a, b in zip(exps[brow], exps[bcol]))
                    weight = 1.0 if brow == bcol else SQRT2
                    for delta, coef in block.constraint.terms.items():
                        mu = tuple(a + b for a, b in zip(m, delta))
                        add(
                            mem.row_offset + mem.row_basis.index[mu],
                            block.col_offset + p,
                            -weight * coef,
                        )
                    p += 1

    mem_init, mem_ind, mem_inv, mem_nonneg = memberships

    # init: coeff(v) - grams = 0 over basis_2rd (v itself lives in basis_2r).
    for i, beta in enumerate(basis_2r.exponents):
        add(mem_init.row_offset + mem_init.row_basis.index[beta], v_off + i, 1.0)
    add_gram_entries(mem_init)

    # indicator: coeff(w - v) - grams = coeff(1).
    for i, beta in enumerate(basis_2r.exponents):
        ri = mem_ind.row_offset + mem_ind.row_basis.index[beta]
        add(ri, w_off + i, 1.0)
        add(ri, v_off + i, -1.0)
    b[mem_ind.row_offset + mem_ind.row_basis.index[(0,) * n]] = 1.0
    add_gram_entries(mem_ind)

    # invariance: coeff(u + v o f - v) - grams = 0 over basis_2rd.
    table = PushforwardTable(scaling.dynamics)
    for i, beta in enumerate(basis_2r.exponents):
        expansion = table.expand(beta)
        for gamma, coef in expansion.terms.items():
            add(
                mem_inv.row_offset + mem_inv.row_basis.index[gamma],
                v_off + i,
                coef,
            )
        add(mem_inv.row_offset + mem_inv.row_basis.index[beta], v_off + i, -1.0)
    if u_col is not None:
        add(mem_inv.row_offset + mem_inv.row_basis.index[(0,) * n], u_col, 1.0)
    add_gram_entries(mem_inv)

    # nonneg: coeff(w) - grams = 0.
    for i, beta in enumerate(basis_2r.exponents):
        add(mem_nonneg.row_offset + mem_nonneg.row_basis.index[beta], w_off + i, 1.0)
    add_gram_entries(mem_nonneg)

    A = sp.csr_matrix(
        sp.coo_matrix((vals, (rows_ix, cols_ix)), shape=(n_rows, n_cols))
    )
    prog = ConicProgram(c=c, A=A, b=b, cones=cones)
    layout = DualLayout(
        order=r,
        n_vars=n,
        basis_2r=basis_2r,
        v_offset=v_off,
        w_offset=w_off,
        u_col=u_col,
        memberships=memberships,
        scaling=scaling,
        horizon=None if u_zero else problem.horizon,
    )
    return prog, layout


# -- primal (moment) assembly ---------------------------------------------------------


def assemble_primal(problem: ReachProblem, r: int) -> tuple[ConicProgram, VariableLayout]:
    """Build the order-r moment relaxation as an explicit standard-form program.

    Localizing matrices become PSD variables tied entrywise to the moment
    vectors, so the program is the exact conic dual of assemble_dual's output.
    """
    _require_order(problem, r)
    scaling = scale_problem(problem)
    n = problem.n_vars
    d = problem.system.degree
    rd = r * d
    basis_2r = enumerate_basis(n, 2 * r)
    basis_2rd = enumerate_basis(n, 2 * rd)
    moments = moment_vector(scaling.geometry, 2 * r)
    vol0 = moments.values[(0,) * n]
    u_zero = problem.u_zero

    blocks: Dict[str, Tuple[int, MonomialBasis]] = {}
    col = 0
    for name, basis in (
        ("init", basis_2r),
        ("level", basis_2r),
        ("complement", basis_2r),
        ("occupation", basis_2rd),
    ):
        blocks[name] = (col, basis)
        col += len(basis)
    n_free = col
    cones: List[tuple[str, int]] = [("free", n_free)]
    a_col = None
    if not u_zero:
        a_col = col
        cones.append(("nonneg", 1))
        col += 1

    init_gens = _with_unit(scaling.init_inequalities, n)
    state_gens = _with_unit(scaling.state_inequalities, n)
    psd: List[Tuple[str, GramBlock]] = []

    def add_blocks(measure: str, gens: List[Polynomial], trunc: int):
        nonlocal col
        for j, g in enumerate(gens):
            order = trunc - _half_degree(g)
            block = GramBlock(
                label=f"{measure}/g{j}",
                constraint=g,
                order=order,
                basis=enumerate_basis(n, order),
                col_offset=col,
            )
            cones.append(("psd", block.side))
            col += block.dim
            psd.append((measure, block))

    add_blocks("init", init_gens, r)
    add_blocks("level", state_gens, r)
    add_blocks("complement", state_gens, r)
    add_blocks("occupation", state_gens, rd)

    rows_ix: List[int] = []
    cols_ix: List[int] = []
    vals: List[float] = []

    def add(i: int, j: int, v: float):
        rows_ix.append(i)
        cols_ix.append(j)
        vals.append(v)

    row = 0
    b_entries: List[Tuple[int, float]] = []

    if not u_zero:
        add(row, blocks["occupation"][0] + basis_2rd.index[(0,) * n], 1.0)
        add(row, a_col, 1.0)
        b_entries.append((row, problem.horizon * vol0))
        row += 1

    table = PushforwardTable(scaling.dynamics)
    level_off = blocks["level"][0]
    comp_off = blocks["complement"][0]
    init_off = blocks["init"][0]
    occ_off = blocks["occupation"][0]
    for i, beta in enumerate(basis_2r.exponents):
        # transport balance: y_beta + z_beta - l_z(f^beta) - y0_beta = 0
        add(row, level_off + i, 1.0)
        add(row, occ_off + basis_2rd.index[beta], 1.0)
        for gamma, coef in table.expand(beta).terms.items():
            add(row, occ_off + basis_2rd.index[gamma], -coef)
        add(row, init_off + i, -1.0)
        row += 1
    for i, beta in enumerate(basis_2r.exponents):
        # domination by the state-geometry Lebesgue measure
        add(row, level_off + i, 1.0)
        add(row, comp_off + i, 1.0)
        b_entries.append((row, moments.values[beta]))
        row += 1

    for measure, block in psd:
        m_off, m_basis = blocks[measure]
        exps = block.basis.exponents
        p = 0
        for bcol in range(block.side):
            for brow in range(bcol + 1):
                m = tuple(a + b for a, b in zip(exps[brow], exps[bcol]))
                weight = 1.0 if brow == bcol else SQRT2
                add(row, block.col_offset + p, 1.0)
                for delta, coef in block.constraint.terms.items():
                    mu = tuple(a + b for a, b in zip(m, delta))
                    add(row, m_off + m_basis.index[mu], -weight * coef)
                p += 1
                row += 1

    n_rows, n_cols = row, col
    b = np.zeros(n_rows)
    for i, v in b_entries:
        b[i] = v
    c = np.zeros(n_cols)
    c[level_off + basis_2r.index[(0,) * n]] = -1.0  # maximize the level-set mass

    A = sp.csr_matrix(
        sp.coo_matrix((vals, (rows_ix, cols_ix)), shape=(n_rows, n_cols))
    )
    prog = ConicProgram(c=c, A=A, b=b, cones=cones)
    layout = VariableLayout(
        order=r,
        n_vars=n,
        blocks=blocks,
        a_col=a_col,
        psd=psd,
        scaling=scaling,
        horizon=None if u_zero else problem.horizon,
    )
    return prog, layout


# -- certificates ----------------------------------------------------------------------


@dataclass
class Certificate:
    """Optimal dual data (u, v, w) with the Gram matrices backing each membership.

    v and w are reported in the problem's original coordinates; the Gram
    matrices and their constraint polynomials live in the rescaled coordinates
    the program was assembled in.
    """

    u: float
    v: Polynomial
    w: Polynomial
    order: int
    horizon: Optional[int]
    u_zero: bool
    scaled_v: Polynomial
    scaled_w: Polynomial
    scaling: ProblemScaling
    sos_multipliers: Dict[str, List[Tuple[Polynomial, np.ndarray, MonomialBasis]]]
    reconstruction_residuals: Dict[str, float] = field(default_factory=dict)

    @property
    def max_reconstruction_residual(self) -> float:
        return max(self.reconstruction_residuals.values())

    def margin(self, points: np.ndarray) -> np.ndarray:
        """v(x) + u*T at original-coordinate points: >= 0 inside the outer set."""
        shift = self.u * self.horizon if self.horizon is not None else 0.0
        return self.v.evaluate_batch(points) + shift


def _gram_polynomial(G: np.ndarray, basis: MonomialBasis) -> Polynomial:
    terms: Dict[Exponent, float] = {}
    exps = basis.exponents
    for i in range(len(exps)):
        for j in range(len(exps)):
            m = tuple(a + b for a, b in zip(exps[i], exps[j]))
            terms[m] = terms.get(m, 0.0) + G[i, j]
    return Polynomial(basis.n_vars, terms)


def _unpack_gram(x: np.ndarray, block: GramBlock) -> np.ndarray:
    side = block.side
    G = np.empty((side, side))
    p = 0
    for j in range(side):
        for i in range(j + 1):
            v = x[block.col_offset + p]
            if i == j:
                G[i, j] = v
            else:
                G[i, j] = G[j, i] = v / SQRT2
            p += 1
    return G


def extract_certificate(solution: Solution, layout: DualLayout) -> Certificate:
    """Rebuild (u, v, w) and all Gram matrices from a converged dual solve."""
    if solution.status not in ("optimal", "near_optimal"):
        raise CertificateError(
            f"cannot extract a certificate from a solve with status "
            f"{solution.status!r}",
            {
                "status": solution.status,
                "primal_residual": solution.primal_residual,
                "dual_residual": solution.dual_residual,
                "gap": solution.gap,
            },
        )
    x = solution.x
    nb = len(layout.basis_2r)
    v_scaled = from_coefficient_vector(
        x[layout.v_offset : layout.v_offset + nb], layout.basis_2r
    )
    w_scaled = from_coefficient_vector(
        x[layout.w_offset : layout.w_offset + nb], layout.basis_2r
    )
    u = float(x[layout.u_col]) if layout.u_col is not None else 0.0

    n = layout.n_vars
    one = Polynomial.constant(n, 1.0)
    targets = {
        "init": v_scaled,
        "indicator": w_scaled - one - v_scaled,
        "invariance": Polynomial.constant(n, u)
        + v_scaled.compose(layout.scaling.dynamics)
        - v_scaled,
        "nonneg": w_scaled,
    }
    multipliers: Dict[str, List[Tuple[Polynomial, np.ndarray, MonomialBasis]]] = {}
    residuals: Dict[str, float] = {}
    for mem in layout.memberships:
        entries = []
        recon = Polynomial.zero(n)
        for block in mem.grams:
            G = _unpack_gram(x, block)
            entries.append((block.constraint, G, block.basis))
            recon = recon + _gram_polynomial(G, block.basis) * block.constraint
        diff = targets[mem.label] - recon
        residuals[mem.label] = max(
            (abs(c) for c in diff.terms.values()), default=0.0
        )
        multipliers[mem.label] = entries

    return Certificate(
        u=u,
        v=layout.scaling.to_original(v_scaled).clean(CLEAN_EPS),
        w=layout.scaling.to_original(w_scaled).clean(CLEAN_EPS),
        order=layout.order,
        horizon=layout.horizon,
        u_zero=layout.u_col is None,
        scaled_v=v_scaled,
        scaled_w=w_scaled,
        scaling=layout.scaling,
        sos_multipliers=multipliers,
        reconstruction_residuals=residuals,
    )


@dataclass
class SolveOutcome:
    """A dual solve together with its certificate and objective bookkeeping."""

    certificate: Certificate
    solution: Solution
    layout: DualLayout
    objective_scaled: float
    objective: float  # in original coordinates (scaled by |det L|)
    program_rows: int
    program_cols: int


def solve_dual(
    problem: ReachProblem,
    order_2r: int,
    backend: str = "interior_point",
    feastol: float = 1e-8,
    gaptol: float = 1e-8,
    max_iter: int = 200,
    verbose: int = 0,
) -> SolveOutcome:
    """Assemble and solve the order-(2r) dual program, returning its certificate."""
    if order_2r % 2 or order_2r <= 0:
        raise ValueError(f"order must be a positive even integer 2r, got {order_2r}")
    prog, layout = assemble_dual(problem, order_2r // 2)
    solution = get_backend(backend)(
        prog, feastol=feastol, gaptol=gaptol, max_iter=max_iter, verbose=verbose
    )
    certificate = extract_certificate(solution, layout)
    return SolveOutcome(
        certificate=certificate,
        solution=solution,
        layout=layout,
        objective_scaled=solution.primal_objective,
        objective=solution.primal_objective * layout.scaling.det,
        program_rows=prog.n_rows,
        program_cols=prog.n_cols,
    )


def solve_primal(
    problem: ReachProblem,
    order_2r: int,
    backend: str = "interior_point",
    feastol: float = 1e-8,
    gaptol: float = 1e-8,
    max_iter: int = 200,
    verbose: int = 0,
) -> tuple[float, Solution, VariableLayout]:
    """Solve the order-(2r) moment relaxation; returns (optimal mass, solution, layout).

    The reported value is the scaled-coordinate optimum sup y_0, directly
    comparable with SolveOutcome.objective_scaled.
    """
    if order_2r % 2 or order_2r <= 0:
        raise ValueError(f"order must be a positive even integer 2r, got {order_2r}")
    prog, layout = assemble_primal(problem, order_2r // 2)
    solution = get_backend(backend)(
        prog, feastol=feastol, gaptol=gaptol, max_iter=max_iter, verbose=verbose
    )
    return -solution.primal_objective, solution, layout
