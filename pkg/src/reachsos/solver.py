"""Primal-dual interior-point solver for free/nonneg/PSD conic programs.

The method is Mehrotra predictor-corrector path following on the homogeneous
self-dual embedding, with Nesterov-Todd scaling for the nonnegative and PSD
blocks.  Free variables carry no barrier; they are handled exactly through an
augmented (indefinite) KKT system

    [ A_c W^{-2} A_c^T   A_f ] [dy  ]
    [ A_f^T              0   ] [dx_f]

factored densely once per iteration.  The embedding gives simultaneous
infeasibility detection: tau -> 0 with a certificate classifies the program
as infeasible or unbounded.

Everything is deterministic: identical programs and options reproduce the
iterate sequence bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .conic import ConicProgram, Solution, SolverError, cone_dim

_STEP_FRACTION = 0.99
_CHUNK_DOUBLES = 4_000_000  # ~32 MB of scratch per congruence chunk


# -- packed symmetric helpers (vectorized, cached per matrix side) -----------------


class _PackCache:
    def __init__(self, side: int):
        ii, jj = [], []
        for j in range(side):
            for i in range(j + 1):
                ii.append(i)
                jj.append(j)
        self.side = side
        self.ii = np.array(ii)
        self.jj = np.array(jj)
        off = self.ii != self.jj
        self.pack_scale = np.where(off, np.sqrt(2.0), 1.0)
        self.unpack_scale = np.where(off, 1.0 / np.sqrt(2.0), 1.0)


_PACK_CACHES: Dict[int, _PackCache] = {}


def _pack_cache(side: int) -> _PackCache:
    cache = _PACK_CACHES.get(side)
    if cache is None:
        cache = _PACK_CACHES[side] = _PackCache(side)
    return cache


def _smat(v: np.ndarray, pc: _PackCache) -> np.ndarray:
    M = np.zeros((pc.side, pc.side), dtype=v.dtype)
    vals = v * pc.unpack_scale.astype(v.dtype)
    M[pc.ii, pc.jj] = vals
    M[pc.jj, pc.ii] = vals
    return M


def _svec(M: np.ndarray, pc: _PackCache) -> np.ndarray:
    return M[pc.ii, pc.jj] * pc.pack_scale


# -- cone layout -------------------------------------------------------------------


@dataclass
class _PsdBlock:
    offset: int
    side: int
    dim: int
    pc: _PackCache
    rows: np.ndarray  # equality rows with any nonzero on this block
    # Constant scatter data: for chunked densification of A rows into matrices.
    entry_row: np.ndarray  # local row index per expanded entry
    entry_flat: np.ndarray  # i * side + j per expanded entry
    entry_val: np.ndarray


class _Layout:
    """Split the column space into free / nonneg / psd pieces and cache A views."""

    def __init__(self, prog: ConicProgram):
        free_cols: List[np.ndarray] = []
        nonneg_cols: List[np.ndarray] = []
        psd: List[_PsdBlock] = []
        A = prog.A.tocsc()
        offset = 0
        for kind, size in prog.cones:
            dim = cone_dim((kind, size))
            cols = np.arange(offset, offset + dim)
            if kind == "free":
                free_cols.append(cols)
            elif kind == "nonneg":
                nonneg_cols.append(cols)
            else:
                psd.append(self._psd_block(A, offset, size))
            offset += dim
        self.n = offset
        self.m = prog.A.shape[0]
        self.free = np.concatenate(free_cols) if free_cols else np.empty(0, dtype=int)
        self.nonneg = (
            np.concatenate(nonneg_cols) if nonneg_cols else np.empty(0, dtype=int)
        )
        self.psd = psd
        self.barrier_degree = len(self.nonneg) + sum(b.side for b in psd)
        self.A_f = prog.A[:, self.free].toarray() if len(self.free) else np.zeros((self.m, 0))
        self.A_nn = prog.A[:, self.nonneg].tocsr()
        conic = [self.nonneg] + [
            np.arange(b.offset, b.offset + b.dim) for b in psd
        ]
        self.conic = np.concatenate(conic) if conic else np.empty(0, dtype=int)

    @staticmethod
    def _psd_block(A_csc: sp.csc_matrix, offset: int, side: int) -> _PsdBlock:
        dim = side * (side + 1) // 2
        pc = _pack_cache(side)
        sub = A_csc[:, offset : offset + dim].tocoo()
        rows = np.unique(sub.row)
        row_map = {r: k for k, r in enumerate(rows)}
        er, ef, ev = [], [], []
        for r, p, v in zip(sub.row, sub.col, sub.data):
            i, j = int(pc.ii[p]), int(pc.jj[p])
            lr = row_map[int(r)]
            if i == j:
                er.append(lr)
                ef.append(i * side + j)
                ev.append(v)
            else:
                w = v / np.sqrt(2.0)
                er.extend((lr, lr))
                ef.extend((i * side + j, j * side + i))
                ev.extend((w, w))
        return _PsdBlock(
            offset=offset,
            side=side,
            dim=dim,
            pc=pc,
            rows=rows,
            entry_row=np.array(er, dtype=np.int64),
            entry_flat=np.array(ef, dtype=np.int64),
            entry_val=np.array(ev),
        )


# -- Nesterov-Todd scaling ----------------------------------------------------------


class _Scaling:
    """Per-block NT scaling: w for nonneg; (R, Rinv, lam) per PSD block."""

    def __init__(self, layout: _Layout, x: np.ndarray, s: np.ndarray, identity=False):
        self.layout = layout
        if identity:
            self.w = np.ones(len(layout.nonneg))
            self.lam_nn = np.ones(len(layout.nonneg))
            self.R = [np.eye(b.side) for b in layout.psd]
            self.Rinv = [np.eye(b.side) for b in layout.psd]
            self.lam_psd = [np.ones(b.side) for b in layout.psd]
            return
        xn = x[layout.nonneg]
        sn = s[layout.nonneg]
        if np.any(xn <= 0) or np.any(sn <= 0):
            raise SolverError("nonnegative block left the cone interior")
        self.w = np.sqrt(xn / sn)
        self.lam_nn = np.sqrt(xn * sn)
        self.R, self.Rinv, self.lam_psd = [], [], []
        for blk in layout.psd:
            X = _smat(x[blk.offset : blk.offset + blk.dim], blk.pc)
            S = _smat(s[blk.offset : blk.offset + blk.dim], blk.pc)
            try:
                Lx = np.linalg.cholesky(X)
                Ls = np.linalg.cholesky(S)
            except np.linalg.LinAlgError as exc:
                raise SolverError(
                    f"non-PSD scaling matrix on block of side {blk.side}: {exc}"
                ) from exc
            U, sig, Vt = np.linalg.svd(Ls.T @ Lx)
            if sig.min() <= 0:
                raise SolverError("degenerate NT scaling (zero singular value)")
            inv_sqrt = 1.0 / np.sqrt(sig)
            self.R.append(Lx @ Vt.T * inv_sqrt)
            self.Rinv.append((U.T * inv_sqrt[:, None]) @ Ls.T)
            self.lam_psd.append(sig)


def _lambda_vec(layout: _Layout, scal: _Scaling) -> np.ndarray:
    """Scaled point lambda as a packed conic vector (psd blocks are diagonal)."""
    lam = np.zeros(layout.n)
    lam[layout.nonneg] = scal.lam_nn
    for blk, lam_b in zip(layout.psd, scal.lam_psd):
        lam[blk.offset : blk.offset + blk.dim] = _svec(np.diag(lam_b), blk.pc)
    return lam


def _scaled_products(layout, scal, dx, ds):
    """(W dx, W^{-T} ds) in the scaled space, as packed conic vectors."""
    gx = np.zeros(layout.n)
    fs = np.zeros(layout.n)
    gx[layout.nonneg] = dx[layout.nonneg] / np.where(scal.w == 0, 1, scal.w)
    fs[layout.nonneg] = ds[layout.nonneg] * scal.w
    for blk, R, Rinv in zip(layout.psd, scal.R, scal.Rinv):
        sl = slice(blk.offset, blk.offset + blk.dim)
        dX = _smat(dx[sl], blk.pc)
        dS = _smat(ds[sl], blk.pc)
        gx[sl] = _svec(Rinv @ dX @ Rinv.T, blk.pc)
        fs[sl] = _svec(R.T @ dS @ R, blk.pc)
    return gx, fs


def _jordan_product(layout: _Layout, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    out = np.zeros(layout.n)
    out[layout.nonneg] = u[layout.nonneg] * v[layout.nonneg]
    for blk in layout.psd:
        sl = slice(blk.offset, blk.offset + blk.dim)
        U = _smat(u[sl], blk.pc)
        V = _smat(v[sl], blk.pc)
        out[sl] = _svec(0.5 * (U @ V + V @ U), blk.pc)
    return out


def _cone_identity(layout: _Layout) -> np.ndarray:
    e = np.zeros(layout.n)
    e[layout.nonneg] = 1.0
    for blk in layout.psd:
        e[blk.offset : blk.offset + blk.dim] = _svec(np.eye(blk.side), blk.pc)
    return e


def _lambda_solve(layout: _Layout, scal: _Scaling, d: np.ndarray) -> np.ndarray:
    """Solve lambda o u = d in the scaled space (Lyapunov solve per PSD block)."""
    out = np.zeros(layout.n)
    out[layout.nonneg] = d[layout.nonneg] / scal.lam_nn
    for blk, lam in zip(layout.psd, scal.lam_psd):
        sl = slice(blk.offset, blk.offset + blk.dim)
        D = _smat(d[sl], blk.pc)
        out[sl] = _svec(2.0 * D / np.add.outer(lam, lam), blk.pc)
    return out


def _apply_theta_inv(layout: _Layout, scal: _Scaling, u: np.ndarray) -> np.ndarray:
    """Theta^{-1} u = W(W u) on the conic part (zero on free columns)."""
    out = np.zeros(layout.n)
    out[layout.nonneg] = scal.w**2 * u[layout.nonneg]
    for blk, R in zip(layout.psd, scal.R):
        sl = slice(blk.offset, blk.offset + blk.dim)
        Wm = R @ R.T
        out[sl] = _svec(Wm @ _smat(u[sl], blk.pc) @ Wm, blk.pc)
    return out


def _apply_theta(layout: _Layout, scal: _Scaling, u: np.ndarray) -> np.ndarray:
    out = np.zeros(layout.n, dtype=u.dtype)
    w2 = (scal.w.astype(u.dtype)) ** 2
    out[layout.nonneg] = u[layout.nonneg] / np.where(w2 == 0, 1, w2)
    for blk, Rinv in zip(layout.psd, scal.Rinv):
        sl = slice(blk.offset, blk.offset + blk.dim)
        Rinv = Rinv.astype(u.dtype)
        Wm_inv = Rinv.T @ Rinv
        out[sl] = _svec(Wm_inv @ _smat(u[sl], blk.pc) @ Wm_inv, blk.pc)
    return out


def _finv(layout: _Layout, scal: _Scaling, u: np.ndarray) -> np.ndarray:
    """Map a scaled dual-space vector back: ds such that W^{-T} ds = u."""
    out = np.zeros(layout.n)
    out[layout.nonneg] = u[layout.nonneg] / np.where(scal.w == 0, 1, scal.w)
    for blk, Rinv in zip(layout.psd, scal.Rinv):
        sl = slice(blk.offset, blk.offset + blk.dim)
        out[sl] = _svec(Rinv.T @ _smat(u[sl], blk.pc) @ Rinv, blk.pc)
    return out


def _max_step(layout: _Layout, scal: _Scaling, x, dx, s, ds) -> float:
    """Largest alpha keeping x + a dx and s + a ds in the cone (scaled-space eigs)."""
    alpha = np.inf
    xn, dxn = x[layout.nonneg], dx[layout.nonneg]
    sn, dsn = s[layout.nonneg], ds[layout.nonneg]
    for val, dval in ((xn, dxn), (sn, dsn)):
        neg = dval < 0
        if np.any(neg):
            alpha = min(alpha, float(np.min(-val[neg] / dval[neg])))
    for blk, R, Rinv, lam in zip(layout.psd, scal.R, scal.Rinv, scal.lam_psd):
        sl = slice(blk.offset, blk.offset + blk.dim)
        inv_sqrt = 1.0 / np.sqrt(lam)
        M = Rinv @ _smat(dx[sl], blk.pc) @ Rinv.T
        M = (M * inv_sqrt[None, :]) * inv_sqrt[:, None]
        emin = float(np.linalg.eigvalsh(M)[0])
        if emin < 0:
            alpha = min(alpha, -1.0 / emin)
        M = R.T @ _smat(ds[sl], blk.pc) @ R
        M = (M * inv_sqrt[None, :]) * inv_sqrt[:, None]
        emin = float(np.linalg.eigvalsh(M)[0])
        if emin < 0:
            alpha = min(alpha, -1.0 / emin)
    return alpha


def _min_eig_shift(layout: _Layout, v: np.ndarray) -> float:
    """Smallest cone eigenvalue of a conic vector (for interior initialization)."""
    smallest = np.inf
    if len(layout.nonneg):
        smallest = min(smallest, float(np.min(v[layout.nonneg])))
    for blk in layout.psd:
        sl = slice(blk.offset, blk.offset + blk.dim)
        smallest = min(
            smallest, float(np.linalg.eigvalsh(_smat(v[sl], blk.pc))[0])
        )
    if smallest is np.inf:
        smallest = 0.0
    return smallest


# -- KKT machinery -------------------------------------------------------------------


class _KKT:
    """Factorization of the augmented system for one NT scaling."""

    def __init__(self, prog: ConicProgram, layout: _Layout, scal: _Scaling):
        self.prog = prog
        self.layout = layout
        self.scal = scal
        m, nf = layout.m, len(layout.free)
        self.size = m + nf
        if self.size == 0:
            self.lu = None
            return
        schur = np.zeros((m, m))
        if len(layout.nonneg):
            Aw = layout.A_nn.multiply(scal.w[None, :] ** 2)
            schur += (Aw @ layout.A_nn.T).toarray()
        for blk, R in zip(layout.psd, scal.R):
            B = self._congruence_rows(blk, R)
            idx = np.ix_(blk.rows, blk.rows)
            schur[idx] += B @ B.T
        aug = np.zeros((self.size, self.size))
        aug[:m, :m] = schur
        if nf:
            aug[:m, m:] = layout.A_f
            aug[m:, :m] = layout.A_f.T
        self.aug = aug
        # Factor without regularization first; partial pivoting plus refinement
        # handles the (inevitably) ill-conditioned endgame better than a shift,
        # which crushes the small curvature directions.  Shift only on failure.
        scale = 1.0 + (np.abs(np.diag(schur)).max() if m else 0.0)
        self.lu = None
        for delta in (0.0, 1e-14 * scale, 1e-10 * scale, 1e-6 * scale):
            work = aug.copy()
            if delta:
                work[:m, :m] += delta * np.eye(m)
                if nf:
                    work[m:, m:] -= delta * np.eye(nf)
            try:
                lu = sla.lu_factor(work, check_finite=False)
            except (ValueError, sla.LinAlgError):
                continue
            if np.all(np.isfinite(lu[0])):
                self.lu = lu
                break
        if self.lu is None:
            raise SolverError("KKT factorization failed at all regularization levels")
        self.aug_ld = aug.astype(np.longdouble)
        self.A_ld = prog.A.astype(np.longdouble)

    @staticmethod
    def _congruence_rows(blk: _PsdBlock, R: np.ndarray) -> np.ndarray:
        """Rows svec(R^T A_i R) for every equality row i touching this block."""
        side = blk.side
        n_rows = len(blk.rows)
        B = np.empty((n_rows, blk.dim))
        chunk = max(1, min(n_rows, _CHUNK_DOUBLES // (side * side)))
        start = 0
        while start < n_rows:
            stop = min(start + chunk, n_rows)
            lo = np.searchsorted(blk.entry_row, start)
            hi = np.searchsorted(blk.entry_row, stop)
            buf = np.zeros(((stop - start), side * side))
            buf[blk.entry_row[lo:hi] - start, blk.entry_flat[lo:hi]] = blk.entry_val[lo:hi]
            mats = buf.reshape(stop - start, side, side)
            tmp = np.matmul(np.matmul(R.T, mats), R)
            B[start:stop] = tmp[:, blk.pc.ii, blk.pc.jj] * blk.pc.pack_scale
            start = stop
        return B

    def solve_augmented(self, rhs: np.ndarray, refine: int = 2) -> np.ndarray:
        if self.lu is None:
            return rhs.copy()
        z = sla.lu_solve(self.lu, rhs, check_finite=False)
        for _ in range(refine):
            # Residual in extended precision: the cancellation here is exactly
            # what limits the achievable complementarity floor.
            r = rhs - (self.aug_ld @ z.astype(np.longdouble)).astype(float)
            z += sla.lu_solve(self.lu, r, check_finite=False)
        return z

    def _solve_once(self, u: np.ndarray, v: np.ndarray):
        layout, scal = self.layout, self.scal
        m = layout.m
        tiu = _apply_theta_inv(layout, scal, u)
        rhs = np.concatenate([v + self.prog.A @ tiu, u[layout.free]])
        z = self.solve_augmented(rhs)
        q = z[:m]
        p = np.zeros(layout.n)
        p[layout.free] = z[m:]
        At_q = self.prog.A.T @ q
        p += _apply_theta_inv(layout, scal, At_q) - tiu
        return p, q

    def solve_kkt(self, u: np.ndarray, v: np.ndarray, refine: int = 2):
        """Solve -Theta p_c + A^T q = u (conic), A_f^T q = u_f, A p = v.

        Refinement rounds against the full (unreduced) KKT operator repair the
        accuracy lost in the Schur-complement elimination when Theta is nearly
        singular; residuals are accumulated in extended precision because the
        cancellation in -Theta p + A^T q is what sets the complementarity
        floor the solver can reach.
        """
        layout, scal = self.layout, self.scal
        p, q = self._solve_once(u, v)
        u_ld = u.astype(np.longdouble)
        v_ld = v.astype(np.longdouble)
        for _ in range(refine):
            At_q = self.A_ld.T @ q.astype(np.longdouble)
            r1_ld = u_ld - At_q + _apply_theta(layout, scal, p.astype(np.longdouble))
            r1 = r1_ld.astype(float)
            r1[layout.free] = (u_ld - At_q)[layout.free].astype(float)
            r2 = (v_ld - self.A_ld @ p.astype(np.longdouble)).astype(float)
            dp, dq = self._solve_once(r1, r2)
            p += dp
            q += dq
        return p, q


# -- main loop ------------------------------------------------------------------------


def _precompute_entry_chunks(layout: _Layout) -> None:
    # Entry arrays are already sorted by construction order, which is row-major
    # within each block submatrix only if scipy COO preserved it; sort to be safe.
    for blk in layout.psd:
        order = np.argsort(blk.entry_row, kind="stable")
        blk.entry_row = blk.entry_row[order]
        blk.entry_flat = blk.entry_flat[order]
        blk.entry_val = blk.entry_val[order]


def _equilibrate(prog: ConicProgram, passes: int = 3):
    """Ruiz equilibration respecting cone blocks.

    Rows get individual scales; free and nonneg columns get individual scales;
    all packed columns of one PSD block share a single scale so the scaling is
    a cone automorphism.
    """
    m, n = prog.A.shape
    groups: List[np.ndarray] = []
    offset = 0
    for kind, size in prog.cones:
        dim = cone_dim((kind, size))
        if kind == "psd":
            groups.append(np.arange(offset, offset + dim))
        else:
            for j in range(offset, offset + dim):
                groups.append(np.array([j]))
        offset += dim
    r = np.ones(m)
    d = np.ones(n)
    A = prog.A.copy()
    for _ in range(passes):
        if m:
            row_max = np.asarray(abs(A).max(axis=1).todense()).ravel()
            r_step = 1.0 / np.sqrt(np.maximum(row_max, 1e-300))
            A = sp.diags(r_step) @ A
            r *= r_step
        col_max = np.asarray(abs(A).max(axis=0).todense()).ravel()
        d_step = np.ones(n)
        for g in groups:
            peak = col_max[g].max()
            if peak > 0:
                d_step[g] = 1.0 / np.sqrt(peak)
        A = A @ sp.diags(d_step)
        d *= d_step
    return A.tocsr(), r, d


def solve(
    prog: ConicProgram,
    feastol: float = 1e-8,
    gaptol: float = 1e-8,
    max_iter: int = 200,
    verbose: int = 0,
) -> Solution:
    """Solve a conic program; see the module docstring for the method.

    The data is Ruiz-equilibrated internally (rows individually, PSD blocks
    uniformly, so cones are preserved); reported iterates and residuals refer
    to the original data.
    """
    A_eq, r, d = _equilibrate(prog)
    scaled = ConicProgram(c=prog.c * d, A=A_eq, b=prog.b * r, cones=prog.cones)
    sol = _solve_scaled(scaled, feastol, gaptol, max_iter, verbose)
    sol.x = sol.x * d
    sol.y = sol.y * r
    sol.s = sol.s / d
    sol.primal_objective = float(prog.c @ sol.x)
    sol.dual_objective = float(prog.b @ sol.y)
    # Residuals are recomputed against the caller's data.
    sol.primal_residual = float(np.linalg.norm(prog.A @ sol.x - prog.b)) / (
        1.0 + float(np.linalg.norm(prog.b))
    )
    sol.dual_residual = float(
        np.linalg.norm(prog.A.T @ sol.y + sol.s - prog.c)
    ) / (1.0 + float(np.linalg.norm(prog.c)))
    return sol


def _solve_scaled(
    prog: ConicProgram,
    feastol: float,
    gaptol: float,
    max_iter: int,
    verbose: int,
) -> Solution:
    layout = _Layout(prog)
    if layout.barrier_degree == 0:
        raise SolverError("program has no conic (nonneg or psd) variables")
    _precompute_entry_chunks(layout)
    A, b, c = prog.A, prog.b, prog.c
    m = layout.m
    norm_b = float(np.linalg.norm(b))
    norm_c = float(np.linalg.norm(c))
    e = _cone_identity(layout)
    nu = layout.barrier_degree + 1

    # Interior starting point from two least-squares solves with identity scaling.
    scal0 = _Scaling(layout, np.empty(0), np.empty(0), identity=True)
    kkt0 = _KKT(prog, layout, scal0)
    x, _ = kkt0.solve_kkt(np.zeros(layout.n), b.copy())
    shift = _min_eig_shift(layout, x)
    x[layout.conic] += (1.0 + max(0.0, -shift)) * e[layout.conic]
    rhs0 = np.concatenate([A[:, layout.conic] @ c[layout.conic], c[layout.free]])
    z0 = kkt0.solve_augmented(rhs0)
    y = z0[:m]
    s = c - A.T @ y
    s[layout.free] = 0.0
    shift = _min_eig_shift(layout, s)
    s[layout.conic] += (1.0 + max(0.0, -shift)) * e[layout.conic]
    tau, kappa = 1.0, 1.0

    best: Optional[tuple[float, Solution]] = None
    iteration = 0
    stall = 0
    best_prev = np.inf

    for iteration in range(1, max_iter + 1):
        r_p = A @ x - b * tau
        r_d = A.T @ y + s - c * tau
        r_g = float(c @ x - b @ y + kappa)
        mu = (float(x[layout.conic] @ s[layout.conic]) + tau * kappa) / nu

        # Candidate solution metrics.
        xs, ys, ss = x / tau, y / tau, s / tau
        pres = float(np.linalg.norm(A @ xs - b)) / (1.0 + norm_b)
        dres = float(np.linalg.norm(A.T @ ys + ss - c)) / (1.0 + norm_c)
        pobj = float(c @ xs)
        dobj = float(b @ ys)
        relgap = abs(pobj - dobj) / max(1.0, abs(pobj), abs(dobj))
        metric = max(pres, dres, relgap)
        sol = Solution(
            x=xs,
            y=ys,
            s=ss,
            status="near_optimal",
            iterations=iteration - 1,
            primal_objective=pobj,
            dual_objective=dobj,
            primal_residual=pres,
            dual_residual=dres,
            gap=relgap,
        )
        if best is None or metric < best[0]:
            best = (metric, sol)
        if verbose:
            print(
                f"iter {iteration - 1:3d}  pres {pres:9.2e}  dres {dres:9.2e}  "
                f"gap {relgap:9.2e}  mu {mu:9.2e}  tau {tau:9.2e}"
            )
        if pres <= feastol and dres <= feastol and relgap <= gaptol:
            sol.status = "optimal"
            return sol

        # Infeasibility certificates from the embedding: y with A^T y + s = 0,
        # b.y > 0 proves primal infeasibility; x in K with A x = 0, c.x < 0
        # proves unboundedness.
        by = float(b @ y)
        cx = float(c @ x)
        if by > 0 and float(np.linalg.norm(A.T @ y + s)) * max(1.0, norm_b) <= (
            feastol * by
        ):
            sol.status = "infeasible"
            return sol
        if cx < 0 and float(np.linalg.norm(A @ x)) * max(1.0, norm_c) <= (
            feastol * (-cx)
        ):
            sol.status = "unbounded"
            return sol
        if tau <= 1e-12 * max(1.0, kappa):
            raise SolverError(
                "embedding collapsed (tau -> 0) without a certificate",
                {"pres": pres, "dres": dres, "gap": relgap},
            )

        try:
            scal = _Scaling(layout, x, s)
            kkt = _KKT(prog, layout, scal)
        except SolverError:
            # The iterate reached the cone boundary to working precision.  If
            # nothing usable was found yet the breakdown is a real failure.
            if best[0] <= 1e-5:
                break
            raise
        lam = _lambda_vec(layout, scal)
        lam_sq = _jordan_product(layout, lam, lam)
        p1, q1 = kkt.solve_kkt(c.copy(), b.copy())
        den = float(c @ p1 - b @ q1) - kappa / tau

        def newton(eta: float, d_s: np.ndarray, d_tau: float):
            u = -eta * r_d - _finv(layout, scal, _lambda_solve(layout, scal, d_s))
            u[layout.free] = -eta * r_d[layout.free]
            v = -eta * r_p
            p2, q2 = kkt.solve_kkt(u, v)
            num = -eta * r_g - float(c @ p2 - b @ q2) - d_tau / tau
            dtau = num / den
            dx = p2 + dtau * p1
            dy = q2 + dtau * q1
            # Recover ds from the dual-feasibility row rather than the scaled
            # complementarity elimination: the latter multiplies KKT solve error
            # by the (increasingly ill-conditioned) NT scaling.
            ds = -eta * r_d - (A.T @ dy) + c * dtau
            ds[layout.free] = 0.0
            dkappa = (d_tau - kappa * dtau) / tau
            return dx, dy, ds, dtau, dkappa

        # Predictor (affine scaling direction).
        dxa, dya, dsa, dtaua, dkappaa = newton(1.0, -lam_sq, -tau * kappa)
        alpha_aff = _max_step(layout, scal, x, dxa, s, dsa)
        if dtaua < 0:
            alpha_aff = min(alpha_aff, -tau / dtaua)
        if dkappaa < 0:
            alpha_aff = min(alpha_aff, -kappa / dkappaa)
        alpha_aff = min(1.0, alpha_aff)
        sigma = max(0.0, min(1.0, (1.0 - alpha_aff))) ** 3

        # Corrector with Mehrotra second-order term.
        gxa, fsa = _scaled_products(layout, scal, dxa, dsa)
        corr = _jordan_product(layout, gxa, fsa)
        d_s = sigma * mu * e - lam_sq - corr
        d_tau = sigma * mu - tau * kappa - dtaua * dkappaa
        dx, dy, ds, dtau, dkappa = newton(1.0 - sigma, d_s, d_tau)

        def boundary_step(dx_, ds_, dtau_, dkappa_):
            a = _max_step(layout, scal, x, dx_, s, ds_)
            if dtau_ < 0:
                a = min(a, -tau / dtau_)
            if dkappa_ < 0:
                a = min(a, -kappa / dkappa_)
            return a

        alpha = min(1.0, _STEP_FRACTION * boundary_step(dx, ds, dtau, dkappa))
        if alpha < 0.05:
            # Degenerate endgame: the second-order correction can point out of
            # the cone.  Fall back to a plain recentering step if it is longer.
            d_s2 = 0.8 * mu * e - lam_sq
            d_tau2 = 0.8 * mu - tau * kappa
            cand = newton(0.2, d_s2, d_tau2)
            alpha2 = min(1.0, _STEP_FRACTION * boundary_step(cand[0], cand[2], cand[3], cand[4]))
            if alpha2 > alpha:
                dx, dy, ds, dtau, dkappa = cand
                alpha = alpha2
        # The scaled-space eigenvalue estimate of the boundary step can be
        # optimistic under extreme conditioning; back off until the step
        # verifiably stays interior.
        for _ in range(40):
            x_try = x + alpha * dx
            s_try = s + alpha * ds
            if (
                _min_eig_shift(layout, x_try) > 0.0
                and _min_eig_shift(layout, s_try) > 0.0
            ):
                break
            alpha *= 0.5
        x += alpha * dx
        y += alpha * dy
        s += alpha * ds
        tau += alpha * dtau
        kappa += alpha * dkappa

        if alpha < 1e-6 or best[0] > 0.99 * best_prev:
            stall += 1  # no meaningful progress on the best candidate
        else:
            stall = 0
        best_prev = best[0]
        if stall >= 12 or mu <= 1e-15:
            break

    assert best is not None
    sol = best[1]
    sol.status = "near_optimal" if best[0] <= 1e-5 else "max_iter"
    return sol


# Pluggable backend registry: external solvers register under a name and must
# honor the same solve(ConicProgram, **opts) -> Solution contract.
BACKENDS: Dict[str, Callable[..., Solution]] = {"interior_point": solve}


def get_backend(name: str) -> Callable[..., Solution]:
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(
            f"unknown solver backend {name!r}; available: {sorted(BACKENDS)}"
        ) from None
