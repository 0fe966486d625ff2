"""Empirical validation of certificates against simulated trajectories.

A converged certificate (u, v, w) promises that every state reachable within
T steps satisfies v(x) + u*T >= 0, and that {v >= 0} contains the whole
infinite-horizon reachable set when u = 0.  This module samples the initial
set, iterates the dynamics, checks those margins, and estimates the volume of
the certified super-level set by Monte Carlo.  All randomness is driven by
explicit seeds; a fixed (seed, order) pair reproduces results bit for bit.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .assembly import Certificate, SolveOutcome, solve_dual
from .moments import DomainGeometry
from .sets import DEFAULT_SEED, ReachProblem, SemialgebraicSet

CONTAINMENT_TOL = 1e-6
U_VALIDATION_THRESHOLD = 1e-5
DEFAULT_STEPS = 7
DEFAULT_CONTAINMENT_SAMPLES = 1000
DEFAULT_VOLUME_SAMPLES = 100_000

_MAX_REJECTION_FACTOR = 1_000_000
_DIVERGENCE_LIMIT = 1e12


class SamplingError(RuntimeError):
    """Rejection sampling exhausted its budget: the set is (nearly) empty."""


def sample_set(
    sset: SemialgebraicSet,
    geometry: DomainGeometry,
    n: int,
    seed: int,
) -> np.ndarray:
    """n points uniform on the set, by rejection from the geometry's bounding box."""
    rng = np.random.default_rng(seed)
    box = geometry.bounding_box()
    lo = np.array([a for a, _ in box])
    hi = np.array([b for _, b in box])
    out = np.empty((n, sset.n_vars))
    got = 0
    drawn = 0
    budget = _MAX_REJECTION_FACTOR * n
    while got < n:
        batch_size = min(max(4 * n, 1024), budget - drawn)
        if batch_size <= 0:
            raise SamplingError(
                f"rejection sampling drew {drawn} points but only accepted {got}; "
                "the set appears to be empty within its bounding box"
            )
        batch = rng.uniform(lo, hi, size=(batch_size, sset.n_vars))
        drawn += batch_size
        keep = batch[sset.contains(batch) & geometry.contains(batch)]
        take = min(len(keep), n - got)
        out[got : got + take] = keep[:take]
        got += take
    return out


@dataclass
class TrajectoryBatch:
    """Forward iterates of a point cloud: states[t] holds all points after t steps."""

    states: List[np.ndarray]
    seed: int
    steps: int
    escaped_state_set: int = 0  # points that left the declared state geometry
    diverged: bool = False

    @property
    def initial(self) -> np.ndarray:
        return self.states[0]

    def all_points(self) -> np.ndarray:
        return np.vstack(self.states)


def simulate(problem: ReachProblem, points: np.ndarray, steps: int, seed: int = 0) -> TrajectoryBatch:
    """Iterate the dynamics; escapes from the state geometry are counted, not clipped."""
    if steps < 0:
        raise ValueError(f"steps must be >= 0, got {steps}")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    inside = problem.init.contains(pts, tol=1e-12)
    if not np.all(inside):
        raise ValueError(
            f"{int((~inside).sum())} of {len(pts)} initial points violate the "
            "initial-set inequalities"
        )
    states = [pts]
    escaped = 0
    diverged = False
    current = pts
    for _ in range(steps):
        current = problem.system.step(current)
        if not np.all(np.isfinite(current)) or np.max(np.abs(current)) > _DIVERGENCE_LIMIT:
            diverged = True
            states.append(current)
            break
        escaped += int((~problem.state_geometry.contains(current, tol=1e-9)).sum())
        states.append(current)
    return TrajectoryBatch(
        states=states, seed=seed, steps=steps, escaped_state_set=escaped, diverged=diverged
    )


@dataclass
class CertReport:
    """Per-run validation summary for one certificate."""

    problem: str
    order: int  # 2r
    u: float
    objective: float
    horizon: Optional[int]
    u_zero: bool
    containment_samples: int
    containment_steps: int
    violations: int
    worst_margin: float
    volume_estimate: float
    volume_ci: float
    volume_samples: int
    seed: int
    solver_status: str
    solver_iterations: int
    reconstruction_residual: float
    escaped_state_set: int = 0
    runtime: float = 0.0  # wall-clock seconds; excluded from serialized reports

    @property
    def containment_ok(self) -> bool:
        return self.violations == 0

    @property
    def u_validated(self) -> bool:
        """A vanishing u certifies the occupation-mass bound was not binding."""
        return abs(self.u) < U_VALIDATION_THRESHOLD


def check_containment(
    certificate: Certificate, batch: TrajectoryBatch, horizon_bound: Optional[int] = None
) -> tuple[int, float]:
    """(violation count, worst margin) of v(x) + u*T over every simulated point."""
    t_bound = horizon_bound if horizon_bound is not None else certificate.horizon
    shift = certificate.u * t_bound if t_bound is not None else 0.0
    margins = certificate.v.evaluate_batch(batch.all_points()) + shift
    worst = float(margins.min())
    violations = int((margins < -CONTAINMENT_TOL).sum())
    return violations, worst


def mc_volume(
    certificate: Certificate,
    geometry: DomainGeometry,
    n: int = DEFAULT_VOLUME_SAMPLES,
    seed: int = DEFAULT_SEED,
    horizon_bound: Optional[int] = None,
) -> tuple[float, float]:
    """Monte Carlo volume of the certified super-level set inside the geometry.

    Returns (estimate, 95% confidence half-width).  With u = 0 the set is
    {v >= 0}; otherwise the horizon-T outer set {v + u*T >= 0} is measured.
    """
    if n < 10_000:
        raise ValueError(f"volume estimation needs n >= 10000 samples, got {n}")
    rng = np.random.default_rng(seed)
    pts = geometry.sample(rng, n)
    t_bound = horizon_bound if horizon_bound is not None else certificate.horizon
    shift = certificate.u * t_bound if t_bound is not None else 0.0
    inside = (certificate.v.evaluate_batch(pts) + shift) >= 0.0
    frac = float(inside.mean())
    vol = geometry.volume()
    half_width = 1.96 * vol * float(np.sqrt(max(frac * (1.0 - frac), 0.0) / n))
    return vol * frac, half_width


def certify(
    problem: ReachProblem,
    outcome: SolveOutcome,
    samples: int = DEFAULT_CONTAINMENT_SAMPLES,
    steps: int = DEFAULT_STEPS,
    volume_samples: int = DEFAULT_VOLUME_SAMPLES,
    seed: int = DEFAULT_SEED,
    runtime: float = 0.0,
) -> CertReport:
    """Run the full empirical validation for one solved relaxation."""
    cert = outcome.certificate
    t0 = time.perf_counter()
    init_points = sample_set(problem.init, problem.init_geometry, samples, seed)
    batch = simulate(problem, init_points, steps, seed)
    violations, worst = check_containment(cert, batch)
    vol, ci = mc_volume(cert, problem.state_geometry, volume_samples, seed)
    return CertReport(
        problem=problem.name,
        order=2 * cert.order,
        u=cert.u,
        objective=outcome.objective,
        horizon=cert.horizon,
        u_zero=cert.u_zero,
        containment_samples=samples,
        containment_steps=steps,
        violations=violations,
        worst_margin=worst,
        volume_estimate=vol,
        volume_ci=ci,
        volume_samples=volume_samples,
        seed=seed,
        solver_status=outcome.solution.status,
        solver_iterations=outcome.solution.iterations,
        reconstruction_residual=cert.max_reconstruction_residual,
        escaped_state_set=batch.escaped_state_set,
        runtime=runtime + (time.perf_counter() - t0),
    )


@dataclass
class SweepResult:
    reports: List[CertReport]
    outcomes: List[Optional[SolveOutcome]]
    failures: List[tuple[int, str]] = field(default_factory=list)

    @property
    def objectives_non_increasing(self) -> bool:
        objs = [r.objective for r in self.reports]
        return all(b <= a + 1e-7 for a, b in zip(objs, objs[1:]))


def run_order_sweep(
    problem: ReachProblem,
    orders: Sequence[int],
    samples: int = DEFAULT_CONTAINMENT_SAMPLES,
    steps: int = DEFAULT_STEPS,
    volume_samples: int = DEFAULT_VOLUME_SAMPLES,
    seed: int = DEFAULT_SEED,
    **solver_opts,
) -> SweepResult:
    """Solve and validate one relaxation per order (2r values, ascending).

    A failed solve is recorded and the sweep continues.  Each order gets its
    own RNG stream derived from (seed, order), so results do not depend on
    execution order.
    """
    if list(orders) != sorted(orders):
        raise ValueError("orders must be ascending")
    reports: List[CertReport] = []
    outcomes: List[Optional[SolveOutcome]] = []
    failures: List[tuple[int, str]] = []
    for order in orders:
        order_seed = int(np.random.SeedSequence([seed, order]).generate_state(1)[0])
        t0 = time.perf_counter()
        try:
            outcome = solve_dual(problem, order, **solver_opts)
        except Exception as exc:  # a failed order must not abort the sweep
            failures.append((order, str(exc)))
            outcomes.append(None)
            continue
        runtime = time.perf_counter() - t0
        outcomes.append(outcome)
        reports.append(
            certify(
                problem,
                outcome,
                samples=samples,
                steps=steps,
                volume_samples=volume_samples,
                seed=order_seed,
                runtime=runtime,
            )
        )
    return SweepResult(reports=reports, outcomes=outcomes, failures=failures)
