"""Semialgebraic sets, polynomial dynamics, and the reachability problem data.

A basic semialgebraic set is {x : g_1(x) >= 0, ..., g_m(x) >= 0}.  The state
set must satisfy an Archimedean condition (one defining inequality of the form
N - |x|^2 >= 0); `validate_archimedean` appends such a ball constraint when it
is not already syntactically present, using a bound derived from the declared
geometry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .moments import DomainGeometry
from .polynomials import Polynomial

DEFAULT_SEED = 0xC0FFEE

_BALL_PATTERN_TOL = 1e-9


@dataclass
class SemialgebraicSet:
    """{x in R^n : g_j(x) >= 0 for every inequality g_j}."""

    n_vars: int
    inequalities: List[Polynomial]

    def __post_init__(self):
        if not self.inequalities:
            raise ValueError("a semialgebraic set needs at least one inequality")
        for g in self.inequalities:
            if g.n_vars != self.n_vars:
                raise ValueError(
                    f"inequality over {g.n_vars} variables in a set with {self.n_vars}"
                )

    def contains(self, points: np.ndarray, tol: float = 0.0) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        ok = np.ones(pts.shape[0], dtype=bool)
        for g in self.inequalities:
            ok &= g.evaluate_batch(pts) >= -tol
        return ok


def half_degrees(sset: SemialgebraicSet) -> List[int]:
    """r_j = ceil(deg(g_j) / 2) per inequality (the implicit g_0 = 1 has r_0 = 0)."""
    return [math.ceil(g.degree / 2) for g in sset.inequalities]


def _find_ball_constraint(sset: SemialgebraicSet) -> Optional[int]:
    """Index of a constraint syntactically equal to N - |x|^2 with N > 0, else None."""
    n = sset.n_vars
    for idx, g in enumerate(sset.inequalities):
        if g.degree != 2:
            continue
        ok = True
        constant = 0.0
        for exponent, coef in g.terms.items():
            degree = sum(exponent)
            if degree == 0:
                constant = coef
            elif degree == 1:
                ok = False
                break
            else:
                if exponent.count(2) == 1 and exponent.count(0) == n - 1:
                    if abs(coef + 1.0) > _BALL_PATTERN_TOL:
                        ok = False
                        break
                else:  # cross term
                    ok = False
                    break
        if not ok or constant <= 0.0:
            continue
        # All n squares must actually appear with coefficient -1.
        squares = sum(
            1
            for exponent in g.terms
            if exponent.count(2) == 1 and exponent.count(0) == n - 1
        )
        if squares == n:
            return idx
    return None


def ball_constraint(n_vars: int, bound: float) -> Polynomial:
    """The polynomial bound - (x_1^2 + ... + x_n^2)."""
    terms = {(0,) * n_vars: float(bound)}
    for i in range(n_vars):
        e = [0] * n_vars
        e[i] = 2
        terms[tuple(e)] = -1.0
    return Polynomial(n_vars, terms)


def bound_from_box(bounds: Sequence[tuple[float, float]]) -> float:
    """Sum of squared per-axis max-abs bounds: the smallest ball certificate a box gives."""
    return float(sum(max(abs(a), abs(b)) ** 2 for a, b in bounds))


def validate_archimedean(
    sset: SemialgebraicSet, bound_hint: Optional[float] = None
) -> tuple[SemialgebraicSet, bool]:
    """Ensure a ball constraint N - |x|^2 is among the inequalities.

    Returns (possibly augmented set, True if a constraint was appended).  When
    no syntactic ball constraint is present, bound_hint must be positive.
    """
    if _find_ball_constraint(sset) is not None:
        return sset, False
    if bound_hint is None:
        raise ValueError(
            "set has no ball constraint N - |x|^2 and no bound hint was given; "
            "compactness cannot be certified"
        )
    if bound_hint <= 0:
        raise ValueError(f"bound_hint must be positive, got {bound_hint}")
    augmented = SemialgebraicSet(
        sset.n_vars, list(sset.inequalities) + [ball_constraint(sset.n_vars, bound_hint)]
    )
    return augmented, True


@dataclass
class DynamicalSystem:
    """x_{t+1} = f(x_t) with polynomial components f_1..f_n."""

    components: List[Polynomial]

    def __post_init__(self):
        n = len(self.components)
        if n < 1:
            raise ValueError("a dynamical system needs at least one component")
        for f in self.components:
            if f.n_vars != n:
                raise ValueError(
                    f"{n} components but component over {f.n_vars} variables"
                )

    @property
    def n_vars(self) -> int:
        return len(self.components)

    @property
    def degree(self) -> int:
        """max deg f_i, floored at 1 so relaxation bookkeeping stays valid for constants."""
        return max(1, max(f.degree for f in self.components))

    def step(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.column_stack([f.evaluate_batch(pts) for f in self.components])


@dataclass
class ReachProblem:
    """One reachability instance: initial set, state set, dynamics, horizon mode.

    horizon is the mass bound T; u_zero=True instead pins the scalar dual
    variable u to zero (no mass constraint).  assume_closure records the
    user's assertion that vol(reachable set) equals vol(its closure), which
    is not machine-checkable.
    """

    init: SemialgebraicSet
    init_geometry: DomainGeometry
    state: SemialgebraicSet
    state_geometry: DomainGeometry
    system: DynamicalSystem
    horizon: int = 100
    u_zero: bool = False
    name: str = "problem"
    assume_closure: bool = True
    archimedean_added: bool = field(default=False)

    def __post_init__(self):
        n = self.system.n_vars
        for label, nv in [
            ("init set", self.init.n_vars),
            ("state set", self.state.n_vars),
            ("init geometry", self.init_geometry.n_vars),
            ("state geometry", self.state_geometry.n_vars),
        ]:
            if nv != n:
                raise ValueError(f"{label} has {nv} variables, dynamics have {n}")
        if not self.u_zero and self.horizon < 1:
            raise ValueError(f"horizon must be a positive integer, got {self.horizon}")
        if _find_ball_constraint(self.state) is None:
            state, added = validate_archimedean(
                self.state, bound_from_box(self.state_geometry.bounding_box())
            )
            self.state = state
            self.archimedean_added = added

    @property
    def n_vars(self) -> int:
        return self.system.n_vars

    @property
    def r_min(self) -> int:
        """Smallest admissible relaxation order.

        Covers the half-degrees of every defining inequality and ceil(d/2) for
        the dynamics degree d, so all Gram blocks have nonnegative order.
        """
        degs = half_degrees(self.init) + half_degrees(self.state)
        return max(degs + [math.ceil(self.system.degree / 2)])

    def state_inequalities_without_ball(self) -> List[Polynomial]:
        """State inequalities minus the auto-appended Archimedean ball (if any)."""
        if self.archimedean_added:
            return self.state.inequalities[:-1]
        return list(self.state.inequalities)
