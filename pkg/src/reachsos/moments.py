"""Analytic Lebesgue moments on simple geometries, with a Monte Carlo oracle.

The supported geometries are axis-aligned boxes, balls and ellipsoids; these
are the state-constraint shapes for which all moments

    y_beta = integral of x^beta over the geometry

have closed forms.  Boxes factor into one-dimensional antiderivatives.  Balls
and ellipsoids reduce to the unit ball through the affine substitution
x = c + L u (with |det L| as the Jacobian factor), where the unit-ball moments
are products of Gamma functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Sequence, Tuple

import numpy as np

from .polynomials import (
    Exponent,
    MonomialBasis,
    Polynomial,
    affine_polynomials,
    enumerate_basis,
    total_degree,
)

_DEFINITE_EIG_TOL = 1e-10


class DomainGeometry:
    """A box, ball or ellipsoid domain; `kind` is one of "box", "ball", "ellipsoid".

    Ellipsoids are {x : (x - center)^T shape (x - center) <= 1} with a symmetric
    positive definite shape matrix.
    """

    __slots__ = ("kind", "n_vars", "bounds", "center", "radius", "shape")

    def __init__(self, kind, n_vars, bounds=None, center=None, radius=None, shape=None):
        self.kind = kind
        self.n_vars = n_vars
        self.bounds = bounds
        self.center = center
        self.radius = radius
        self.shape = shape

    @staticmethod
    def box(bounds: Sequence[Tuple[float, float]]) -> "DomainGeometry":
        bounds = [(float(a), float(b)) for a, b in bounds]
        for i, (a, b) in enumerate(bounds):
            if not a < b:
                raise ValueError(f"box axis {i}: lower bound {a} must be < upper {b}")
        return DomainGeometry("box", len(bounds), bounds=bounds)

    @staticmethod
    def ball(center: Sequence[float], radius: float) -> "DomainGeometry":
        center = np.asarray(center, dtype=float)
        if radius <= 0:
            raise ValueError(f"ball radius must be positive, got {radius}")
        return DomainGeometry("ball", len(center), center=center, radius=float(radius))

    @staticmethod
    def ellipsoid(center: Sequence[float], shape: np.ndarray) -> "DomainGeometry":
        center = np.asarray(center, dtype=float)
        shape = np.asarray(shape, dtype=float)
        if shape.shape != (len(center), len(center)):
            raise ValueError("shape matrix dimensions do not match the center")
        if not np.allclose(shape, shape.T, atol=1e-12):
            raise ValueError("shape matrix must be symmetric")
        if np.linalg.eigvalsh(shape).min() <= _DEFINITE_EIG_TOL:
            raise ValueError("shape matrix must be positive definite")
        return DomainGeometry("ellipsoid", len(center), center=center, shape=shape)

    # -- geometry queries ------------------------------------------------------

    def bounding_box(self) -> list[Tuple[float, float]]:
        if self.kind == "box":
            return list(self.bounds)
        if self.kind == "ball":
            return [(c - self.radius, c + self.radius) for c in self.center]
        # Axis extent of {u^T G u <= 1} along e_i is sqrt((G^{-1})_{ii}).
        inv = np.linalg.inv(self.shape)
        half = np.sqrt(np.diag(inv))
        return [(c - h, c + h) for c, h in zip(self.center, half)]

    def contains(self, points: np.ndarray, tol: float = 0.0) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.kind == "box":
            lo = np.array([a for a, _ in self.bounds])
            hi = np.array([b for _, b in self.bounds])
            return np.all((pts >= lo - tol) & (pts <= hi + tol), axis=1)
        diff = pts - np.asarray(self.center)
        if self.kind == "ball":
            return np.einsum("ij,ij->i", diff, diff) <= self.radius**2 + tol
        return np.einsum("ij,jk,ik->i", diff, self.shape, diff) <= 1.0 + tol

    def volume(self) -> float:
        return geometry_moment(self, (0,) * self.n_vars)

    def to_unit_map(self) -> Tuple[np.ndarray, np.ndarray]:
        """(center, L) with x = center + L u mapping the unit box/ball onto this geometry.

        Boxes map from [-1, 1]^n, balls and ellipsoids from the unit ball.
        """
        n = self.n_vars
        if self.kind == "box":
            c = np.array([(a + b) / 2.0 for a, b in self.bounds])
            L = np.diag([(b - a) / 2.0 for a, b in self.bounds])
            return c, L
        if self.kind == "ball":
            return np.asarray(self.center, dtype=float), self.radius * np.eye(n)
        evals, evecs = np.linalg.eigh(self.shape)
        L = evecs @ np.diag(1.0 / np.sqrt(evals)) @ evecs.T
        return np.asarray(self.center, dtype=float), L

    def unit_geometry(self) -> "DomainGeometry":
        """The geometry to_unit_map() pulls this one back to."""
        n = self.n_vars
        if self.kind == "box":
            return DomainGeometry.box([(-1.0, 1.0)] * n)
        return DomainGeometry.ball([0.0] * n, 1.0)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """n points uniform on the geometry (rejection from the bounding box)."""
        if self.kind == "box":
            lo = np.array([a for a, _ in self.bounds])
            hi = np.array([b for _, b in self.bounds])
            return rng.uniform(lo, hi, size=(n, self.n_vars))
        box = self.bounding_box()
        lo = np.array([a for a, _ in box])
        hi = np.array([b for _, b in box])
        out = np.empty((n, self.n_vars))
        got = 0
        while got < n:
            batch = rng.uniform(lo, hi, size=(max(n, 1024), self.n_vars))
            keep = batch[self.contains(batch)]
            take = min(len(keep), n - got)
            out[got : got + take] = keep[:take]
            got += take
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DomainGeometry):
            return NotImplemented
        if self.kind != other.kind or self.n_vars != other.n_vars:
            return False
        if self.kind == "box":
            return self.bounds == other.bounds
        if self.kind == "ball":
            return bool(np.all(self.center == other.center)) and self.radius == other.radius
        return bool(np.all(self.center == other.center)) and bool(
            np.all(self.shape == other.shape)
        )


@dataclass
class MomentSequence:
    """Moments of a measure, complete on all |beta| <= max_degree."""

    n_vars: int
    max_degree: int
    values: Dict[Exponent, float] = field(default_factory=dict)

    def __getitem__(self, beta: Exponent) -> float:
        return self.values[tuple(beta)]

    def functional(self, p: Polynomial) -> float:
        """ell_y(p) = sum of p_beta * y_beta."""
        return sum(c * self.values[e] for e, c in p.terms.items())

    def vector(self, basis: MonomialBasis) -> np.ndarray:
        return np.array([self.values[e] for e in basis.exponents])


def _unit_ball_moment(n: int, beta: Exponent) -> float:
    if any(b % 2 for b in beta):
        return 0.0
    log_num = sum(math.lgamma((b + 1) / 2.0) for b in beta)
    log_den = math.lgamma((n + total_degree(beta)) / 2.0 + 1.0)
    return math.exp(log_num - log_den)


def _box_moment(bounds: Sequence[Tuple[float, float]], beta: Exponent) -> float:
    value = 1.0
    for (a, b), k in zip(bounds, beta):
        value *= (b ** (k + 1) - a ** (k + 1)) / (k + 1)
    return value


def geometry_moment(geometry: DomainGeometry, beta: Exponent) -> float:
    """Analytic moment of the Lebesgue measure restricted to the geometry."""
    beta = tuple(int(b) for b in beta)
    if len(beta) != geometry.n_vars:
        raise ValueError(f"beta {beta} has wrong length for n_vars={geometry.n_vars}")
    if geometry.kind == "box":
        return _box_moment(geometry.bounds, beta)
    n = geometry.n_vars
    center, L = geometry.to_unit_map()
    det = abs(float(np.linalg.det(L)))
    if np.allclose(center, 0.0) and np.allclose(L, L[0, 0] * np.eye(n)):
        # Centered ball: homogeneity avoids the polynomial expansion.
        r = L[0, 0]
        return det * r ** total_degree(beta) * _unit_ball_moment(n, beta)
    # General case: expand (center + L u)^beta and integrate term by term.
    axes = affine_polynomials(center, L)
    expanded = Polynomial.constant(n, 1.0)
    for i, k in enumerate(beta):
        if k:
            expanded = expanded * axes[i] ** k
    return det * sum(
        c * _unit_ball_moment(n, e) for e, c in expanded.terms.items()
    )


def moment_vector(geometry: DomainGeometry, max_degree: int) -> MomentSequence:
    """All moments with |beta| <= max_degree, as a complete MomentSequence."""
    if max_degree < 0:
        raise ValueError(f"max_degree must be >= 0, got {max_degree}")
    basis = enumerate_basis(geometry.n_vars, max_degree)
    values = {beta: geometry_moment(geometry, beta) for beta in basis.exponents}
    return MomentSequence(geometry.n_vars, max_degree, values)


def mc_moment(
    geometry: DomainGeometry,
    beta: Exponent,
    n_samples: int,
    seed: int,
) -> Tuple[float, float]:
    """Monte Carlo estimate of a geometry moment with its standard error.

    Samples uniformly over the bounding box and rejects points outside the
    geometry, so the estimate is unbiased for the restricted integral.
    """
    if n_samples < 1000:
        raise ValueError(f"n_samples must be >= 1000, got {n_samples}")
    beta = tuple(int(b) for b in beta)
    rng = np.random.default_rng(seed)
    box = geometry.bounding_box()
    lo = np.array([a for a, _ in box])
    hi = np.array([b for _, b in box])
    box_vol = float(np.prod(hi - lo))
    pts = rng.uniform(lo, hi, size=(n_samples, geometry.n_vars))
    values = np.ones(n_samples)
    for i, k in enumerate(beta):
        if k:
            values *= pts[:, i] ** k
    if geometry.kind != "box":
        values = values * geometry.contains(pts)
    estimate = box_vol * float(np.mean(values))
    stderr = box_vol * float(np.std(values, ddof=1)) / math.sqrt(n_samples)
    return estimate, stderr
