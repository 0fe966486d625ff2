"""Sparse multivariate polynomial arithmetic.

A polynomial in n variables is stored as a dict mapping exponent tuples to
float coefficients:

    x1^2*x2 + 3.0  ->  {(2, 1): 1.0, (0, 0): 3.0}

Zero coefficients are pruned on construction, so two Polynomial objects are
equal iff their term dicts are equal.  All objects in this module are treated
as immutable after construction; every operation returns a new object.

Monomials are ordered graded-lexicographically (total degree first, then
tuple comparison), which makes the degree-r basis a prefix of the degree-r'
basis for r <= r'.
"""

from __future__ import annotations

import math
from itertools import combinations_with_replacement
from typing import Dict, Iterable, Mapping, Sequence, Tuple

import numpy as np

Exponent = Tuple[int, ...]


def total_degree(exponent: Exponent) -> int:
    """Total degree |beta| of an exponent tuple."""
    return sum(exponent)


class Polynomial:
    """Immutable sparse polynomial over a fixed number of named-by-index variables."""

    __slots__ = ("n_vars", "terms")

    def __init__(self, n_vars: int, terms: Mapping[Exponent, float] | None = None):
        if n_vars < 1:
            raise ValueError(f"n_vars must be >= 1, got {n_vars}")
        clean_terms: Dict[Exponent, float] = {}
        for exponent, coef in (terms or {}).items():
            exponent = tuple(int(e) for e in exponent)
            if len(exponent) != n_vars:
                raise ValueError(
                    f"exponent {exponent} has length {len(exponent)}, expected {n_vars}"
                )
            if any(e < 0 for e in exponent):
                raise ValueError(f"negative exponent in {exponent}")
            coef = float(coef)
            if coef != 0.0:
                clean_terms[exponent] = clean_terms.get(exponent, 0.0) + coef
        # A second pass: accumulation above may have produced exact zeros.
        self.terms = {e: c for e, c in clean_terms.items() if c != 0.0}
        self.n_vars = n_vars

    # -- constructors -------------------------------------------------------

    @staticmethod
    def zero(n_vars: int) -> "Polynomial":
        return Polynomial(n_vars, {})

    @staticmethod
    def constant(n_vars: int, value: float) -> "Polynomial":
        return Polynomial(n_vars, {(0,) * n_vars: value})

    @staticmethod
    def variable(n_vars: int, index: int) -> "Polynomial":
        if not 0 <= index < n_vars:
            raise ValueError(f"variable index {index} out of range for n_vars={n_vars}")
        exponent = [0] * n_vars
        exponent[index] = 1
        return Polynomial(n_vars, {tuple(exponent): 1.0})

    @staticmethod
    def monomial(exponent: Exponent, coef: float = 1.0) -> "Polynomial":
        return Polynomial(len(exponent), {tuple(exponent): coef})

    # -- basic queries -------------------------------------------------------

    @property
    def degree(self) -> int:
        """Total degree; the zero polynomial has degree 0 by convention."""
        if not self.terms:
            return 0
        return max(total_degree(e) for e in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, exponent: Exponent) -> float:
        return self.terms.get(tuple(exponent), 0.0)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.n_vars == other.n_vars and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.n_vars, frozenset(self.terms.items())))

    def __repr__(self) -> str:
        from .io import format_polynomial  # local import to avoid a cycle

        return f"Polynomial({self.n_vars}, {format_polynomial(self)!r})"

    # -- arithmetic ----------------------------------------------------------

    def _check_same_vars(self, other: "Polynomial") -> None:
        if self.n_vars != other.n_vars:
            raise ValueError(
                f"variable-count mismatch: {self.n_vars} vs {other.n_vars}"
            )

    def __add__(self, other: "Polynomial") -> "Polynomial":
        self._check_same_vars(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0.0) + c
        return Polynomial(self.n_vars, out)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        self._check_same_vars(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0.0) - c
        return Polynomial(self.n_vars, out)

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.n_vars, {e: -c for e, c in self.terms.items()})

    def __mul__(self, other: "Polynomial | float | int") -> "Polynomial":
        if isinstance(other, (int, float)):
            return self.scale(float(other))
        self._check_same_vars(other)
        out: Dict[Exponent, float] = {}
        for ea, ca in self.terms.items():
            for eb, cb in other.terms.items():
                e = tuple(a + b for a, b in zip(ea, eb))
                out[e] = out.get(e, 0.0) + ca * cb
        return Polynomial(self.n_vars, out)

    def __rmul__(self, other: float | int) -> "Polynomial":
        return self.scale(float(other))

    def scale(self, factor: float) -> "Polynomial":
        return Polynomial(self.n_vars, {e: factor * c for e, c in self.terms.items()})

    def __pow__(self, power: int) -> "Polynomial":
        if power < 0:
            raise ValueError("negative powers are not defined for polynomials")
        result = Polynomial.constant(self.n_vars, 1.0)
        base = self
        k = power
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def clean(self, eps: float = 1e-12) -> "Polynomial":
        """Drop terms with |coefficient| < eps (post-solve certificate cleanup)."""
        return Polynomial(self.n_vars, {e: c for e, c in self.terms.items() if abs(c) >= eps})

    # -- evaluation and composition -------------------------------------------

    def evaluate(self, point: Sequence[float]) -> float:
        """Evaluate at a single point by direct term summation."""
        if len(point) != self.n_vars:
            raise ValueError(
                f"point has dimension {len(point)}, expected {self.n_vars}"
            )
        total = 0.0
        for exponent, coef in self.terms.items():
            term = coef
            for value, e in zip(point, exponent):
                if e:
                    term *= value ** e
            total += term
        return total

    def __call__(self, point: Sequence[float]) -> float:
        return self.evaluate(point)

    def evaluate_batch(self, points: np.ndarray) -> np.ndarray:
        """Evaluate at an (m, n_vars) array of points; returns shape (m,)."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.n_vars:
            raise ValueError(
                f"points must have shape (m, {self.n_vars}), got {pts.shape}"
            )
        out = np.zeros(pts.shape[0])
        for exponent, coef in self.terms.items():
            term = np.full(pts.shape[0], coef)
            for i, e in enumerate(exponent):
                if e:
                    term *= pts[:, i] ** e
            out += term
        return out

    def compose(self, maps: Sequence["Polynomial"]) -> "Polynomial":
        """Substitute each variable x_i by maps[i]; returns p(f_1(x), ..., f_n(x))."""
        if len(maps) != self.n_vars:
            raise ValueError(
                f"compose needs {self.n_vars} substitution polynomials, got {len(maps)}"
            )
        m_vars = maps[0].n_vars
        for f in maps:
            if f.n_vars != m_vars:
                raise ValueError("substitution polynomials disagree on variable count")
        power_cache: Dict[Tuple[int, int], Polynomial] = {}

        def f_power(i: int, k: int) -> Polynomial:
            key = (i, k)
            if key not in power_cache:
                power_cache[key] = maps[i] ** k
            return power_cache[key]

        result = Polynomial.zero(m_vars)
        for exponent, coef in self.terms.items():
            term = Polynomial.constant(m_vars, coef)
            for i, e in enumerate(exponent):
                if e:
                    term = term * f_power(i, e)
            result = result + term
        return result


class MonomialBasis:
    """The graded-lex ordered monomial basis of R_r[x1..xn] (all |beta| <= max_degree)."""

    __slots__ = ("n_vars", "max_degree", "exponents", "index")

    def __init__(self, n_vars: int, max_degree: int):
        if n_vars < 1:
            raise ValueError(f"n_vars must be >= 1, got {n_vars}")
        if max_degree < 0:
            raise ValueError(f"max_degree must be >= 0, got {max_degree}")
        self.n_vars = n_vars
        self.max_degree = max_degree
        self.exponents = _graded_lex_exponents(n_vars, max_degree)
        self.index = {e: i for i, e in enumerate(self.exponents)}

    def __len__(self) -> int:
        return len(self.exponents)

    def __iter__(self) -> Iterable[Exponent]:
        return iter(self.exponents)

    def __getitem__(self, i: int) -> Exponent:
        return self.exponents[i]

    def index_of(self, exponent: Exponent) -> int:
        return self.index[tuple(exponent)]


def _graded_lex_exponents(n_vars: int, max_degree: int) -> list[Exponent]:
    out: list[Exponent] = []
    for degree in range(max_degree + 1):
        # Positions of "bars" in a stars-and-bars layout enumerate the degree-d
        # slice; sorting the slice lexicographically keeps the graded-lex order.
        slice_exps = []
        for bars in combinations_with_replacement(range(n_vars), degree):
            e = [0] * n_vars
            for i in bars:
                e[i] += 1
            slice_exps.append(tuple(e))
        out.extend(sorted(slice_exps))
    return out


def enumerate_basis(n_vars: int, max_degree: int) -> MonomialBasis:
    """All exponents beta with |beta| <= max_degree, graded-lex ordered.

    The length is binomial(n_vars + max_degree, max_degree).
    """
    return MonomialBasis(n_vars, max_degree)


def basis_size(n_vars: int, max_degree: int) -> int:
    """binomial(n + r, r) without materializing the basis."""
    return math.comb(n_vars + max_degree, max_degree)


def coefficient_vector(p: Polynomial, basis: MonomialBasis) -> np.ndarray:
    """Coefficients of p aligned with the basis ordering."""
    if p.n_vars != basis.n_vars:
        raise ValueError(
            f"polynomial has {p.n_vars} variables but basis has {basis.n_vars}"
        )
    vec = np.zeros(len(basis))
    for exponent, coef in p.terms.items():
        i = basis.index.get(exponent)
        if i is None:
            raise ValueError(
                f"monomial {exponent} of degree {total_degree(exponent)} does not fit "
                f"in a basis of max degree {basis.max_degree}"
            )
        vec[i] = coef
    return vec


def from_coefficient_vector(vec: Sequence[float], basis: MonomialBasis) -> Polynomial:
    """Inverse of coefficient_vector."""
    if len(vec) != len(basis):
        raise ValueError(f"vector length {len(vec)} != basis length {len(basis)}")
    return Polynomial(basis.n_vars, {e: float(c) for e, c in zip(basis.exponents, vec)})


def affine_polynomials(center: Sequence[float], matrix: np.ndarray) -> list[Polynomial]:
    """Polynomials for the affine map u -> center + matrix @ u, one per output axis."""
    matrix = np.asarray(matrix, dtype=float)
    n = matrix.shape[0]
    out = []
    for i in range(n):
        terms: Dict[Exponent, float] = {(0,) * n: float(center[i])}
        for j in range(n):
            if matrix[i, j] != 0.0:
                e = [0] * n
                e[j] = 1
                terms[tuple(e)] = matrix[i, j]
        out.append(Polynomial(n, terms))
    return out
