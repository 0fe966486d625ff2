import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reachsos.polynomials import (
    MonomialBasis,
    Polynomial,
    basis_size,
    coefficient_vector,
    enumerate_basis,
    from_coefficient_vector,
)


def brute_force_basis(n, r):
    """Independent enumeration oracle: product space filtered by total degree."""
    return sorted(
        (e for e in itertools.product(range(r + 1), repeat=n) if sum(e) <= r),
        key=lambda e: (sum(e), e),
    )


def random_polynomial(rng, n_vars, degree, n_terms=6):
    basis = enumerate_basis(n_vars, degree)
    terms = {}
    for _ in range(n_terms):
        e = basis[rng.integers(len(basis))]
        terms[e] = rng.normal()
    return Polynomial(n_vars, terms)


class TestBasis:
    def test_degree_one_two_vars(self):
        basis = enumerate_basis(2, 1)
        assert basis.exponents == [(0, 0), (0, 1), (1, 0)]
        assert len(basis) == math.comb(3, 1)

    def test_degree_two_two_vars_length(self):
        assert len(enumerate_basis(2, 2)) == 6

    def test_three_vars_degree_three_against_oracle(self):
        basis = enumerate_basis(3, 3)
        assert len(basis) == 20
        assert basis.exponents == brute_force_basis(3, 3)

    def test_cardinality_matches_binomial(self):
        for n in range(1, 5):
            for r in range(0, 9):
                assert len(enumerate_basis(n, r)) == math.comb(n + r, r)
                assert basis_size(n, r) == math.comb(n + r, r)

    def test_graded_prefix_property(self):
        small = enumerate_basis(3, 2)
        large = enumerate_basis(3, 5)
        assert large.exponents[: len(small)] == small.exponents

    def test_index_lookup_is_bijection(self):
        basis = enumerate_basis(2, 4)
        for i, e in enumerate(basis.exponents):
            assert basis.index_of(e) == i


class TestArithmetic:
    def test_monomial_product(self):
        x1 = Polynomial.variable(2, 0)
        assert (x1 * x1).terms == {(2, 0): 1.0}

    def test_scaled_expansion(self):
        # half of (x1 + 2 x1 x2) expands to 0.5 x1 + x1 x2
        inner = Polynomial(2, {(1, 0): 1.0, (1, 1): 2.0})
        assert inner.scale(0.5).terms == {(1, 0): 0.5, (1, 1): 1.0}

    def test_cancellation_prunes_to_empty(self):
        p = Polynomial(2, {(1, 0): 1.0, (0, 1): 1.0})
        assert (p - p).terms == {}
        assert (p - p).degree == 0

    def test_variable_count_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            Polynomial.variable(2, 0) + Polynomial.variable(3, 0)

    def test_power(self):
        p = Polynomial(1, {(1,): 1.0, (0,): 1.0})
        assert (p**3).terms == {(0,): 1.0, (1,): 3.0, (2,): 3.0, (3,): 1.0}
        assert (p**0).terms == {(0,): 1.0}

    def test_clean_drops_small_terms(self):
        p = Polynomial(1, {(0,): 1.0, (1,): 1e-14})
        assert p.clean(1e-12).terms == {(0,): 1.0}


class TestEvaluateCompose:
    def test_symmetric_difference_vanishes(self):
        p = Polynomial(2, {(2, 0): 1.0, (0, 2): -1.0})
        assert p.evaluate([1.0, 1.0]) == 0.0

    def test_constant_offset_update(self):
        p = Polynomial(2, {(0, 0): -0.5952, (2, 0): 1.0})
        assert p.evaluate([0.0, 0.0]) == -0.5952

    def test_hand_arithmetic(self):
        # 0.5*(x1 + 2 x1 x2) at (0.5, 0.5) is 0.5*(0.5 + 2*0.25) = 0.5
        p = Polynomial(2, {(1, 0): 0.5, (1, 1): 1.0})
        assert p.evaluate([0.5, 0.5]) == pytest.approx(0.5, abs=1e-15)

    def test_compose_second_component(self):
        f = [
            Polynomial(2, {(1, 0): 0.5, (1, 1): 1.0}),
            Polynomial(2, {(0, 1): 0.5, (3, 0): -1.0}),
        ]
        p = Polynomial.variable(2, 1)
        assert p.compose(f).terms == {(0, 1): 0.5, (3, 0): -1.0}

    def test_compose_constant_is_fixed(self):
        f = [Polynomial.variable(2, 0), Polynomial.variable(2, 1)]
        one = Polynomial.constant(2, 1.0)
        assert one.compose(f) == one

    def test_compose_square_of_sum(self):
        # x1 through the map (x1 + x2, ...) squared: symbolic oracle (a+b)^2
        f = [
            Polynomial(2, {(1, 0): 1.0, (0, 1): 1.0}),
            Polynomial(2, {(0, 0): -0.5952, (2, 0): 1.0}),
        ]
        p = Polynomial(2, {(2, 0): 1.0})
        assert p.compose(f).terms == {(2, 0): 1.0, (1, 1): 2.0, (0, 2): 1.0}

    def test_compose_identity_is_exact(self):
        rng = np.random.default_rng(7)
        identity = [Polynomial.variable(3, i) for i in range(3)]
        for _ in range(10):
            p = random_polynomial(rng, 3, 4)
            assert p.compose(identity) == p

    def test_evaluate_product_homomorphism(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            p = random_polynomial(rng, 3, 4)
            q = random_polynomial(rng, 3, 4)
            pts = rng.uniform(-1, 1, size=(100, 3))
            lhs = (p * q).evaluate_batch(pts)
            rhs = p.evaluate_batch(pts) * q.evaluate_batch(pts)
            scale = np.maximum(1.0, np.abs(rhs))
            assert np.all(np.abs(lhs - rhs) / scale < 1e-10)

    def test_evaluate_compose_consistency(self):
        rng = np.random.default_rng(13)
        for _ in range(10):
            p = random_polynomial(rng, 2, 3)
            f = [random_polynomial(rng, 2, 2) for _ in range(2)]
            pts = rng.uniform(-1, 1, size=(50, 2))
            lhs = p.compose(f).evaluate_batch(pts)
            fx = np.column_stack([fi.evaluate_batch(pts) for fi in f])
            rhs = p.evaluate_batch(fx)
            scale = np.maximum(1.0, np.abs(rhs))
            assert np.all(np.abs(lhs - rhs) / scale < 1e-9)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            Polynomial.variable(2, 0).evaluate([1.0])


class TestCoefficientVector:
    def test_zero_polynomial(self):
        basis = enumerate_basis(2, 2)
        assert np.all(coefficient_vector(Polynomial.zero(2), basis) == 0.0)

    def test_unit_coefficients(self):
        basis = enumerate_basis(2, 2)
        p = Polynomial(2, {(0, 0): 1.0, (1, 1): 1.0})
        vec = coefficient_vector(p, basis)
        assert np.count_nonzero(vec) == 2
        assert set(vec[np.nonzero(vec)]) == {1.0}

    def test_degree_overflow_reports_monomial(self):
        basis = enumerate_basis(2, 1)
        with pytest.raises(ValueError, match=r"\(2, 0\)"):
            coefficient_vector(Polynomial(2, {(2, 0): 1.0}), basis)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_round_trip(self, seed):
        rng = np.random.default_rng(seed)
        p = random_polynomial(rng, 2, 4)
        basis = enumerate_basis(2, 4)
        assert from_coefficient_vector(coefficient_vector(p, basis), basis) == p
