import math

import numpy as np
import pytest

from reachsos.linear import (
    LinearReachProblem,
    assemble_linear,
    quadratic_certificate,
    second_moment_matrix,
    solve_linear,
)
from reachsos.moments import DomainGeometry


def disk_second_moment_oracle():
    """Integral of x_i x_j over the unit disk by polar coordinates: (pi/4) I."""
    return (math.pi / 4) * np.eye(2)


class TestSecondMoments:
    def test_unit_disk(self):
        M = second_moment_matrix(DomainGeometry.ball([0.0, 0.0], 1.0))
        assert M == pytest.approx(disk_second_moment_oracle(), rel=1e-12)

    def test_unit_ball_3d(self):
        M = second_moment_matrix(DomainGeometry.ball([0.0, 0.0, 0.0], 1.0))
        assert M == pytest.approx((4 * math.pi / 15) * np.eye(3), rel=1e-12)

    def test_centered_geometry_is_psd(self):
        M = second_moment_matrix(
            DomainGeometry.ellipsoid([0.0, 0.0], np.array([[2.0, 0.5], [0.5, 1.0]]))
        )
        assert np.linalg.eigvalsh(M).min() > 0
        assert M == pytest.approx(M.T)


class TestProblemValidation:
    def test_initial_set_must_fit_in_state_set(self):
        with pytest.raises(ValueError, match="not contained"):
            LinearReachProblem(A=np.eye(2), V0=0.5 * np.eye(2), G=np.eye(2))

    def test_definiteness_checked(self):
        with pytest.raises(ValueError, match="positive definite"):
            LinearReachProblem(A=np.eye(2), V0=np.diag([1.0, 0.0]), G=0.1 * np.eye(2))


class TestSolve:
    def test_contraction_with_binding_initial_bound(self):
        # A = I/2, V0 = I: the contraction constraint is vacuous, V* = I
        prob = LinearReachProblem(A=0.5 * np.eye(2), V0=np.eye(2), G=np.eye(2))
        V, obj, sol = solve_linear(prob)
        assert sol.status == "optimal"
        assert V == pytest.approx(np.eye(2), abs=1e-7)
        assert obj == pytest.approx(math.pi / 2, rel=1e-6)

    def test_zero_map_keeps_initial_shape(self):
        prob = LinearReachProblem(A=np.zeros((2, 2)), V0=np.diag([2.0, 3.0]), G=np.eye(2))
        V, _, sol = solve_linear(prob)
        assert V == pytest.approx(np.diag([2.0, 3.0]), abs=1e-6)

    def test_expanding_map_shrinks_invariant(self):
        # spectral radius > 1 forces V below V0 along the expanding direction
        A = np.diag([1.5, 0.1])
        prob = LinearReachProblem(A=A, V0=np.eye(2), G=0.25 * np.eye(2))
        V, _, sol = solve_linear(prob)
        assert sol.status in ("optimal", "near_optimal")
        eigs = np.linalg.eigvalsh(V)
        assert eigs.min() >= -1e-8
        assert np.linalg.eigvalsh(np.eye(2) - V).min() >= -1e-8
        assert np.linalg.eigvalsh(V - A.T @ V @ A).min() >= -1e-7
        # the x1-direction cannot支 a positive quadratic invariant: V11 ~ 0
        assert V[0, 0] <= 1e-6

    def test_optimal_satisfies_both_orderings(self):
        prob = LinearReachProblem(
            A=np.array([[0.0, 0.9], [-0.9, 0.0]]), V0=4 * np.eye(2), G=np.eye(2)
        )
        V, obj, sol = solve_linear(prob)
        assert np.linalg.eigvalsh(4 * np.eye(2) - V).min() >= -1e-8
        assert np.linalg.eigvalsh(V - prob.A.T @ V @ prob.A).min() >= -1e-8
        assert V == pytest.approx(4 * np.eye(2), abs=1e-6)
        assert obj == pytest.approx(2 * math.pi, rel=1e-7)

    def test_rotation_equivariance(self):
        # conjugating V0 and A by a rotation leaves the trace objective unchanged
        theta = 0.73
        R = np.array(
            [[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]]
        )
        A = np.array([[0.4, 0.2], [-0.1, 0.5]])
        V0 = np.diag([2.0, 5.0])
        base = LinearReachProblem(A=A, V0=V0, G=np.eye(2))
        turned = LinearReachProblem(A=R @ A @ R.T, V0=R @ V0 @ R.T, G=np.eye(2))
        _, obj1, _ = solve_linear(base)
        _, obj2, _ = solve_linear(turned)
        assert obj1 == pytest.approx(obj2, rel=1e-6)


class TestQuadraticCertificate:
    def test_identity_gives_unit_ball(self):
        v, w = quadratic_certificate(np.eye(2))
        assert v.terms == {(0, 0): 1.0, (2, 0): -1.0, (0, 2): -1.0}
        assert w.terms == {(0, 0): 2.0, (2, 0): -1.0, (0, 2): -1.0}

    def test_rotation_trajectories_stay_certified(self):
        # pure rotation: circles; every iterate satisfies 1 - x^T V x >= -1e-9
        theta = 0.31
        A = np.array(
            [[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]]
        )
        prob = LinearReachProblem(A=A, V0=4 * np.eye(2), G=np.eye(2))
        V, _, _ = solve_linear(prob)
        v, _ = quadratic_certificate(V)
        rng = np.random.default_rng(9)
        pts = rng.normal(size=(200, 2))
        pts = 0.5 * pts / np.linalg.norm(pts, axis=1, keepdims=True)
        pts *= rng.uniform(0, 1, size=(200, 1))  # uniform-ish inside radius 1/2
        for _ in range(50):
            assert np.all(v.evaluate_batch(pts) >= -1e-9)
            pts = pts @ A.T

    def test_offdiagonal_cross_terms(self):
        V = np.array([[2.0, 0.5], [0.5, 1.0]])
        v, _ = quadratic_certificate(V)
        assert v.coefficient((1, 1)) == pytest.approx(-1.0)
