import numpy as np
import pytest

from reachsos.moments import DomainGeometry
from reachsos.polynomials import Polynomial
from reachsos.sets import (
    DynamicalSystem,
    ReachProblem,
    SemialgebraicSet,
    ball_constraint,
    bound_from_box,
    half_degrees,
    validate_archimedean,
)


def unit_ball_set(n=2):
    return SemialgebraicSet(n, [ball_constraint(n, 1.0)])


class TestSemialgebraicSet:
    def test_needs_inequalities(self):
        with pytest.raises(ValueError, match="at least one"):
            SemialgebraicSet(2, [])

    def test_variable_count_checked(self):
        with pytest.raises(ValueError):
            SemialgebraicSet(2, [Polynomial.variable(3, 0)])

    def test_contains(self):
        s = unit_ball_set()
        flags = s.contains(np.array([[0.0, 0.0], [2.0, 0.0]]))
        assert flags.tolist() == [True, False]


class TestHalfDegrees:
    def test_ball(self):
        assert half_degrees(unit_ball_set()) == [1]

    def test_disk_inequality(self):
        # (x1 + 0.6)^2 + (x2 - 0.5)^2 <= 0.16, expanded
        g = Polynomial(
            2, {(0, 0): 0.16 - 0.36 - 0.25, (1, 0): -1.2, (0, 1): 1.0, (2, 0): -1.0, (0, 2): -1.0}
        )
        assert half_degrees(SemialgebraicSet(2, [g])) == [1]

    def test_cubic(self):
        g = Polynomial(2, {(3, 0): 1.0, (0, 0): 1.0})
        assert half_degrees(SemialgebraicSet(2, [g])) == [2]


class TestArchimedean:
    def test_unit_ball_already_present(self):
        s = unit_ball_set()
        out, added = validate_archimedean(s, bound_hint=5.0)
        assert not added
        assert out is s

    def test_box_gets_augmented(self):
        # per-facet box [-0.5, 1.5] x [-0.5, 0.5]^2 plus derived hint 2.75
        ineqs = []
        bounds = [(-0.5, 1.5), (-0.5, 0.5), (-0.5, 0.5)]
        for i, (a, b) in enumerate(bounds):
            lo = {(0, 0, 0): -a}
            lo[tuple(1 if j == i else 0 for j in range(3))] = 1.0
            hi = {(0, 0, 0): b}
            hi[tuple(1 if j == i else 0 for j in range(3))] = -1.0
            ineqs.append(Polynomial(3, lo))
            ineqs.append(Polynomial(3, hi))
        s = SemialgebraicSet(3, ineqs)
        hint = bound_from_box(bounds)
        assert hint == pytest.approx(1.5**2 + 0.5**2 + 0.5**2)
        out, added = validate_archimedean(s, hint)
        assert added
        ball = out.inequalities[-1]
        assert ball.evaluate([0.0, 0.0, 0.0]) == pytest.approx(2.75)
        # exactly one syntactic ball constraint afterwards
        again, added2 = validate_archimedean(out)
        assert not added2

    def test_linear_only_without_hint_fails(self):
        s = SemialgebraicSet(2, [Polynomial.variable(2, 0)])
        with pytest.raises(ValueError, match="compactness"):
            validate_archimedean(s, None)

    def test_nonpositive_hint_rejected(self):
        s = SemialgebraicSet(2, [Polynomial.variable(2, 0)])
        with pytest.raises(ValueError, match="positive"):
            validate_archimedean(s, -1.0)

    def test_offcenter_ball_not_mistaken(self):
        # quadratic part is right but linear terms disqualify the pattern
        g = Polynomial(2, {(0, 0): 1.0, (1, 0): 0.5, (2, 0): -1.0, (0, 2): -1.0})
        out, added = validate_archimedean(SemialgebraicSet(2, [g]), 4.0)
        assert added


class TestDynamicalSystem:
    def test_degree(self):
        f = [
            Polynomial(2, {(1, 0): 0.5, (1, 1): 1.0}),
            Polynomial(2, {(0, 1): 0.5, (3, 0): -1.0}),
        ]
        assert DynamicalSystem(f).degree == 3

    def test_constant_map_degree_floor(self):
        f = [Polynomial.constant(1, 2.0)]
        assert DynamicalSystem(f).degree == 1

    def test_step(self):
        f = [Polynomial.variable(2, 1), Polynomial.variable(2, 0)]
        out = DynamicalSystem(f).step(np.array([[1.0, 2.0]]))
        assert out.tolist() == [[2.0, 1.0]]

    def test_component_count_checked(self):
        with pytest.raises(ValueError):
            DynamicalSystem([Polynomial.variable(3, 0), Polynomial.variable(3, 1)])


class TestReachProblem:
    def make(self, **kw):
        f = [
            Polynomial(2, {(1, 0): 0.5, (1, 1): 1.0}),
            Polynomial(2, {(0, 1): 0.5, (3, 0): -1.0}),
        ]
        init = SemialgebraicSet(
            2,
            [
                Polynomial(
                    2,
                    {(0, 0): -0.4375, (1, 0): 1.0, (0, 1): 1.0, (2, 0): -1.0, (0, 2): -1.0},
                )
            ],
        )
        args = dict(
            init=init,
            init_geometry=DomainGeometry.ball([0.5, 0.5], 0.25),
            state=unit_ball_set(),
            state_geometry=DomainGeometry.ball([0.0, 0.0], 1.0),
            system=DynamicalSystem(f),
            horizon=100,
        )
        args.update(kw)
        return ReachProblem(**args)

    def test_r_min_covers_dynamics_degree(self):
        assert self.make().r_min == 2  # ceil(3/2) dominates the degree-2 sets

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="geometry"):
            self.make(state_geometry=DomainGeometry.ball([0.0], 1.0))

    def test_horizon_positive(self):
        with pytest.raises(ValueError, match="horizon"):
            self.make(horizon=0)

    def test_state_set_auto_augmented(self):
        box_ineqs = [
            Polynomial(2, {(0, 0): 1.0, (1, 0): 1.0}),
            Polynomial(2, {(0, 0): 1.0, (1, 0): -1.0}),
            Polynomial(2, {(0, 0): 1.0, (0, 1): 1.0}),
            Polynomial(2, {(0, 0): 1.0, (0, 1): -1.0}),
        ]
        p = self.make(
            state=SemialgebraicSet(2, box_ineqs),
            state_geometry=DomainGeometry.box([(-1.0, 1.0), (-1.0, 1.0)]),
        )
        assert p.archimedean_added
        ball = p.state.inequalities[-1]
        assert ball.evaluate([0.0, 0.0]) == pytest.approx(2.0)  # sum of per-axis bounds
        assert len(p.state_inequalities_without_ball()) == 4
