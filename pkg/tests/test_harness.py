import numpy as np
import pytest
import scipy.optimize

from reachsos.harness import (
    SamplingError,
    check_containment,
    mc_volume,
    run_order_sweep,
    sample_set,
    simulate,
)
from reachsos.io import load_bundle
from reachsos.polynomials import Polynomial
from reachsos.sets import DEFAULT_SEED


@pytest.fixture(scope="module")
def toy():
    return load_bundle("src/reachsos/problems/toy.problem")


@pytest.fixture(scope="module")
def interval():
    return load_bundle("src/reachsos/problems/interval.problem")


@pytest.fixture(scope="module")
def phytoplankton():
    return load_bundle("src/reachsos/problems/phytoplankton.problem")


@pytest.fixture(scope="module")
def julia():
    return load_bundle("src/reachsos/problems/julia.problem")


class FakeCertificate:
    """Duck-typed certificate with prescribed v, u, horizon."""

    def __init__(self, v, u=0.0, horizon=None):
        self.v = v
        self.u = u
        self.horizon = horizon


class TestSampleSet:
    def test_disk_points_inside(self, toy):
        pts = sample_set(toy.problem.init, toy.problem.init_geometry, 1000, seed=1)
        d = np.linalg.norm(pts - np.array([0.5, 0.5]), axis=1)
        assert np.all(d <= 0.25 + 1e-12)

    def test_deterministic(self, toy):
        a = sample_set(toy.problem.init, toy.problem.init_geometry, 100, seed=7)
        b = sample_set(toy.problem.init, toy.problem.init_geometry, 100, seed=7)
        assert np.array_equal(a, b)

    def test_box_sampling(self, interval):
        pts = sample_set(interval.problem.init, interval.problem.init_geometry, 500, seed=2)
        assert np.all((pts >= 0.5) & (pts <= 1.0))

    def test_empty_set_times_out(self, toy):
        from reachsos.sets import SemialgebraicSet

        empty = SemialgebraicSet(2, [Polynomial.constant(2, -1.0)])
        with pytest.raises(SamplingError):
            sample_set(empty, toy.problem.init_geometry, 10, seed=3)


class TestSimulate:
    def test_zero_steps_returns_initial(self, toy):
        pts = sample_set(toy.problem.init, toy.problem.init_geometry, 10, seed=4)
        batch = simulate(toy.problem, pts, 0)
        assert len(batch.states) == 1
        assert np.array_equal(batch.initial, pts)

    def test_growth_equilibrium_is_stationary(self, phytoplankton):
        # equilibrium solved numerically from the update map, then iterated
        prob = phytoplankton.problem

        def residual(x):
            return prob.system.step(x[None, :])[0] - x

        eq = scipy.optimize.fsolve(residual, x0=np.array([1.0, 0.0, 0.3]))
        assert np.linalg.norm(residual(eq)) < 1e-10
        assert prob.state_geometry.contains(eq[None, :])[0]
        pt = eq[None, :]
        for _ in range(25):
            pt = prob.system.step(pt)
        assert np.linalg.norm(pt[0] - eq) < 1e-9

    def test_quadratic_recurrence_stays_bounded(self, julia):
        pts = sample_set(julia.problem.init, julia.problem.init_geometry, 500, seed=5)
        batch = simulate(julia.problem, pts, 7)
        assert not batch.diverged
        assert batch.escaped_state_set == 0
        for states in batch.states:
            assert np.all(julia.problem.state_geometry.contains(states, tol=1e-9))

    def test_initial_points_validated(self, toy):
        with pytest.raises(ValueError, match="initial points"):
            simulate(toy.problem, np.array([[5.0, 5.0]]), 1)


class TestContainment:
    def test_corrupted_certificate_reports_violations(self, toy):
        pts = sample_set(toy.problem.init, toy.problem.init_geometry, 200, seed=6)
        batch = simulate(toy.problem, pts, 3)
        bad = FakeCertificate(v=Polynomial.constant(2, -10.0), u=0.0, horizon=None)
        violations, worst = check_containment(bad, batch)
        assert violations == batch.all_points().shape[0]
        assert worst == pytest.approx(-10.0)

    def test_u_zero_bound_independent_of_horizon(self, toy):
        pts = sample_set(toy.problem.init, toy.problem.init_geometry, 50, seed=8)
        batch = simulate(toy.problem, pts, 2)
        cert = FakeCertificate(v=Polynomial.constant(2, 0.5), u=0.0, horizon=None)
        a = check_containment(cert, batch, horizon_bound=None)
        b = check_containment(cert, batch, horizon_bound=10_000)
        assert a == b


class TestVolume:
    def test_constant_one_gives_full_volume(self, toy):
        cert = FakeCertificate(v=Polynomial.constant(2, 1.0))
        vol, ci = mc_volume(cert, toy.problem.state_geometry, 20_000, seed=9)
        assert vol == pytest.approx(np.pi, rel=1e-12)
        assert ci == 0.0

    def test_constant_negative_gives_zero(self, toy):
        cert = FakeCertificate(v=Polynomial.constant(2, -1.0))
        vol, _ = mc_volume(cert, toy.problem.state_geometry, 20_000, seed=10)
        assert vol == 0.0

    def test_half_space_estimate(self, toy):
        cert = FakeCertificate(v=Polynomial.variable(2, 0))  # x1 >= 0: half the disk
        vol, ci = mc_volume(cert, toy.problem.state_geometry, 100_000, seed=11)
        assert abs(vol - np.pi / 2) <= 3 * ci

    def test_minimum_sample_count(self, toy):
        cert = FakeCertificate(v=Polynomial.constant(2, 1.0))
        with pytest.raises(ValueError, match="10000"):
            mc_volume(cert, toy.problem.state_geometry, 100, seed=12)


class TestSweep:
    def test_interval_two_orders(self, interval):
        result = run_order_sweep(
            interval.problem, [4, 6], samples=200, volume_samples=20_000, seed=DEFAULT_SEED
        )
        assert len(result.reports) == 2
        assert not result.failures
        assert result.objectives_non_increasing
        for report in result.reports:
            assert report.violations == 0
            assert report.u == 0.0  # u_zero fixture

    def test_orders_must_ascend(self, interval):
        with pytest.raises(ValueError, match="ascending"):
            run_order_sweep(interval.problem, [6, 4])

    def test_single_order(self, interval):
        result = run_order_sweep(
            interval.problem, [4], samples=100, volume_samples=20_000
        )
        assert len(result.reports) == 1
