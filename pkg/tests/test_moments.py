import math

import numpy as np
import pytest

from reachsos.moments import DomainGeometry, geometry_moment, mc_moment, moment_vector
from reachsos.polynomials import enumerate_basis
from reachsos.assembly import moment_matrix


def quad_1d(lo, hi, k):
    """One-dimensional antiderivative oracle for integral of x^k."""
    return (hi ** (k + 1) - lo ** (k + 1)) / (k + 1)


UNIT_DISK = DomainGeometry.ball([0.0, 0.0], 1.0)
UNIT_BOX = DomainGeometry.box([(0.0, 1.0), (0.0, 1.0)])


class TestAnalyticMoments:
    def test_disk_volume(self):
        assert geometry_moment(UNIT_DISK, (0, 0)) == pytest.approx(math.pi, rel=1e-14)

    def test_disk_odd_moment_vanishes(self):
        assert geometry_moment(UNIT_DISK, (1, 0)) == 0.0
        assert geometry_moment(UNIT_DISK, (3, 2)) == 0.0

    def test_disk_second_moment(self):
        assert geometry_moment(UNIT_DISK, (2, 0)) == pytest.approx(math.pi / 4, rel=1e-13)

    def test_box_moment_antiderivative_oracle(self):
        assert geometry_moment(UNIT_BOX, (1, 2)) == pytest.approx(
            quad_1d(0, 1, 1) * quad_1d(0, 1, 2), rel=1e-14
        )
        assert geometry_moment(UNIT_BOX, (1, 2)) == pytest.approx(1 / 6, rel=1e-14)

    def test_interval_ball_cross_checks_gamma_formula(self):
        seg = DomainGeometry.ball([0.0], 1.0)  # [-1, 1]
        assert geometry_moment(seg, (2,)) == pytest.approx(quad_1d(-1, 1, 2), rel=1e-13)
        assert geometry_moment(seg, (0,)) == pytest.approx(2.0, rel=1e-14)

    def test_shifted_ball_matches_shifted_integral(self):
        # integral of x over a disk centered at (c, 0) is c * area
        geo = DomainGeometry.ball([0.3, 0.0], 0.5)
        area = math.pi * 0.25
        assert geometry_moment(geo, (1, 0)) == pytest.approx(0.3 * area, rel=1e-12)

    def test_ellipsoid_reduces_to_ball(self):
        geo = DomainGeometry.ellipsoid([0.0, 0.0], np.eye(2) * 4.0)  # radius 1/2
        assert geometry_moment(geo, (0, 0)) == pytest.approx(math.pi / 4, rel=1e-12)

    def test_box_scaling_homogeneity(self):
        base = DomainGeometry.box([(-0.5, 1.0), (-1.0, 0.25)])
        s = 1.7
        scaled = DomainGeometry.box([(-0.5 * s, 1.0 * s), (-1.0 * s, 0.25 * s)])
        for beta in [(0, 0), (1, 0), (2, 1), (3, 3)]:
            expect = s ** (2 + sum(beta)) * geometry_moment(base, beta)
            assert geometry_moment(scaled, beta) == pytest.approx(expect, rel=1e-12)


class TestMomentVector:
    def test_disk_degree_zero(self):
        ms = moment_vector(UNIT_DISK, 0)
        assert ms.values == {(0, 0): pytest.approx(math.pi)}

    def test_centered_symmetric_first_order(self):
        for geo in (UNIT_DISK, DomainGeometry.box([(-1.0, 1.0), (-2.0, 2.0)])):
            ms = moment_vector(geo, 1)
            assert ms.values[(1, 0)] == pytest.approx(0.0, abs=1e-14)
            assert ms.values[(0, 1)] == pytest.approx(0.0, abs=1e-14)

    def test_unit_box_degree_two(self):
        ms = moment_vector(UNIT_BOX, 2)
        basis = enumerate_basis(2, 2)
        got = [ms.values[e] for e in basis.exponents]
        assert got == pytest.approx([1.0, 0.5, 0.5, 1 / 3, 1 / 4, 1 / 3], rel=1e-14)

    def test_completeness(self):
        ms = moment_vector(UNIT_DISK, 5)
        assert set(ms.values) == set(enumerate_basis(2, 5).exponents)

    def test_moment_matrix_of_measure_is_psd(self):
        for geo in (
            UNIT_DISK,
            UNIT_BOX,
            DomainGeometry.ellipsoid([0.1, 1.25], np.diag([1 / 12.96, 1 / 3.0625])),
        ):
            ms = moment_vector(geo, 8)
            M = moment_matrix(ms, 4)
            eigs = np.linalg.eigvalsh(M)
            assert eigs.min() >= -1e-8 * max(1.0, eigs.max())


class TestMonteCarlo:
    def test_disk_volume_within_three_sigma(self):
        est, se = mc_moment(UNIT_DISK, (0, 0), 1_000_000, seed=1)
        assert abs(est - math.pi) <= 3 * se

    def test_box_moments_within_three_sigma(self):
        for beta in [(0, 0), (2, 1), (4, 0)]:
            est, se = mc_moment(UNIT_BOX, beta, 200_000, seed=2)
            assert abs(est - geometry_moment(UNIT_BOX, beta)) <= 3 * se

    def test_deterministic_per_seed(self):
        a = mc_moment(UNIT_DISK, (2, 0), 10_000, seed=42)
        b = mc_moment(UNIT_DISK, (2, 0), 10_000, seed=42)
        assert a == b

    def test_sample_size_floor(self):
        with pytest.raises(ValueError, match="1000"):
            mc_moment(UNIT_DISK, (0, 0), 10, seed=0)

    def test_light_sweep_all_geometries(self):
        geometries = [
            UNIT_BOX,
            UNIT_DISK,
            DomainGeometry.ellipsoid([0.1, 1.25], np.diag([1 / 12.96, 1 / 3.0625])),
        ]
        basis = enumerate_basis(2, 4)
        for g_idx, geo in enumerate(geometries):
            for beta in basis.exponents:
                est, se = mc_moment(geo, beta, 100_000, seed=1000 + g_idx)
                exact = geometry_moment(geo, beta)
                assert abs(est - exact) <= 4 * se + 1e-12


class TestGeometry:
    def test_box_validation(self):
        with pytest.raises(ValueError, match="axis 1"):
            DomainGeometry.box([(0.0, 1.0), (2.0, 2.0)])

    def test_ball_validation(self):
        with pytest.raises(ValueError, match="radius"):
            DomainGeometry.ball([0.0], -1.0)

    def test_ellipsoid_needs_positive_definite_shape(self):
        with pytest.raises(ValueError, match="positive definite"):
            DomainGeometry.ellipsoid([0.0, 0.0], np.diag([1.0, 0.0]))

    def test_bounding_box_of_ellipsoid(self):
        geo = DomainGeometry.ellipsoid([0.1, 1.25], np.diag([1 / 12.96, 1 / 3.0625]))
        box = geo.bounding_box()
        assert box[0] == (pytest.approx(0.1 - 3.6), pytest.approx(0.1 + 3.6))
        assert box[1] == (pytest.approx(1.25 - 1.75), pytest.approx(1.25 + 1.75))

    def test_contains_and_sampling(self):
        rng = np.random.default_rng(5)
        pts = UNIT_DISK.sample(rng, 500)
        assert np.all(UNIT_DISK.contains(pts))
        assert np.all(np.einsum("ij,ij->i", pts, pts) <= 1.0)

    def test_unit_map_round_trip(self):
        geo = DomainGeometry.ellipsoid([0.5, -0.25], np.array([[2.0, 0.3], [0.3, 1.0]]))
        c, L = geo.to_unit_map()
        rng = np.random.default_rng(6)
        u = geo.unit_geometry().sample(rng, 200)
        x = u @ L.T + c
        assert np.all(geo.contains(x, tol=1e-9))
