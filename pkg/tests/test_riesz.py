import math

import numpy as np
import pytest
from scipy import integrate

import liquidrop as ld
from liquidrop import riesz
from liquidrop.geometry import UNIT_BALL_AREA, UNIT_BALL_VOLUME

from conftest import UNIT_BALL_COULOMB, box_voxels


def quad_ball_self_energy(radius: float, lam: float) -> float:
    """Independent oracle: adaptive quadrature of the radial pair-distance
    reduction of the ball's Riesz double integral."""

    def integrand(s):
        return s ** (2.0 - lam) * (2 * radius - s) ** 2 * (s + 4 * radius)

    value, _ = integrate.quad(integrand, 0.0, 2 * radius, epsabs=1e-13, epsrel=1e-12)
    return math.pi ** 2 / 6.0 * value


def mc_ball_points(rng, n, center, radius):
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1)[:, None]
    r = radius * rng.uniform(size=n) ** (1.0 / 3.0)
    return np.asarray(center) + v * r[:, None]


class TestRieszParams:
    def test_defaults(self):
        assert riesz.LIQUID_DROP.dimension == 3 and riesz.LIQUID_DROP.exponent == 1.0

    def test_rejects_exponent_at_dimension(self):
        with pytest.raises(ValueError):
            ld.RieszParams(3, 3.0)
        with pytest.raises(ValueError):
            ld.RieszParams(3, 0.0)

    def test_rejects_small_dimension(self):
        with pytest.raises(ValueError):
            ld.RieszParams(1, 0.5)


class TestBallSelfEnergy:
    @pytest.mark.parametrize("lam", [0.5, 1.0, 1.5, 2.0, 2.5])
    @pytest.mark.parametrize("radius", [0.3, 1.0, 2.2])
    def test_closed_form_matches_quadrature(self, radius, lam):
        assert ld.ball_riesz_self_energy(radius, lam) == pytest.approx(
            quad_ball_self_energy(radius, lam), rel=1e-10
        )

    def test_coulomb_value(self):
        assert ld.ball_riesz_self_energy(1.0) == pytest.approx(UNIT_BALL_COULOMB, rel=1e-14)
        q = UNIT_BALL_VOLUME
        assert ld.ball_riesz_self_energy(1.0) == pytest.approx(0.6 * q * q, rel=1e-14)


class TestCoulombBalls:
    def test_unit_ball(self):
        assert ld.coulomb_energy_balls(ld.ball_of_volume(UNIT_BALL_VOLUME)) == pytest.approx(
            UNIT_BALL_COULOMB, rel=1e-14
        )

    def test_unit_ball_monte_carlo(self):
        rng = np.random.default_rng(2024)
        n = 400_000
        x = mc_ball_points(rng, n, [0, 0, 0], 1.0)
        y = mc_ball_points(rng, n, [0, 0, 0], 1.0)
        estimate = 0.5 * UNIT_BALL_VOLUME ** 2 * np.mean(1.0 / np.linalg.norm(x - y, axis=1))
        assert ld.coulomb_energy_balls(ld.ball_of_volume(UNIT_BALL_VOLUME)) == pytest.approx(
            estimate, rel=0.01
        )

    def test_two_balls_cross_term_monte_carlo(self):
        config = ld.BallConfiguration([[0, 0, 0], [10, 0, 0]], [1.0, 1.0])
        rng = np.random.default_rng(7)
        n = 200_000
        x = mc_ball_points(rng, n, [0, 0, 0], 1.0)
        y = mc_ball_points(rng, n, [10, 0, 0], 1.0)
        cross_mc = UNIT_BALL_VOLUME ** 2 * np.mean(1.0 / np.linalg.norm(x - y, axis=1))
        expected = 2 * UNIT_BALL_COULOMB + cross_mc
        assert ld.coulomb_energy_balls(config) == pytest.approx(expected, rel=0.005)

    def test_empty(self):
        assert ld.coulomb_energy_balls(ld.BallConfiguration.empty()) == 0.0


class TestVoxelEnergy:
    def test_single_cell_is_self_term_only(self):
        vox = ld.VoxelSet([0, 0, 0], 0.3, np.ones((1, 1, 1), dtype=bool))
        r_eq = (3 * 0.3 ** 3 / (4 * math.pi)) ** (1.0 / 3.0)
        assert ld.riesz_energy_voxel(vox) == ld.ball_riesz_self_energy(r_eq)

    def test_empty(self):
        assert ld.riesz_energy_voxel(ld.VoxelSet.empty()) == 0.0

    def test_unit_ball_two_percent_at_coarse_h(self, voxel_ball):
        value = ld.riesz_energy_voxel(voxel_ball(0.1))
        assert abs(value - UNIT_BALL_COULOMB) / UNIT_BALL_COULOMB < 0.02

    def test_monotone_in_cells(self, voxel_ball):
        vox = voxel_ball(0.2)
        grown = np.array(vox.occupancy)
        grown[0, 0, 0] = True  # corner cell, previously empty
        bigger = ld.VoxelSet(vox.origin, vox.h, grown)
        assert ld.riesz_energy_voxel(bigger) > ld.riesz_energy_voxel(vox)

    def test_rearrangement_bound(self, voxel_ball):
        # the equal-volume ball maximizes the Coulomb energy
        for vox in (voxel_ball(0.1), box_voxels(1, 1, 4, 0.1)):
            r_eq = (ld.volume(vox) / UNIT_BALL_VOLUME) ** (1.0 / 3.0)
            bound = ld.ball_riesz_self_energy(r_eq)
            assert ld.riesz_energy_voxel(vox) <= bound * (1.0 + 0.01)

    def test_general_exponent_against_numpy_path(self):
        vox = box_voxels(0.6, 0.6, 0.9, 0.3)
        params = ld.RieszParams(3, 1.7)
        value = ld.riesz_energy_voxel(vox, params)
        h = vox.h
        pair = riesz._pair_sum_numpy(np.asarray(vox.occupied_centers), 1.7) * h ** 6
        r_eq = (3 * h ** 3 / (4 * math.pi)) ** (1.0 / 3.0)
        assert value == pytest.approx(pair + vox.count * ld.ball_riesz_self_energy(r_eq, 1.7), rel=1e-12)

    def test_requires_dimension_three(self, voxel_ball):
        with pytest.raises(ValueError):
            ld.riesz_energy_voxel(voxel_ball(0.2), ld.RieszParams(4, 1.0))


class TestCrossEnergy:
    def test_far_balls_newton(self, voxel_ball):
        vox = voxel_ball(0.1)
        shifted = vox.translated((10.0, 0.0, 0.0))
        value = ld.cross_energy(vox, shifted)
        q = ld.volume(vox)
        assert value == pytest.approx(q * q / 10.0, rel=0.005)

    def test_symmetry_is_exact(self, voxel_ball):
        vox = voxel_ball(0.2)
        other = vox.translated((7.0, 1.0, 0.0))
        assert ld.cross_energy(vox, other) == ld.cross_energy(other, vox)

    def test_empty_partner(self, voxel_ball):
        assert ld.cross_energy(voxel_ball(0.2), ld.VoxelSet.empty()) == 0.0

    def test_separation_doubling_halves(self, voxel_ball):
        vox = voxel_ball(0.1)
        c10 = ld.cross_energy(vox, vox.translated((10.0, 0, 0)))
        c20 = ld.cross_energy(vox, vox.translated((20.0, 0, 0)))
        assert c10 / c20 == pytest.approx(2.0, rel=0.01)

    def test_rejects_overlap(self, voxel_ball):
        vox = voxel_ball(0.2)
        with pytest.raises(ValueError):
            ld.cross_energy(vox, vox)
        with pytest.raises(ValueError):
            ld.cross_energy(vox, vox.translated((0.1, 0.0, 0.0)))

    def test_additivity_identity(self, voxel_ball):
        vox = voxel_ball(0.15)
        half = np.array(vox.occupancy)
        half[: half.shape[0] // 2] = False
        g = ld.VoxelSet(vox.origin, vox.h, half)
        f = ld.VoxelSet(vox.origin, vox.h, vox.occupancy & ~half)
        lhs = ld.riesz_energy_voxel(vox) - ld.riesz_energy_voxel(f) - ld.riesz_energy_voxel(g)
        assert lhs == pytest.approx(ld.cross_energy(f, g), rel=1e-12)


class TestPotential:
    def test_sup_bound_unit_volume_ball(self):
        assert ld.potential_sup_bound(UNIT_BALL_VOLUME) == pytest.approx(2 * math.pi, rel=1e-14)

    def test_sup_bound_zero_volume(self):
        assert ld.potential_sup_bound(0.0) == 0.0

    def test_sup_bound_general_dimension(self):
        # d = 2, lam = 1: disk of area pi, rho = 1, bound = 2 pi r^(1)/1
        assert ld.potential_sup_bound(math.pi, ld.RieszParams(2, 1.0)) == pytest.approx(2 * math.pi, rel=1e-12)

    def test_voxel_potential_scan_below_bound(self, voxel_ball):
        vox = voxel_ball(0.1)
        idx = np.argwhere(vox.occupancy)
        corner_offsets = np.array([[i, j, k] for i in (0, 1) for j in (0, 1) for k in (0, 1)])
        corners = np.unique((idx[:, None, :] + corner_offsets[None]).reshape(-1, 3), axis=0)
        points = vox.origin + corners * vox.h
        values = ld.voxel_potential(vox, points)
        assert values.max() <= ld.potential_sup_bound(ld.volume(vox)) * 1.02

    def test_decay_matches_charge_over_distance(self, voxel_ball):
        vox = voxel_ball(0.1)
        q = ld.volume(vox)
        for s in (10.0, 20.0, 40.0):
            phi = ld.voxel_potential(vox, [(s, 0.0, 0.0)])[0]
            assert phi * s / q == pytest.approx(1.0, abs=0.02)

    def test_rejects_point_on_cell_center(self, voxel_ball):
        vox = voxel_ball(0.2)
        with pytest.raises(ValueError):
            ld.voxel_potential(vox, [vox.occupied_centers[0]])


class TestAxisymmetricCoulomb:
    def test_ball_is_exact(self):
        for r0 in (1.0, 1.3, 0.5):
            shape = ld.AxisymmetricShape(r0, [])
            assert ld.riesz_energy_axisymmetric(shape) == pytest.approx(
                UNIT_BALL_COULOMB * r0 ** 5, rel=1e-13
            )

    def test_deformed_against_monte_carlo(self):
        shape = ld.AxisymmetricShape(1.0, [0.4])
        rng = np.random.default_rng(12345)
        u_grid = np.linspace(-1, 1, 2001)
        rmax = shape.radius(u_grid).max()

        def sample(count):
            pts = np.empty((0, 3))
            while len(pts) < count:
                cand = rng.uniform(-rmax, rmax, size=(count, 3))
                rr = np.linalg.norm(cand, axis=1)
                u = np.where(rr > 0, cand[:, 2] / np.maximum(rr, 1e-300), 1.0)
                pts = np.vstack([pts, cand[rr <= shape.radius(u)]])
            return pts[:count]

        n = 300_000
        x, y = sample(n), sample(n)
        vol = ld.volume(shape)
        mc = 0.5 * vol * vol * np.mean(1.0 / np.linalg.norm(x - y, axis=1))
        assert ld.riesz_energy_axisymmetric(shape) == pytest.approx(mc, rel=0.01)

    def test_deformed_against_voxel_estimator(self):
        shape = ld.AxisymmetricShape(1.0, [0.3])
        vox = ld.voxelize(shape, 0.08)
        assert ld.riesz_energy_axisymmetric(shape) == pytest.approx(
            ld.riesz_energy_voxel(vox), rel=0.02
        )

    def test_scaling_exponent(self):
        shape = ld.AxisymmetricShape(1.0, [0.25, 0.0, -0.05])
        assert ld.riesz_energy_axisymmetric(shape.scaled(2.0)) == pytest.approx(
            32 * ld.riesz_energy_axisymmetric(shape), rel=1e-12
        )

    def test_rejects_general_exponent(self):
        with pytest.raises(ValueError):
            ld.riesz_energy_axisymmetric(ld.AxisymmetricShape(1.0, []), ld.RieszParams(3, 2.0))


class TestTotalEnergy:
    def test_unit_ball_breakdown(self):
        breakdown = ld.total_energy(ld.ball_of_volume(UNIT_BALL_VOLUME))
        assert breakdown.volume == pytest.approx(UNIT_BALL_VOLUME, rel=1e-14)
        assert breakdown.perimeter == pytest.approx(UNIT_BALL_AREA, rel=1e-14)
        assert breakdown.riesz == pytest.approx(UNIT_BALL_COULOMB, rel=1e-14)
        assert breakdown.total == breakdown.perimeter + breakdown.riesz

    def test_ball_family_matches_curve_coefficients(self):
        from liquidrop.ballmodel import LIQUID_DROP_CURVE as c

        for mass in (0.5, 2.5, 7.0):
            total = ld.total_energy(ld.ball_of_volume(mass)).total
            assert total == pytest.approx(c.p * mass ** (2 / 3) + c.q * mass ** (5 / 3), rel=1e-12)

    def test_empty_set_all_zero(self):
        breakdown = ld.total_energy(ld.BallConfiguration.empty())
        assert (breakdown.volume, breakdown.perimeter, breakdown.riesz, breakdown.total) == (0, 0, 0, 0)

    def test_rejects_general_kernel_on_balls(self):
        with pytest.raises(ValueError):
            ld.total_energy(ld.ball_of_volume(1.0), ld.RieszParams(3, 2.0))

    def test_voxel_general_kernel_supported(self):
        vox = box_voxels(0.6, 0.6, 0.6, 0.3)
        breakdown = ld.total_energy(vox, ld.RieszParams(3, 2.0))
        assert breakdown.riesz > 0.0

    def test_breakdown_validation(self):
        with pytest.raises(ValueError):
            ld.EnergyBreakdown(1.0, -1.0, 0.0, -1.0)
        with pytest.raises(ValueError):
            ld.EnergyBreakdown(1.0, 1.0, 1.0, 3.0)


@pytest.mark.skipif(not riesz._HAVE_NUMBA, reason="numba not installed")
class TestKernelConsistency:
    def test_pair_sum_matches_numpy_fallback(self, voxel_ball):
        pts = np.asarray(voxel_ball(0.25).occupied_centers)
        fast = riesz._pair_sum_coulomb(pts)
        slow = riesz._pair_sum_numpy(pts, 1.0)
        assert fast == pytest.approx(slow, rel=1e-13)

    def test_cross_sum_matches_numpy_fallback(self, voxel_ball):
        a = np.asarray(voxel_ball(0.25).occupied_centers)
        b = a + np.array([5.0, 0.0, 0.0])
        assert riesz._cross_sum_coulomb(a, b) == pytest.approx(
            riesz._cross_sum_numpy(a, b, 1.0), rel=1e-13
        )
