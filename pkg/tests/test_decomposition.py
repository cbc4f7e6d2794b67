import math

import numpy as np
import pytest

import liquidrop as ld
from liquidrop import decomposition
from liquidrop.geometry import UNIT_BALL_VOLUME

from conftest import box_voxels, voxels_from_predicate


def random_ball_union(rng, h=0.12):
    """Union of a few random balls, voxelized on the global lattice."""
    count = int(rng.integers(2, 5))
    centers = rng.uniform(-1.5, 1.5, size=(count, 3))
    radii = rng.uniform(0.3, 0.8, size=count)

    def predicate(x, y, z):
        occ = np.zeros(x.shape, dtype=bool)
        for c, r in zip(centers, radii):
            occ |= (x - c[0]) ** 2 + (y - c[1]) ** 2 + (z - c[2]) ** 2 <= r * r
        return occ

    lo = (centers - radii[:, None]).min(axis=0) - 2 * h
    hi = (centers + radii[:, None]).max(axis=0) + 2 * h
    return voxels_from_predicate(lo, hi, h, predicate)


def dumbbell(h=0.1):
    """Two balls of radius 0.8 at x = 1 and x = 4 joined by a thin neck."""

    def predicate(x, y, z):
        occ = (x - 1.0) ** 2 + y ** 2 + z ** 2 <= 0.64
        occ |= (x - 4.0) ** 2 + y ** 2 + z ** 2 <= 0.64
        occ |= (x >= 1.0) & (x <= 4.0) & (y ** 2 + z ** 2 <= 0.09)
        return occ

    return voxels_from_predicate([-0.2, -1.2, -1.2], [5.2, 1.2, 1.2], h, predicate)


class TestSelectSplitRadius:
    def test_empty_annulus_gives_zero_slice(self, voxel_ball):
        vox = voxel_ball(0.1)
        radius = ld.select_split_radius(vox, 1.1, 2.2)
        dist = np.linalg.norm(vox.occupied_centers, axis=1)
        assert decomposition._slice_estimate(dist, radius, vox.h) == 0.0

    def test_slice_below_annulus_average(self):
        ball2 = ld.voxelize(ld.BallConfiguration([[0, 0, 0]], [2.0]), 0.1)
        radius = ld.select_split_radius(ball2, 1.0, 2.0)
        dist = np.linalg.norm(ball2.occupied_centers, axis=1)
        slice_area = decomposition._slice_estimate(dist, radius, ball2.h)
        shell_bound = UNIT_BALL_VOLUME * (8.0 - 1.0)  # |B_2 \ B_1| / (2 - 1)
        assert slice_area <= shell_bound

    def test_dumbbell_cut_lands_in_neck(self):
        db = dumbbell()
        radius = ld.select_split_radius(db, 2.0, 3.2)
        assert 1.9 <= radius <= 3.3
        dist = np.linalg.norm(db.occupied_centers, axis=1)
        slice_area = decomposition._slice_estimate(dist, radius, db.h)
        neck_section = math.pi * 0.09
        assert 0.2 * neck_section <= slice_area <= 2.0 * neck_section

    def test_averaging_bound_on_random_fixtures(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            vox = random_ball_union(rng)
            dist = np.linalg.norm(vox.occupied_centers, axis=1)
            r_lo, r_hi = 0.4, float(dist.max()) + 0.3
            radius = ld.select_split_radius(vox, r_lo, r_hi)
            selected = decomposition._slice_estimate(dist, radius, vox.h)
            h = vox.h
            annulus = np.count_nonzero((dist > r_lo - h / 2) & (dist <= r_hi + h / 2)) * h ** 3
            average = annulus / (r_hi - r_lo)
            assert selected <= 1.5 * average + 2 * h

    def test_rejects_degenerate_interval(self, voxel_ball):
        with pytest.raises(ValueError):
            ld.select_split_radius(voxel_ball(0.2), 2.0, 1.0)
        with pytest.raises(ValueError):
            ld.select_split_radius(ld.VoxelSet.empty(), 0.5, 1.0)


class TestSplit:
    def test_cut_outside_support_is_trivial(self, voxel_ball):
        vox = voxel_ball(0.1)
        result = ld.split(vox, 2.0)
        assert result.outside.count == 0
        assert result.inside.count == vox.count
        assert abs(result.perimeter_defect) <= 1e-9
        assert result.riesz_defect == 0.0

    def test_two_far_balls_defects(self):
        config = ld.BallConfiguration([[0, 0, 0], [10, 0, 0]], [1.0, 1.0])
        vox = ld.voxelize(config, 0.05)
        result = ld.split(vox, 5.0)
        # cut through empty space: perimeters add exactly, cross term is the
        # point-charge value by the shell theorem
        q = ld.volume(result.inside)
        assert abs(result.perimeter_defect) <= 1e-9 * ld.perimeter(vox)
        assert result.riesz_defect == pytest.approx(q * q / 10.0, rel=0.01)

    def test_partition_is_exact(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            vox = random_ball_union(rng)
            radius = float(rng.uniform(0.5, 2.0))
            result = ld.split(vox, radius)
            assert result.inside.count + result.outside.count == vox.count
            assert not np.any(result.inside.occupancy & result.outside.occupancy)
            total = ld.volume(result.inside) + ld.volume(result.outside)
            assert total == pytest.approx(ld.volume(vox), rel=1e-14)

    def test_defect_signs_and_slice_bound(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            vox = random_ball_union(rng)
            dist = np.linalg.norm(vox.occupied_centers, axis=1)
            radius = ld.select_split_radius(vox, 0.4, float(dist.max()) + 0.3)
            result = ld.split(vox, radius)
            per_total = ld.perimeter(vox)
            assert result.riesz_defect >= 0.0
            assert result.perimeter_defect >= -0.05 * per_total
            assert result.perimeter_defect <= 2.0 * result.slice_area + 0.05 * per_total

    def test_riesz_additivity_identity(self):
        db = dumbbell(h=0.15)
        result = ld.split(db, 2.5)
        lhs = (
            ld.riesz_energy_voxel(db)
            - ld.riesz_energy_voxel(result.inside)
            - ld.riesz_energy_voxel(result.outside)
        )
        assert lhs == pytest.approx(result.riesz_defect, rel=1e-11)

    def test_rejects_bad_radius(self, voxel_ball):
        with pytest.raises(ValueError):
            ld.split(voxel_ball(0.2), -1.0)


class TestVanishingSequence:
    def test_far_field_ratio_and_decay(self, voxel_ball):
        vox = voxel_ball(0.1)
        report = ld.vanishing_sequence_demo(vox, [10.0, 20.0, 40.0])
        assert np.all(np.abs(report.ratios - 1.0) <= 0.02)
        assert np.all(np.diff(report.cross_terms) < 0.0)

    def test_inverse_square_kernel(self, voxel_ball):
        vox = voxel_ball(0.1)
        params = ld.RieszParams(3, 2.0)
        report = ld.vanishing_sequence_demo(vox, [20.0, 40.0], params)
        assert np.all(np.abs(report.ratios - 1.0) <= 0.03)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            ld.vanishing_sequence_demo(ld.VoxelSet.empty(), [10.0])


class TestConcentrationReport:
    def test_ball_concentrates_fully(self, voxel_ball):
        vox = voxel_ball(0.1)
        report = ld.concentration_report(vox)
        assert report.concentration_r1 == pytest.approx(ld.volume(vox), rel=0.1)
        assert report.ratio == pytest.approx(
            report.volume / (report.perimeter + report.volume), rel=1e-12
        )

    def test_stretched_boxes_lose_concentration(self):
        h = 0.1
        values, volumes = [], []
        for n in (2, 4, 8):
            box = box_voxels(1.0, 1.0, float(n), h)
            report = ld.concentration_report(box)
            values.append(report.concentration_r1)
            volumes.append(report.volume)
        # the window content saturates (non-increasing up to the one-cell
        # jitter of boundary ties) while the volume keeps growing
        cell = h ** 3 * (1 + 1e-12)
        assert values[1] <= values[0] + cell
        assert values[2] <= values[1] + cell
        assert volumes[2] > volumes[1] > volumes[0]
        assert values[2] / volumes[2] < 0.5 * values[0] / volumes[0]

    def test_report_carries_values_only(self, voxel_ball):
        report = ld.concentration_report(voxel_ball(0.2))
        assert set(vars(report)) == {"concentration_r1", "volume", "perimeter", "ratio"}
