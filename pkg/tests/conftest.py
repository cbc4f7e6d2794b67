import math

import numpy as np
import pytest

import liquidrop as ld

UNIT_BALL_VOLUME = 4.0 * math.pi / 3.0
UNIT_BALL_AREA = 4.0 * math.pi
UNIT_BALL_COULOMB = 16.0 * math.pi ** 2 / 15.0


@pytest.fixture(scope="session")
def voxel_ball():
    """Voxelized unit ball at a given spacing, cached across the session."""
    cache = {}

    def factory(h: float) -> ld.VoxelSet:
        if h not in cache:
            cache[h] = ld.voxelize(ld.ball_of_volume(UNIT_BALL_VOLUME), h)
        return cache[h]

    return factory


def box_voxels(a: float, b: float, c: float, h: float) -> ld.VoxelSet:
    """Filled box of side lengths (a, b, c) centered at the origin."""
    n = np.ceil(np.array([a, b, c]) / h).astype(int)
    origin = -(n * h) / 2.0
    return ld.VoxelSet(origin, h, np.ones(tuple(n), dtype=bool))


def voxels_from_predicate(lo, hi, h, predicate) -> ld.VoxelSet:
    """Voxel set from a boolean predicate on cell centers, lattice-aligned."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    origin = (np.floor(lo / h) - 1.0) * h
    n = np.ceil((hi - origin) / h).astype(int) + 1
    axes = [origin[k] + (np.arange(n[k]) + 0.5) * h for k in range(3)]
    X, Y, Z = np.meshgrid(*axes, indexing="ij")
    return ld.VoxelSet(origin, h, predicate(X, Y, Z))
