"""Set representations and their geometric measures.

Three representations of a bounded region of R^3 are supported:

* :class:`BallConfiguration` -- a finite list of pairwise disjoint balls.
  Volume, surface area and diameter are exact.
* :class:`VoxelSet` -- an axis-aligned occupancy grid with spacing ``h``.
  Volume is exact by construction (``h^3`` per occupied cell); surface area
  uses a mollified-gradient estimator that converges to the true perimeter
  as ``h -> 0``.
* :class:`AxisymmetricShape` -- a star-shaped solid of revolution whose
  boundary radius is a Legendre series in ``cos(theta)``.  Measures are
  computed by Gauss-Legendre quadrature over the polar angle.

All types are immutable after construction and every operation is a pure
function, so everything here is safe to evaluate concurrently.  Summations
use fixed traversal orders, which keeps results bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
from numpy.polynomial import legendre as _legendre
from scipy import ndimage, signal
from scipy.spatial import ConvexHull

__all__ = [
    "AxisymmetricShape",
    "BallConfiguration",
    "VoxelSet",
    "ball_of_volume",
    "concentration",
    "diameter",
    "load_ball_configuration",
    "load_voxel_set",
    "perimeter",
    "save_ball_configuration",
    "save_voxel_set",
    "volume",
    "voxelize",
]

UNIT_BALL_VOLUME = 4.0 * math.pi / 3.0
UNIT_BALL_AREA = 4.0 * math.pi

# Standard deviation of the smoothing kernel in cell units.  Calibrated on
# the unit ball: relative perimeter error is one-signed and shrinks
# monotonically (-6.2e-2, -1.8e-2, -4.7e-3, -9e-4 at h = 0.2, 0.1, 0.05,
# 0.025).  Narrower kernels let grid noise break the monotone decay.
PERIMETER_SMOOTHING_CELLS = 1.5


@lru_cache(maxsize=32)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Cached Gauss-Legendre nodes and weights on [-1, 1]."""
    nodes, weights = _legendre.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class BallConfiguration:
    """Finite union of pairwise disjoint closed balls in R^3.

    Parameters
    ----------
    centers : (n, 3) array_like
    radii : (n,) array_like, strictly positive

    Construction rejects non-positive radii and any pair of balls whose
    closed supports touch or overlap.
    """

    centers: np.ndarray
    radii: np.ndarray

    def __post_init__(self):
        centers = np.atleast_2d(np.asarray(self.centers, dtype=np.float64))
        radii = np.atleast_1d(np.asarray(self.radii, dtype=np.float64))
        if centers.size == 0:
            centers = centers.reshape(0, 3)
            radii = radii.reshape(0)
        if centers.ndim != 2 or centers.shape[1] != 3:
            raise ValueError("centers must have shape (n, 3)")
        if radii.shape != (centers.shape[0],):
            raise ValueError("radii must have shape (n,)")
        if radii.size and not np.all(radii > 0.0):
            raise ValueError("all radii must be strictly positive")
        if len(radii) > 1:
            gaps = np.linalg.norm(centers[:, None, :] - centers[None, :, :], axis=-1)
            gaps -= radii[:, None] + radii[None, :]
            iu = np.triu_indices(len(radii), k=1)
            if np.any(gaps[iu] <= 0.0):
                raise ValueError("balls must be pairwise disjoint (closed balls)")
        object.__setattr__(self, "centers", _readonly(centers))
        object.__setattr__(self, "radii", _readonly(radii))

    @classmethod
    def empty(cls) -> "BallConfiguration":
        return cls(np.zeros((0, 3)), np.zeros(0))

    def __len__(self) -> int:
        return len(self.radii)

    def translated(self, shift) -> "BallConfiguration":
        shift = np.asarray(shift, dtype=np.float64)
        return BallConfiguration(self.centers + shift, self.radii)

    def scaled(self, factor: float) -> "BallConfiguration":
        if factor <= 0.0:
            raise ValueError("scale factor must be positive")
        return BallConfiguration(self.centers * factor, self.radii * factor)


def ball_of_volume(vol: float, center=(0.0, 0.0, 0.0)) -> BallConfiguration:
    """Single ball of prescribed volume."""
    if vol <= 0.0:
        raise ValueError("volume must be positive")
    radius = (vol / UNIT_BALL_VOLUME) ** (1.0 / 3.0)
    return BallConfiguration(np.asarray(center, dtype=np.float64)[None, :], [radius])


@dataclass(frozen=True, eq=False)
class VoxelSet:
    """Axis-aligned occupancy grid.

    ``origin`` is the corner of cell (0, 0, 0); the center of cell
    ``(i, j, k)`` sits at ``origin + (i + 1/2, j + 1/2, k + 1/2) * h``.
    Volume is exactly ``h^3`` times the number of occupied cells.
    """

    origin: np.ndarray
    h: float
    occupancy: np.ndarray

    def __post_init__(self):
        origin = np.asarray(self.origin, dtype=np.float64).reshape(3)
        if self.h <= 0.0:
            raise ValueError("grid spacing h must be positive")
        occ = np.asarray(self.occupancy, dtype=bool)
        if occ.ndim != 3:
            raise ValueError("occupancy must be a 3-d boolean array")
        object.__setattr__(self, "origin", _readonly(origin))
        object.__setattr__(self, "h", float(self.h))
        object.__setattr__(self, "occupancy", _readonly(occ))

    @classmethod
    def empty(cls, h: float = 1.0) -> "VoxelSet":
        return cls(np.zeros(3), h, np.zeros((1, 1, 1), dtype=bool))

    @cached_property
    def count(self) -> int:
        return int(self.occupancy.sum())

    @cached_property
    def occupied_centers(self) -> np.ndarray:
        """Centers of occupied cells, shape (count, 3), fixed C order."""
        idx = np.argwhere(self.occupancy)
        return _readonly(self.origin + (idx + 0.5) * self.h)

    def translated(self, shift) -> "VoxelSet":
        return VoxelSet(self.origin + np.asarray(shift, dtype=np.float64), self.h, self.occupancy)


@dataclass(frozen=True, eq=False)
class AxisymmetricShape:
    """Star-shaped solid of revolution around the z axis.

    The boundary radius at polar angle theta is

        r(theta) = R0 * (1 + sum_{l=2}^{L} c_l P_l(cos theta))

    with Legendre polynomials P_l.  The l = 0 mode is absorbed into the
    base radius R0 and l = 1 (a pure translation) is excluded.  The profile
    must stay strictly positive; this is checked on a dense angular grid.
    """

    base_radius: float
    coefficients: np.ndarray

    _POSITIVITY_GRID = 1441

    def __post_init__(self):
        coeffs = np.atleast_1d(np.asarray(self.coefficients, dtype=np.float64))
        if coeffs.size == 0:
            coeffs = coeffs.reshape(0)
        if coeffs.ndim != 1:
            raise ValueError("coefficients must be one-dimensional (c_2 .. c_L)")
        if self.base_radius <= 0.0:
            raise ValueError("base radius must be positive")
        object.__setattr__(self, "base_radius", float(self.base_radius))
        object.__setattr__(self, "coefficients", _readonly(coeffs))
        u = np.linspace(-1.0, 1.0, self._POSITIVITY_GRID)
        if np.min(self.radius(u)) <= 0.0:
            raise ValueError("boundary radius must be positive for all angles")

    @cached_property
    def _series(self) -> np.ndarray:
        full = np.zeros(len(self.coefficients) + 2)
        full[0] = 1.0
        full[2:] = self.coefficients
        return _readonly(full)

    def radius(self, u) -> np.ndarray:
        """Boundary radius as a function of u = cos(theta)."""
        return self.base_radius * _legendre.legval(np.asarray(u, dtype=np.float64), self._series)

    def radius_derivative(self, u) -> np.ndarray:
        """d r / d u at u = cos(theta)."""
        if len(self._series) < 2:
            return np.zeros_like(np.asarray(u, dtype=np.float64))
        der = _legendre.legder(self._series)
        return self.base_radius * _legendre.legval(np.asarray(u, dtype=np.float64), der)

    def scaled(self, factor: float) -> "AxisymmetricShape":
        if factor <= 0.0:
            raise ValueError("scale factor must be positive")
        return AxisymmetricShape(self.base_radius * factor, self.coefficients)


SHAPE_QUADRATURE_ORDER = 64


# ---------------------------------------------------------------------------
# measures
# ---------------------------------------------------------------------------

def volume(shape) -> float:
    """Lebesgue measure of the set.

    Exact for ball configurations and voxel sets; the solid of revolution
    uses (2 pi / 3) * integral of r(u)^3 du, which Gauss-Legendre quadrature
    integrates exactly because the integrand is a polynomial in u.
    """
    if isinstance(shape, BallConfiguration):
        return float(UNIT_BALL_VOLUME * np.sum(shape.radii ** 3))
    if isinstance(shape, VoxelSet):
        return shape.count * shape.h ** 3
    if isinstance(shape, AxisymmetricShape):
        u, w = gauss_legendre(SHAPE_QUADRATURE_ORDER)
        return float(2.0 * math.pi / 3.0 * np.dot(w, shape.radius(u) ** 3))
    raise TypeError(f"unsupported shape type {type(shape).__name__}")


def perimeter(shape) -> float:
    """Surface area (distributional perimeter) of the set.

    Ball configurations are exact.  Solids of revolution use the
    surface-of-revolution integral

        2 pi * integral r * sqrt(r^2 + (1 - u^2) (dr/du)^2) du.

    Voxel sets use a mollified-gradient estimator: the occupancy indicator
    is convolved with a radially symmetric Gaussian of width O(h) and the
    gradient magnitude is integrated by the midpoint rule.  Plain
    face-counting does not converge to the surface area (its anisotropic
    bias exceeds 50% for a ball); the smoothed estimator does, with the
    empirical rates quoted at :data:`PERIMETER_SMOOTHING_CELLS`.
    """
    if isinstance(shape, BallConfiguration):
        return float(UNIT_BALL_AREA * np.sum(shape.radii ** 2))
    if isinstance(shape, VoxelSet):
        return _voxel_perimeter(shape)
    if isinstance(shape, AxisymmetricShape):
        u, w = gauss_legendre(SHAPE_QUADRATURE_ORDER)
        r = shape.radius(u)
        ru = shape.radius_derivative(u)
        return float(2.0 * math.pi * np.dot(w, r * np.sqrt(r * r + (1.0 - u * u) * ru * ru)))
    raise TypeError(f"unsupported shape type {type(shape).__name__}")


def _voxel_perimeter(vox: VoxelSet) -> float:
    if vox.count == 0:
        return 0.0
    sigma = PERIMETER_SMOOTHING_CELLS
    pad = int(math.ceil(5.0 * sigma)) + 2
    field = np.pad(vox.occupancy.astype(np.float64), pad)
    field = ndimage.gaussian_filter(field, sigma=sigma, mode="constant", truncate=5.0)
    gx, gy, gz = np.gradient(field, vox.h)
    return float(np.sqrt(gx * gx + gy * gy + gz * gz).sum() * vox.h ** 3)


def diameter(shape) -> float:
    """Largest distance between two points of the set.

    Raises ``ValueError`` on empty sets (the diameter is undefined).  Voxel
    diameters are computed on the convex hull of the occupied cell corners,
    which is exact for the discrete representation.
    """
    if isinstance(shape, BallConfiguration):
        if len(shape) == 0:
            raise ValueError("diameter of an empty configuration is undefined")
        span = np.linalg.norm(shape.centers[:, None, :] - shape.centers[None, :, :], axis=-1)
        span += shape.radii[:, None] + shape.radii[None, :]
        return float(span.max())
    if isinstance(shape, VoxelSet):
        return _voxel_diameter(shape)
    if isinstance(shape, AxisymmetricShape):
        u = np.linspace(-1.0, 1.0, 513)
        r = shape.radius(u)
        z = r * u
        rho = r * np.sqrt(np.maximum(1.0 - u * u, 0.0))
        # rho >= 0, so the maximum is attained at opposite azimuths
        d2 = (rho[:, None] + rho[None, :]) ** 2 + (z[:, None] - z[None, :]) ** 2
        return float(np.sqrt(d2.max()))
    raise TypeError(f"unsupported shape type {type(shape).__name__}")


def _voxel_diameter(vox: VoxelSet) -> float:
    if vox.count == 0:
        raise ValueError("diameter of an empty voxel set is undefined")
    occ = vox.occupancy
    interior = np.zeros_like(occ)
    interior[1:-1, 1:-1, 1:-1] = (
        occ[1:-1, 1:-1, 1:-1]
        & occ[:-2, 1:-1, 1:-1] & occ[2:, 1:-1, 1:-1]
        & occ[1:-1, :-2, 1:-1] & occ[1:-1, 2:, 1:-1]
        & occ[1:-1, 1:-1, :-2] & occ[1:-1, 1:-1, 2:]
    )
    surface = np.argwhere(occ & ~interior)
    offsets = np.array([[i, j, k] for i in (0, 1) for j in (0, 1) for k in (0, 1)], dtype=np.float64)
    corners = (surface[:, None, :] + offsets[None, :, :]).reshape(-1, 3) * vox.h + vox.origin
    if len(corners) > 4:
        corners = corners[ConvexHull(corners).vertices]
    d2 = np.sum((corners[:, None, :] - corners[None, :, :]) ** 2, axis=-1)
    return float(np.sqrt(d2.max()))


def concentration(vox: VoxelSet, r: float) -> float:
    """Largest mass of the set seen through a ball window of radius r.

    Maximizes ``|B_r(a) intersect E|`` over window centers ``a`` on the cell
    lattice; restricting the centers to the lattice makes the value a lower
    bound for the continuum supremum up to O(h).  The cell-counting measure
    is capped at ``min(|E|, (4 pi / 3) r^3)`` so the window can never report
    more mass than it could geometrically contain.
    """
    if r <= 0.0:
        raise ValueError("window radius must be positive")
    if vox.count == 0:
        return 0.0
    reach = int(math.floor(r / vox.h)) + 1
    d = np.arange(-reach, reach + 1)
    dx, dy, dz = np.meshgrid(d, d, d, indexing="ij")
    # small relative slack keeps offsets that sit exactly on the window
    # boundary from being dropped by rounding
    mask = (dx * dx + dy * dy + dz * dz) * vox.h ** 2 <= r * r * (1.0 + 1e-12)
    counts = signal.fftconvolve(vox.occupancy.astype(np.float64), mask.astype(np.float64), mode="full")
    best = float(np.rint(counts.max()))
    return min(best * vox.h ** 3, volume(vox), UNIT_BALL_VOLUME * r ** 3)


# ---------------------------------------------------------------------------
# voxelization
# ---------------------------------------------------------------------------

def voxelize(shape, h: float) -> VoxelSet:
    """Rasterize a shape onto the global lattice ``h * Z^3``.

    A cell is occupied iff its center lies in the shape (no antialiasing),
    which keeps the voxel volume exactly ``h^3 * count``.  Snapping the grid
    origin to multiples of ``h`` makes voxelization commute with lattice
    translations of the input.
    """
    if h <= 0.0:
        raise ValueError("grid spacing h must be positive")
    if isinstance(shape, BallConfiguration):
        if len(shape) == 0:
            return VoxelSet.empty(h)
        lo = (shape.centers - shape.radii[:, None]).min(axis=0)
        hi = (shape.centers + shape.radii[:, None]).max(axis=0)
    elif isinstance(shape, AxisymmetricShape):
        u = np.linspace(-1.0, 1.0, 1441)
        rmax = float(shape.radius(u).max())
        lo = np.full(3, -rmax)
        hi = np.full(3, rmax)
    else:
        raise TypeError(f"cannot voxelize {type(shape).__name__}")

    origin = (np.floor(lo / h) - 1.0) * h
    n = np.ceil((hi - origin) / h).astype(int) + 1
    axes = [origin[k] + (np.arange(n[k]) + 0.5) * h for k in range(3)]
    X, Y, Z = np.meshgrid(*axes, indexing="ij")

    if isinstance(shape, BallConfiguration):
        occ = np.zeros(tuple(n), dtype=bool)
        for c, radius in zip(shape.centers, shape.radii):
            occ |= (X - c[0]) ** 2 + (Y - c[1]) ** 2 + (Z - c[2]) ** 2 <= radius * radius
    else:
        rho = np.sqrt(X * X + Y * Y + Z * Z)
        with np.errstate(invalid="ignore", divide="ignore"):
            cos_theta = np.where(rho > 0.0, Z / np.where(rho > 0.0, rho, 1.0), 1.0)
        occ = rho <= shape.radius(cos_theta)
    return VoxelSet(origin, h, occ)


# ---------------------------------------------------------------------------
# file formats
# ---------------------------------------------------------------------------

def save_ball_configuration(config: BallConfiguration, path) -> None:
    """Write one ``x y z r`` line per ball."""
    with open(path, "w") as fh:
        for c, radius in zip(config.centers, config.radii):
            fh.write(f"{float(c[0])!r} {float(c[1])!r} {float(c[2])!r} {float(radius)!r}\n")


def load_ball_configuration(path) -> BallConfiguration:
    centers, radii = [], []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 4:
                raise ValueError(f"expected 'x y z r', got {line!r}")
            centers.append([float(v) for v in parts[:3]])
            radii.append(float(parts[3]))
    if not centers:
        return BallConfiguration.empty()
    return BallConfiguration(np.array(centers), np.array(radii))


def save_voxel_set(vox: VoxelSet, path) -> None:
    """Write the run-length-encoded voxel format.

    Header ``voxel <nx> <ny> <nz> <h> <ox> <oy> <oz>`` followed by integer
    run lengths in x-fastest order, alternating empty/occupied runs and
    starting with an empty run (possibly of length 0).
    """
    flat = np.ravel(vox.occupancy, order="F").astype(np.int8)
    runs = []
    if flat.size:
        change = np.flatnonzero(np.diff(flat)) + 1
        bounds = np.concatenate([[0], change, [flat.size]])
        lengths = np.diff(bounds)
        if flat[0] == 1:  # format starts with an empty run
            runs.append(0)
        runs.extend(int(v) for v in lengths)
    nx, ny, nz = vox.occupancy.shape
    ox, oy, oz = (float(v) for v in vox.origin)
    with open(path, "w") as fh:
        fh.write(f"voxel {nx} {ny} {nz} {vox.h!r} {ox!r} {oy!r} {oz!r}\n")
        for start in range(0, len(runs), 16):
            fh.write(" ".join(str(v) for v in runs[start:start + 16]) + "\n")


def load_voxel_set(path) -> VoxelSet:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 8 or header[0] != "voxel":
            raise ValueError("missing 'voxel <nx> <ny> <nz> <h> <ox> <oy> <oz>' header")
        nx, ny, nz = (int(v) for v in header[1:4])
        h = float(header[4])
        origin = np.array([float(v) for v in header[5:8]])
        runs = [int(tok) for line in fh for tok in line.split()]
    total = nx * ny * nz
    if sum(runs) != total:
        raise ValueError(f"run lengths sum to {sum(runs)}, expected {total}")
    flat = np.zeros(total, dtype=bool)
    pos = 0
    for i, run in enumerate(runs):
        if i % 2 == 1:
            flat[pos:pos + run] = True
        pos += run
    return VoxelSet(origin, h, flat.reshape((nx, ny, nz), order="F"))
