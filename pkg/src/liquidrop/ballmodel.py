"""Closed-form energy curve for balls and the dissociation solver.

For a single ball of volume A the surface and Coulomb terms scale as
A^(2/3) and A^(5/3), so the energy per particle is

    e_ball(A) = p * A^(-1/3) + q * A^(2/3)

with p = Per(B) / |B|^(2/3) and q = D(B) / |B|^(5/3) for the unit ball B.
In these units p / q = |B| Per(B) / D(B) = 5 exactly, the curve bottoms out
at A = p / (2 q) = 5/2, and splitting mass into k far-separated equal balls
gives the dissociation curve  min_k e_ball(A / k)  with explicit switch
points a_k.  Everything in this module is a pure scalar/array formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import riesz as _riesz
from .geometry import UNIT_BALL_AREA, UNIT_BALL_VOLUME

__all__ = [
    "BallCurveParams",
    "DissociationResult",
    "SplitParams",
    "ball_energy_per_particle",
    "critical_ball_mass",
    "dissociation_energy",
    "dissociation_threshold",
    "optimal_scale",
    "scale_invariant_ratio",
    "split_companion",
    "split_function",
    "virial_residual",
]

#: Coulomb self energy of the unit ball, (3/5) Q^2 / R at R = 1.
UNIT_BALL_COULOMB = _riesz.ball_riesz_self_energy(1.0)


@dataclass(frozen=True)
class BallCurveParams:
    """Surface and Coulomb coefficients of the per-particle ball curve.

    Computed from the unit-ball measures rather than hard-coded decimals so
    that the dimensionless identity p / q = 5 holds to machine precision.
    """

    p: float
    q: float

    def __post_init__(self):
        if self.p <= 0.0 or self.q <= 0.0:
            raise ValueError("p and q must be positive")
        if abs(self.p / self.q - 5.0) > 1e-12:
            raise ValueError("p / q must equal 5 (got %r)" % (self.p / self.q,))

    @classmethod
    def from_unit_ball(cls) -> "BallCurveParams":
        p = UNIT_BALL_AREA / UNIT_BALL_VOLUME ** (2.0 / 3.0)
        q = UNIT_BALL_COULOMB / UNIT_BALL_VOLUME ** (5.0 / 3.0)
        return cls(p, q)


LIQUID_DROP_CURVE = BallCurveParams.from_unit_ball()


@dataclass(frozen=True)
class DissociationResult:
    """Best split of mass A into k equal far-separated balls."""

    k: int
    energy_per_particle: float
    per_ball_mass: float


@dataclass(frozen=True)
class SplitParams:
    """Weight of the A^(5/3) term in the two-ball splitting comparison.

    This is a free positive parameter of the splitting inequality, not the
    Riesz kernel exponent of :class:`liquidrop.riesz.RieszParams`.
    """

    lambda_split: float

    def __post_init__(self):
        if self.lambda_split <= 0.0:
            raise ValueError("lambda_split must be positive")


def ball_energy_per_particle(mass, params: BallCurveParams = LIQUID_DROP_CURVE):
    """e_ball(A) = p A^(-1/3) + q A^(2/3); accepts scalars or arrays."""
    a = np.asarray(mass, dtype=np.float64)
    if np.any(a <= 0.0):
        raise ValueError("mass must be positive")
    out = params.p * a ** (-1.0 / 3.0) + params.q * a ** (2.0 / 3.0)
    return float(out) if np.isscalar(mass) or out.ndim == 0 else out


def critical_ball_mass(params: BallCurveParams = LIQUID_DROP_CURVE) -> float:
    """Minimizer p / (2 q) of the per-particle ball curve (= 5/2)."""
    return params.p / (2.0 * params.q)


def virial_residual(shape, params: _riesz.RieszParams = _riesz.LIQUID_DROP) -> float:
    """Per - 2 D, the stationarity defect under dilations.

    Vanishes exactly at volume-constrained critical points of the total
    energy with respect to rescaling; for balls the root is at volume 5/2.
    """
    breakdown = _riesz.total_energy(shape, params)
    return breakdown.perimeter - 2.0 * breakdown.riesz


@dataclass(frozen=True)
class ScaleOptimum:
    """Result of minimizing energy per unit volume over dilations."""

    scale: float
    energy_per_particle: float


def optimal_scale(shape, params: _riesz.RieszParams = _riesz.LIQUID_DROP) -> ScaleOptimum:
    """Best dilation of a unit-volume shape and the value it achieves.

    For |w| = 1 the energy per particle of the dilate l*w is
    l^(-1) Per(w) + l^2 D(w), minimized at l = (Per(w) / (2 D(w)))^(1/3)
    with minimum value 2^(-2/3) * 3 * Per(w)^(2/3) D(w)^(1/3).
    """
    breakdown = _riesz.total_energy(shape, params)
    if abs(breakdown.volume - 1.0) > 1e-9:
        raise ValueError("optimal_scale expects a unit-volume shape (caller normalizes)")
    if breakdown.riesz <= 0.0:
        raise ValueError("shape has no interaction energy; scale optimum undefined")
    scale = (breakdown.perimeter / (2.0 * breakdown.riesz)) ** (1.0 / 3.0)
    value = 2.0 ** (-2.0 / 3.0) * 3.0 * breakdown.perimeter ** (2.0 / 3.0) * breakdown.riesz ** (1.0 / 3.0)
    return ScaleOptimum(scale, value)


def scale_invariant_ratio(shape, params: _riesz.RieszParams = _riesz.LIQUID_DROP) -> float:
    """Per^(2/3) D^(1/3) / |set|, invariant under dilations."""
    breakdown = _riesz.total_energy(shape, params)
    if breakdown.volume <= 0.0:
        raise ValueError("scale-invariant ratio undefined for empty sets")
    return breakdown.perimeter ** (2.0 / 3.0) * breakdown.riesz ** (1.0 / 3.0) / breakdown.volume


def dissociation_energy(mass: float, params: BallCurveParams = LIQUID_DROP_CURVE) -> DissociationResult:
    """min_k e_ball(A / k) over k >= 1 equal far-separated balls.

    Iterates k upward and stops once the surface term alone,
    p (k / A)^(1/3), exceeds the incumbent; the surface term grows
    monotonically in k, so this certifies termination without a cap.
    """
    if mass <= 0.0:
        raise ValueError("mass must be positive")
    best_k, best = 1, ball_energy_per_particle(mass, params)
    k = 2
    while True:
        surface = params.p * (k / mass) ** (1.0 / 3.0)
        if surface > best:
            break
        value = ball_energy_per_particle(mass / k, params)
        if value < best:
            best_k, best = k, value
        k += 1
    return DissociationResult(best_k, best, mass / best_k)


def dissociation_threshold(k: int, params: BallCurveParams = LIQUID_DROP_CURVE) -> float:
    """Mass a_k at which k balls and k+1 balls tie.

    Solving e_ball(a / k) = e_ball(a / (k+1)) for a gives

        a_k = (p / q) * ((k+1)^(1/3) - k^(1/3)) / (k^(-2/3) - (k+1)^(-2/3)).
    """
    if int(k) != k or k < 1:
        raise ValueError("k must be a positive integer")
    k = float(k)
    num = (k + 1.0) ** (1.0 / 3.0) - k ** (1.0 / 3.0)
    den = k ** (-2.0 / 3.0) - (k + 1.0) ** (-2.0 / 3.0)
    return params.p / params.q * num / den


def split_function(theta, params: SplitParams):
    """f(t) = t^(2/3) + (1-t)^(2/3) + lambda (t^(5/3) + (1-t)^(5/3)).

    Comparing one ball against two far-separated fragments with mass
    fractions t and 1 - t produces exactly this combination; its minimum
    over [0, 1] is always attained within {0, 1/2, 1}.
    """
    t = np.asarray(theta, dtype=np.float64)
    if np.any((t < 0.0) | (t > 1.0)):
        raise ValueError("theta must lie in [0, 1]")
    s = 1.0 - t
    out = t ** (2.0 / 3.0) + s ** (2.0 / 3.0) + params.lambda_split * (t ** (5.0 / 3.0) + s ** (5.0 / 3.0))
    return float(out) if np.isscalar(theta) or out.ndim == 0 else out


def split_companion(theta):
    """g(t) = ((1-t)^(2/3) - t^(2/3)) / (t^(-1/3) - (1-t)^(-1/3)).

    Concave on [0, 1], symmetric about 1/2, with g(0) = g(1) = 0 and the
    removable-singularity value g(1/2) = 1 filled in explicitly.
    """
    scalar = np.isscalar(theta) or np.asarray(theta).ndim == 0
    t = np.atleast_1d(np.asarray(theta, dtype=np.float64))
    if np.any((t < 0.0) | (t > 1.0)):
        raise ValueError("theta must lie in [0, 1]")
    s = 1.0 - t
    out = np.empty_like(t)
    edge = (t == 0.0) | (t == 1.0)
    mid = t == 0.5
    rest = ~(edge | mid)
    out[edge] = 0.0
    out[mid] = 1.0
    tr, sr = t[rest], s[rest]
    out[rest] = (sr ** (2.0 / 3.0) - tr ** (2.0 / 3.0)) / (tr ** (-1.0 / 3.0) - sr ** (-1.0 / 3.0))
    return float(out[0]) if scalar else out
