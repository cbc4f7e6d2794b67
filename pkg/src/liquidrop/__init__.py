"""Surface-plus-Coulomb energies of sets in R^3.

Core quantities: exact energies of disjoint ball configurations, voxel
estimators for arbitrary measurable sets, closed-form ball curves with the
dissociation-into-balls solver, shape-optimized upper bounds on the minimal
energy at fixed volume, and sphere-cut decomposition diagnostics.
"""

from .ballmodel import (
    BallCurveParams,
    DissociationResult,
    SplitParams,
    ball_energy_per_particle,
    critical_ball_mass,
    dissociation_energy,
    dissociation_threshold,
    optimal_scale,
    scale_invariant_ratio,
    split_companion,
    split_function,
    virial_residual,
)
from .curve import (
    BindingCurve,
    OptimizerConfig,
    build_curve,
    diameter_monitor,
    estimate_min_energy,
    instability_threshold,
    relaxed_curve,
    stability_probe,
    structural_checks,
)
from .decomposition import (
    SplitResult,
    concentration_report,
    select_split_radius,
    split,
    vanishing_sequence_demo,
)
from .geometry import (
    AxisymmetricShape,
    BallConfiguration,
    VoxelSet,
    ball_of_volume,
    concentration,
    diameter,
    load_ball_configuration,
    load_voxel_set,
    perimeter,
    save_ball_configuration,
    save_voxel_set,
    volume,
    voxelize,
)
from .riesz import (
    EnergyBreakdown,
    RieszParams,
    ball_riesz_self_energy,
    coulomb_energy_balls,
    cross_energy,
    potential_sup_bound,
    riesz_energy_axisymmetric,
    riesz_energy_voxel,
    total_energy,
    voxel_potential,
)

__version__ = "0.1.0"
