"""Steady FENE dumbbell Fokker-Planck solver on the unit disk."""

__version__ = "0.1.0"

from .assembly import OperatorMatrices, apply_L, assemble, bilinear_a_alpha
from .basis import (
    BasisSpec,
    DistributionField,
    QuadratureRule,
    build_basis,
    build_quadrature,
    equilibrium_density,
    evaluate_field,
)
from .eigen import (
    EigenReport,
    SolverConfig,
    full_spectrum,
    principal_eigenpair,
    solve_B_alpha,
    spectral_radius_estimate,
)
from .model import (
    AlphaParams,
    DriftField,
    FeneParams,
    compute_alpha,
    compute_j0,
    fene_force,
    log_weight_gradient,
    weight,
)
from .observables import (
    MaterialFunctions,
    StressTensor,
    kramers_stress,
    macroscopic_flow,
    material_functions,
    ratio_bounds,
    x_beta_norm,
)

__all__ = [name for name in dir() if not name.startswith("_")]
