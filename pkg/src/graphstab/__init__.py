"""Numerical stability toolkit for the positive mass theorem on graphs.

Asymptotically flat graphs ``x^{n+1} = f(x)`` in R^{n+1} with nonnegative
scalar curvature: ADM mass from the flux integral, level-set volume
functions and their differential inequalities, the comparison ODE behind
the height bounds, and explicit flat-distance estimates to a plane.
"""

from .errors import (ConvergenceError, DomainError, GraphStabError, InternalError,
                     OutwardMinimizingUnverified, PreconditionError, RegularValueError)
from .geometry import (BoundaryBall, GraphFunction, Plane, RadialGraph, constants,
                       scalar_curvature_gauss, scalar_curvature_reilly)
from .schwarzschild import (MassProfile, profile_from_mass, schwarzschild_graph,
                            schwarzschild_height, schwarzschild_profile, schwarzschild_sup)
from .mass import adm_mass, lam_identity_residual, mass_flux, quasilocal_mass
from .levelsets import h_zero, level_volume, minkowski_gap, volume_function
from .comparison import (AsymptoticProfile, comparison_check, comparison_constant,
                         integrate_comparison)
from .flatnorm import Ball, convergence_study, flat_distance_upper, theorem_bound

__version__ = "0.1.0"

__all__ = [
    "AsymptoticProfile", "Ball", "BoundaryBall", "ConvergenceError", "DomainError",
    "GraphFunction", "GraphStabError", "InternalError", "MassProfile",
    "OutwardMinimizingUnverified", "Plane", "PreconditionError", "RadialGraph",
    "RegularValueError", "adm_mass", "comparison_check", "comparison_constant", "constants",
    "convergence_study", "flat_distance_upper", "h_zero", "integrate_comparison",
    "lam_identity_residual", "level_volume", "mass_flux", "minkowski_gap",
    "profile_from_mass", "quasilocal_mass", "scalar_curvature_gauss",
    "scalar_curvature_reilly", "schwarzschild_graph", "schwarzschild_height",
    "schwarzschild_profile", "schwarzschild_sup", "theorem_bound", "volume_function",
]
