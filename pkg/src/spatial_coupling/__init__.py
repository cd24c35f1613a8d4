"""Spatially coupled scalar systems: potentials, fixed points and displacement convexity."""

from .coupled_solver import (
    SolverConfig,
    is_cfp,
    minimize,
    reconstruct_update,
    solve_fixed_point,
    uniqueness_test,
)
from .displacement import (
    convexity_sweep,
    displacement_field_D,
    interpolate_profile,
    second_derivative_W,
)
from .potential_functional import PGCViolation, W_kappa, big_W, breakdown, cross_term, uncoupled_L, xi_phi
from .profiles import Grid, Profile, ProfilePair, quantile, rearrange_increasing, saturate, translate
from .scalar_systems import (
    FAMILIES,
    CalibrationError,
    ScalarSystem,
    UpdateFunction,
    calibrate,
    check_gap_condition,
)
from .window_kernels import Window, gaussian_window, triangular_window, uniform_window

__version__ = "0.1.0"
