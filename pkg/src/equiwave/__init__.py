"""Numerical laboratory for equivariant wave maps between surfaces of
revolution: stationary profiles by action minimization, constrained
leapfrog evolution, conservation diagnostics, comparison geometry, and
radial operator identities."""

from ._kernels import IMPL as kernel_impl
from .profiles import (SurfaceProfile, TargetProfile, bumpy_surface,
                       flat_surface, round_surface, round_target,
                       tabulated_surface, validate_profile)
from .stationary import (SolverOptions, StationarySolution, reduced_action,
                         solve_stationary)
from .evolution import FieldState, perturb_state, run, state_from_stationary
from .geodesics import GeodesicTriangle, geodesic_distance, geodesic_trace

__version__ = "0.1.0"

__all__ = [
    "SurfaceProfile", "TargetProfile", "StationarySolution", "FieldState",
    "GeodesicTriangle", "SolverOptions", "round_surface", "bumpy_surface",
    "flat_surface", "tabulated_surface", "round_target", "validate_profile",
    "reduced_action", "solve_stationary", "state_from_stationary",
    "perturb_state", "run", "geodesic_distance", "geodesic_trace",
    "kernel_impl", "__version__",
]
