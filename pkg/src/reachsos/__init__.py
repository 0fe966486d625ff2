"""Certified outer approximations of reachable sets for discrete-time polynomial systems.

The library assembles the moment/SOS semidefinite relaxation hierarchy for a
polynomial reachability problem, solves it with a built-in interior-point
solver, and certifies the resulting polynomial super-level sets against
simulated trajectories.
"""

from .conic import ConicProgram, Solution, SolverError, residuals
from .moments import DomainGeometry, MomentSequence, geometry_moment, mc_moment, moment_vector
from .polynomials import (
    MonomialBasis,
    Polynomial,
    basis_size,
    coefficient_vector,
    enumerate_basis,
)
from .sets import (
    DEFAULT_SEED,
    DynamicalSystem,
    ReachProblem,
    SemialgebraicSet,
    half_degrees,
    validate_archimedean,
)

__all__ = [
    "ConicProgram",
    "Solution",
    "SolverError",
    "residuals",
    "DomainGeometry",
    "MomentSequence",
    "geometry_moment",
    "mc_moment",
    "moment_vector",
    "MonomialBasis",
    "Polynomial",
    "basis_size",
    "coefficient_vector",
    "enumerate_basis",
    "DEFAULT_SEED",
    "DynamicalSystem",
    "ReachProblem",
    "SemialgebraicSet",
    "half_degrees",
    "validate_archimedean",
]

__version__ = "0.1.0"
