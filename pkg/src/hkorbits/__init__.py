"""Numerical verification of hyperkaehler structures on cohomogeneity-two nilpotent orbits."""

from __future__ import annotations

__version__ = "0.1.0"

from .algebra import AlgebraSpec, LieAlgebra, build_algebra
from .errors import DomainError, NumericalToleranceError, ParameterError, UnsupportedError
from .geometry import GeometryReport, Tolerances, verify_point
from .orbits import OrbitId, OrbitPoint, desk_orbits, measure_k2, random_orbit_point, representative
from .potentials import (G2Potential, ProductFamilyPotential, Sl2FamilyPotential,
                         TheoremPotential, parse_potential)

__all__ = [
    "AlgebraSpec", "LieAlgebra", "build_algebra",
    "DomainError", "NumericalToleranceError", "ParameterError", "UnsupportedError",
    "GeometryReport", "Tolerances", "verify_point",
    "OrbitId", "OrbitPoint", "desk_orbits", "measure_k2", "random_orbit_point", "representative",
    "G2Potential", "ProductFamilyPotential", "Sl2FamilyPotential", "TheoremPotential",
    "parse_potential",
]
