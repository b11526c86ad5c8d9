"""Equifocal submanifolds in symmetric spaces of compact type.

Lie algebra substrate, curvature of symmetric spaces, orbit germs with their
normal geometry, the polar group of the normal holonomy system, focal data,
partial tubes and the reconstruction of equifocal submanifolds.
"""
from . import errors, liealg, symspace, orbits, holonomy, focal, tube, torusvar  # noqa: F401
from .liealg import CartanDecomposition, LieAlgebraModel, cartan_decompose, so, su
from .symspace import SymmetricSpaceGerm, named_germ
from .orbits import OrbitGerm, hermann_orbit_germ, srep_orbit_germ

__all__ = [
    "CartanDecomposition", "LieAlgebraModel", "OrbitGerm", "SymmetricSpaceGerm",
    "cartan_decompose", "hermann_orbit_germ", "named_germ", "so", "srep_orbit_germ", "su",
]
__version__ = "0.1.0"
