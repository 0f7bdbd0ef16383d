"""Gauss maps of hypersurfaces into spaces of oriented geodesics.

Numerical verification of the (para-)Kaehler structures on the space of
oriented geodesics of a pseudo-Riemannian space form, of the Lagrangian and
Hamiltonian properties of Gauss maps, and of the curvature functionals whose
critical points are Hamiltonian minimal.
"""

from .errors import ConfigError, GeometryError
from .functionals import evaluate_functional, functional_HK, functional_W, functional_Wprime, vol_gauss
from .gauss_map import gauss
from .geodesic_space import SpaceFormConfig, make_geodesic
from .hminimality import first_variation, hminimal_residual, potential
from .hypersurface import Grid, ImmersionChart, analyze
from .optimize import certify_critical, evaluate, make_family, minimize
from .surfaces import examples

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "GeometryError", "Grid", "ImmersionChart", "SpaceFormConfig", "analyze", "certify_critical",
    "evaluate", "evaluate_functional", "examples", "first_variation", "functional_HK", "functional_W",
    "functional_Wprime", "gauss", "hminimal_residual", "make_family", "make_geodesic", "minimize", "potential",
    "vol_gauss",
]
