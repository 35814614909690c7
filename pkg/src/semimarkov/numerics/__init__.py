"""Double-precision numerical kernels used throughout the package."""

from .eigen import hermitian_eigenvalues, trace_norm
from .laplace import IntervalSet, PoleExpansion, RationalLaplace, invert_laplace, partial_fractions
from .ode import ode_evolve
from .quadrature import integrate
from .roots import brent, find_roots

__all__ = [
    "IntervalSet",
    "PoleExpansion",
    "RationalLaplace",
    "brent",
    "find_roots",
    "hermitian_eigenvalues",
    "integrate",
    "invert_laplace",
    "ode_evolve",
    "partial_fractions",
    "trace_norm",
]
