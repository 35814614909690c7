"""Classical and quantum semi-Markov dynamics of two-state systems."""

from . import _backend
from .classical import SemiMarkovSpec, intermediate_propagator, is_stochastic, kolmogorov_distance, p_divisible
from .errors import (
    ConsistencyError,
    DivergenceError,
    InsufficientSamplesError,
    InvalidInputError,
    NumericalError,
    SingularityError,
    UndefinedPropagatorError,
)
from .measures import Divisibility, blp_measure, blp_measure_search, classify, rhp_measure
from .quantum import Model, ModelSpec
from .renewal import ErlangTwo, Exponential, Hypoexponential, Mixture, WaitingTime

__version__ = "0.1.0"
BACKEND = _backend.NAME

__all__ = [
    "BACKEND",
    "ConsistencyError",
    "DivergenceError",
    "Divisibility",
    "ErlangTwo",
    "Exponential",
    "Hypoexponential",
    "InsufficientSamplesError",
    "InvalidInputError",
    "Mixture",
    "Model",
    "ModelSpec",
    "NumericalError",
    "SemiMarkovSpec",
    "SingularityError",
    "UndefinedPropagatorError",
    "WaitingTime",
    "blp_measure",
    "blp_measure_search",
    "classify",
    "intermediate_propagator",
    "is_stochastic",
    "kolmogorov_distance",
    "p_divisible",
    "rhp_measure",
]
