"""Ruin and dividend measures for the dual risk model with Erlang(n) inter-gain times."""

from .errors import NumericalError, RepresentationError, ValidationError
from .expopoly import ExpoPolynomial, RationalFunction
from .lundberg import LundbergRootSet
from .model import GainDistribution, IncomeCondition, ModelSpec, combexp_gains, erlang2_gains, income_condition
from .ruin import psi, psi_ultimate, ruin_transform
from .dividends import dividend_transform, expected_dividends, first_dividend_share, phi, v_moment
from .divdist import G, chi, g_conditional, g_density, xi
from .counts import q, q_distribution, r, r_tail
from .sim import Estimate, SimulationConfig

__version__ = "0.1.0"

__all__ = [
    "NumericalError",
    "RepresentationError",
    "ValidationError",
    "ExpoPolynomial",
    "RationalFunction",
    "LundbergRootSet",
    "GainDistribution",
    "IncomeCondition",
    "ModelSpec",
    "combexp_gains",
    "erlang2_gains",
    "income_condition",
    "psi",
    "psi_ultimate",
    "ruin_transform",
    "dividend_transform",
    "expected_dividends",
    "first_dividend_share",
    "phi",
    "v_moment",
    "G",
    "chi",
    "g_conditional",
    "g_density",
    "xi",
    "q",
    "q_distribution",
    "r",
    "r_tail",
    "Estimate",
    "SimulationConfig",
]
