"""segmarket: a numerical laboratory for segmented intermediary markets.

Computes market outcomes and Nash equilibria of the branch-placement /
price-concession game, runs comparative-statics experiments against the
model's directional predictions, and validates panel difference-in-
differences designs on synthetic data with injected ground truth.
"""

from .config import (
    ConfigError,
    FormParams,
    IntermediaryProfile,
    MarketConfig,
    StrategyProfile,
    config_from_dict,
    load_config,
)
from .economics import WelfareReport, welfare_decompose
from .kernels import BACKEND_NAME
from .market import MarketOutcome, evaluate, hhi
from .solver import (
    EquilibriumResult,
    SolverSettings,
    best_response,
    epsilon_nash_verify,
    iterated_best_response,
    solve,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND_NAME", "ConfigError", "EquilibriumResult", "FormParams",
    "IntermediaryProfile", "MarketConfig", "MarketOutcome", "SolverSettings",
    "StrategyProfile", "WelfareReport", "best_response", "config_from_dict",
    "epsilon_nash_verify", "evaluate", "hhi", "iterated_best_response",
    "load_config", "solve", "welfare_decompose", "__version__",
]
