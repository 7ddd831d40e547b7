"""
Secrecy Outage Toolkit
Analytic and Monte Carlo secrecy outage probabilities for a multi-antenna
base station that uses transmit antenna selection toward one half- or
full-duplex user among Poisson-distributed eavesdroppers.
"""

__version__ = "1.0.0"

from .errors import (SecrecyOutageError, ParameterError, DomainError, NoConvergence,
                     EmptyInput, NoSignChange, InsufficientPoints)
from .params import (Duplex, EdModel, Scenario, SystemParams, ValidatedParams,
                     validate, load_params, save_params)
from .analytic import (AnalyticResult, Kind, Method, evaluate,
                       sop_hd_independent, sop_hd_independent_lower_bound,
                       sop_hd_colluding, sop_fd_independent_bound,
                       sop_fd_colluding_bound, sop_fd_colluding_approx_alpha2)
from .simcore import OutageDefinition, SopEstimate, estimate_sop
from .harness import (SweepMethod, SweepSpec, SweepResult, Trend, run_sweep,
                      trend_check, crossover_search, emit_csv, read_csv,
                      emit_plot_script, load_recipe, list_recipes, run_recipe)

__all__ = [
    "SecrecyOutageError", "ParameterError", "DomainError", "NoConvergence",
    "EmptyInput", "NoSignChange", "InsufficientPoints",
    "Duplex", "EdModel", "Scenario", "SystemParams", "ValidatedParams",
    "validate", "load_params", "save_params",
    "AnalyticResult", "Kind", "Method", "evaluate",
    "sop_hd_independent", "sop_hd_independent_lower_bound", "sop_hd_colluding",
    "sop_fd_independent_bound", "sop_fd_colluding_bound", "sop_fd_colluding_approx_alpha2",
    "OutageDefinition", "SopEstimate", "estimate_sop",
    "SweepMethod", "SweepSpec", "SweepResult", "Trend", "run_sweep", "trend_check",
    "crossover_search", "emit_csv", "read_csv", "emit_plot_script",
    "load_recipe", "list_recipes", "run_recipe",
]
