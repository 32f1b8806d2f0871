"""Zero-inflated negative binomial EWMA and Shewhart control charts."""

from .calibrate import CalibrationResult, CalibrationSpec, calibrate_L, shewhart_arl_exact
from .chart import ChartConfig, ControlLimits, EwmaState, compute_limits, ewma_step, signals
from .distributions import CountModel, Family, ZinbParams, zinb_mean, zinb_pmf, zinb_sample, zinb_variance
from .errors import (
    BoundaryWarning,
    BracketError,
    ConvergenceError,
    DomainError,
    InsufficientPhase1,
    NegativeCountError,
    ParseError,
)
from .inference import FitResult, dispersion_report, fit, select_model
from .runlength import RunLengthSummary, SimulationJob, estimate_arl, simulate_run_length

__version__ = "0.1.0"
