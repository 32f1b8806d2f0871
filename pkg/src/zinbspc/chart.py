"""EWMA / Shewhart monitoring statistic and asymptotic control limits."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .distributions import ZinbParams, zinb_mean, zinb_variance
from .errors import DomainError


@dataclass(frozen=True)
class ChartConfig:
    """Chart design. ``lam == 1`` is the Shewhart chart."""

    lam: float
    L: float
    n: int
    params: ZinbParams

    def __post_init__(self):
        if not 0.0 < self.lam <= 1.0:
            raise DomainError(f"lambda must lie in (0, 1], got {self.lam}")
        if not (math.isfinite(self.L) and self.L > 0):
            raise DomainError(f"L must be positive, got {self.L}")
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n}")

    @property
    def is_shewhart(self) -> bool:
        return self.lam == 1.0

    def with_L(self, L: float) -> "ChartConfig":
        return ChartConfig(self.lam, L, self.n, self.params)


@dataclass(frozen=True)
class ControlLimits:
    ucl: float
    cl: float
    lcl: float


@dataclass(frozen=True)
class EwmaState:
    z: float
    t: int = 0


def half_width(config: ChartConfig) -> float:
    var = zinb_variance(config.params)
    return config.L * math.sqrt(config.lam * var / (config.n * (2.0 - config.lam)))


def compute_limits(config: ChartConfig) -> ControlLimits:
    cl = zinb_mean(config.params)
    width = half_width(config)
    return ControlLimits(ucl=cl + width, cl=cl, lcl=max(0.0, cl - width))


def start_state(limits: ControlLimits) -> EwmaState:
    # The recursion starts on the center line.
    return EwmaState(z=limits.cl, t=0)


def ewma_step(state: EwmaState, ybar: float, lam: float) -> EwmaState:
    return EwmaState(z=lam * ybar + (1.0 - lam) * state.z, t=state.t + 1)


def signals(state: EwmaState, limits: ControlLimits) -> bool:
    """Upper-sided rule: strict exceedance of the UCL."""
    return state.z > limits.ucl
