"""Phase-I estimation and Phase-II monitoring of a count series."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..calibrate import CalibrationResult, CalibrationSpec, calibrate_L
from ..chart import ChartConfig, ControlLimits, compute_limits, ewma_step, signals, start_state
from ..distributions import Family, ZinbParams
from ..errors import DomainError, InsufficientPhase1
from ..inference import FitResult, fit, select_model
from ..runlength import DEFAULT_REPS

MIN_PHASE1 = 30


@dataclass(frozen=True)
class MonitoringPoint:
    index: int
    ybar: float
    z: float
    signal: bool


@dataclass(frozen=True)
class MonitoringRun:
    phase1_end: int
    config: ChartConfig
    limits: ControlLimits
    points: tuple[MonitoringPoint, ...]
    ooc_indices: tuple[int, ...]
    fit: FitResult | None = None
    calibration: CalibrationResult | None = None
    notes: tuple[str, ...] = field(default_factory=tuple)

    @property
    def phase1_signals(self) -> tuple[int, ...]:
        return tuple(p.index for p in self.points if p.signal and p.index <= self.phase1_end)


def subgroup_means(data: Sequence[int], n: int) -> np.ndarray:
    y = np.asarray(data, dtype=float)
    usable = (len(y) // n) * n
    return y[:usable].reshape(-1, n).mean(axis=1)


def estimate_phase1(data: Sequence[int], family: Family | str = "auto") -> FitResult:
    if family == "auto":
        return select_model(data).best
    return fit(family, data)


def monitor(
    data: Sequence[int],
    phase1_end: int,
    lam: float,
    L: float | None = None,
    target_arl0: float | None = None,
    family: Family | str = "auto",
    params: ZinbParams | None = None,
    n: int = 1,
    reps: int = DEFAULT_REPS,
    seed: int = 0,
    reset_at_phase2: bool = False,
    workers: int = 1,
) -> MonitoringRun:
    """Fit Phase I, set the limits and run the chart over the whole series.

    ``phase1_end`` counts subgroups (observations when ``n == 1``); indices in
    the result are 1-based. Exactly one of ``L`` and ``target_arl0`` is given.
    With ``params`` the Phase-I fit is skipped and those values are used.
    """
    means = subgroup_means(data, n)
    if not 1 <= phase1_end < len(means):
        raise DomainError(f"phase1_end must lie in [1, {len(means) - 1}], got {phase1_end}")
    if (L is None) == (target_arl0 is None):
        raise DomainError("give exactly one of L and target_arl0")
    if phase1_end < MIN_PHASE1:
        warnings.warn(f"Phase I has only {phase1_end} samples", InsufficientPhase1, stacklevel=2)

    fitted = None
    if params is None:
        fitted = estimate_phase1(list(data[: phase1_end * n]), family)
        params = fitted.model.to_zinb_params()

    calibration = None
    if L is None:
        spec = CalibrationSpec(
            lam=lam, n=n, params=params, target_arl0=target_arl0, reps=reps, master_seed=seed,
            method="exact" if lam == 1.0 else "mc",
        )
        calibration = calibrate_L(spec, workers=workers)
        L = calibration.l_star
    config = ChartConfig(lam, L, n, params)
    limits = compute_limits(config)

    state = start_state(limits)
    points = []
    for i, ybar in enumerate(means, start=1):
        if reset_at_phase2 and i == phase1_end + 1:
            state = start_state(limits)
        state = ewma_step(state, float(ybar), lam)
        points.append(MonitoringPoint(i, float(ybar), state.z, signals(state, limits)))
    ooc = tuple(p.index for p in points if p.signal and p.index > phase1_end)
    notes = ()
    if calibration is not None and calibration.plateau:
        notes = (f"target ARL0 {target_arl0} not attainable; using ARL0 {calibration.achieved_arl:.2f}",)
    return MonitoringRun(phase1_end, config, limits, tuple(points), ooc, fitted, calibration, notes)


@dataclass(frozen=True)
class SweepRow:
    lam: float
    L: float
    ucl: float
    ooc_indices: tuple[int, ...]
    matches: bool | None


def sweep_lambda(
    data: Sequence[int],
    phase1_end: int,
    lambdas: Sequence[float] = (0.05, 0.10, 0.15, 0.20, 0.25),
    target_arl0: float = 500.0,
    expected_ooc: Sequence[int] | None = None,
    **kwargs,
) -> list[SweepRow]:
    """Monitor under several smoothing constants, each calibrated to ``target_arl0``.

    Useful when a reference OOC set is known but the chart design behind it is not.
    """
    rows = []
    expected = None if expected_ooc is None else tuple(sorted(expected_ooc))
    for lam in lambdas:
        run = monitor(data, phase1_end, lam, target_arl0=target_arl0, **kwargs)
        rows.append(SweepRow(lam, run.config.L, run.limits.ucl, run.ooc_indices,
                             None if expected is None else run.ooc_indices == expected))
    return rows

