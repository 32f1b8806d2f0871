"""Choosing the limit multiplier L for a target in-control ARL.

ARL(L) is evaluated with common random numbers: every evaluation reuses the
same per-replication streams, so for a fixed seed ARL(L) is a deterministic,
nondecreasing step function and plain bisection is sound.

For integer-valued data the Shewhart ARL jumps between a few attainable values
(the discreteness plateau). When the target falls inside such a jump the result
is flagged ``plateau=True`` and reports the attainable ARLs on either side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import stats

from .chart import ChartConfig, compute_limits
from .distributions import ZinbParams
from .errors import BracketError, DomainError
from .runlength import (
    DEFAULT_MAX_RL,
    DEFAULT_REPS,
    RunLengthSummary,
    SimulationJob,
    run_lengths,
    summarize,
)

PlateauPolicy = Literal["nearest", "below", "above"]

L_WIDTH_FLOOR = 1e-3
MAX_ITERATIONS = 60


@dataclass(frozen=True)
class CalibrationSpec:
    lam: float
    n: int
    params: ZinbParams
    target_arl0: float = 500.0
    reps: int = DEFAULT_REPS
    tol_arl: float | None = None
    l_bracket: tuple[float, float] = (0.5, 12.0)
    master_seed: int = 0
    max_rl: int = DEFAULT_MAX_RL
    growth_cap: float = 4.0
    method: Literal["mc", "exact"] = "mc"
    plateau_policy: PlateauPolicy = "nearest"

    def __post_init__(self):
        lo, hi = self.l_bracket
        if not 0 < lo < hi:
            raise DomainError(f"need 0 < L_lo < L_hi, got {self.l_bracket}")
        if self.tol_arl is None:
            object.__setattr__(self, "tol_arl", max(0.5, 0.01 * self.target_arl0))
        if not self.tol_arl > 0:
            raise DomainError("tol_arl must be positive")
        if self.method == "exact" and self.lam != 1.0:
            raise DomainError("the exact method only applies to Shewhart charts (lambda = 1)")

    def chart(self, L: float) -> ChartConfig:
        return ChartConfig(self.lam, L, self.n, self.params)


@dataclass(frozen=True)
class CalibrationResult:
    l_star: float
    achieved_arl: float
    achieved_sdrl: float
    evaluations: int
    converged: bool
    plateau: bool = False
    arl_below: float | None = None
    arl_above: float | None = None
    summary: RunLengthSummary | None = None


def shewhart_arl_exact(params: ZinbParams, ucl: float, n: int = 1) -> float:
    """Exact Shewhart ARL, ``1 / P(Ybar > ucl)``; ``inf`` when the tail is empty.

    For ``n > 1`` the subgroup total of ``j`` non-inflated draws is NB(j*k, p),
    with ``j`` binomial, so the tail is a finite mixture.
    """
    if ucl < 0:
        return 1.0
    m = math.floor(n * ucl)
    if n == 1:
        tail = (1.0 - params.theta) * stats.nbinom.sf(m, params.k, params.p)
    else:
        tail = sum(
            stats.binom.pmf(j, n, 1.0 - params.theta) * stats.nbinom.sf(m, j * params.k, params.p)
            for j in range(1, n + 1)
        )
    tail = float(tail)
    return math.inf if tail <= 0.0 else 1.0 / tail


def _shewhart_sdrl_exact(arl: float) -> float:
    if math.isinf(arl):
        return math.inf
    q = 1.0 / arl
    return math.sqrt(1.0 - q) / q


class _Evaluator:
    """ARL(L) under common random numbers, with early exit far above target."""

    def __init__(self, spec: CalibrationSpec, workers: int):
        self.spec = spec
        self.workers = workers
        self.count = 0

    def __call__(self, L: float, early_exit: bool = True):
        """Return ``(arl, sdrl, summary)``.

        With ``early_exit`` an evaluation that is provably above the target
        band stops early and returns a lower bound with ``sdrl = nan``.
        """
        self.count += 1
        spec = self.spec
        if spec.method == "exact":
            arl = shewhart_arl_exact(spec.params, compute_limits(spec.chart(L)).ucl, spec.n)
            return arl, _shewhart_sdrl_exact(arl), None
        job = SimulationJob(spec.chart(L), reps=spec.reps, max_rl=spec.max_rl, master_seed=spec.master_seed)
        limits = compute_limits(job.chart)
        # Growing chunks; every run length is >= 1, so once the partial sum
        # exceeds target * reps the full mean is certainly above target.
        budget = (spec.target_arl0 + spec.tol_arl) * spec.reps
        done, chunk, total, parts = 0, 8, 0, []
        while done < spec.reps:
            stop = min(spec.reps, done + chunk)
            part = run_lengths(job, done, stop, self.workers, limits)
            parts.append(part)
            total += int(part.sum())
            done = stop
            if early_exit and done < spec.reps and total + (spec.reps - done) > budget:
                return (total + (spec.reps - done)) / spec.reps, math.nan, None
            chunk = min(2 * chunk, 1024)
        summary = summarize(np.concatenate(parts), spec.max_rl)
        return summary.arl, summary.sdrl, summary


def calibrate_L(spec: CalibrationSpec, workers: int = 1) -> CalibrationResult:
    evaluate = _Evaluator(spec, workers)
    target, tol = spec.target_arl0, spec.tol_arl
    lo, hi = spec.l_bracket

    arl_lo = evaluate(lo)[0]
    if arl_lo > target + tol:
        raise BracketError(
            f"ARL at L={lo:.4g} is already {arl_lo:.4g} > target {target}; target unreachable"
        )
    hi_cap = spec.l_bracket[1] * spec.growth_cap
    arl_hi = evaluate(hi)[0]
    while arl_hi < target - tol and hi < hi_cap:
        lo = hi
        hi = min(hi * 1.5, hi_cap)
        arl_hi = evaluate(hi)[0]
    if arl_hi < target - tol:
        raise BracketError(f"ARL at L={hi:.4g} is only {arl_hi:.4g} < target {target}")

    for _ in range(MAX_ITERATIONS):
        mid = 0.5 * (lo + hi)
        arl, sdrl, summary = evaluate(mid)
        if abs(arl - target) <= tol and not math.isnan(sdrl):
            return CalibrationResult(mid, arl, sdrl, evaluate.count, True, summary=summary)
        if arl < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= L_WIDTH_FLOOR:
            break
    # Target sits inside a jump of ARL(L): pick an attainable side per policy.
    below = evaluate(lo, early_exit=False)
    above = evaluate(hi, early_exit=False)
    if spec.plateau_policy == "below":
        pick_hi = False
    elif spec.plateau_policy == "above":
        pick_hi = True
    else:
        pick_hi = abs(above[0] - target) < abs(below[0] - target)
    L_star, (arl, sdrl, summary) = (hi, above) if pick_hi else (lo, below)
    return CalibrationResult(
        l_star=L_star,
        achieved_arl=arl,
        achieved_sdrl=sdrl,
        evaluations=evaluate.count,
        converged=True,
        plateau=True,
        arl_below=below[0],
        arl_above=above[0],
        summary=summary,
    )
