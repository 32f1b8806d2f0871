"""Monte Carlo run-length distribution of the ZINB EWMA / Shewhart charts.

Each replication owns a random stream derived only from ``(master_seed,
replication index)``, so results do not depend on how replications are
spread over worker processes.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .chart import ChartConfig, ControlLimits, compute_limits
from .distributions import ZinbParams
from .errors import DomainError

log = logging.getLogger(__name__)

DEFAULT_REPS = 10_000
DEFAULT_MAX_RL = 1_000_000

_FIRST_BLOCK = 64
_MAX_BLOCK = 65_536


@dataclass(frozen=True)
class SimulationJob:
    chart: ChartConfig
    truth: ZinbParams | None = None
    reps: int = DEFAULT_REPS
    max_rl: int = DEFAULT_MAX_RL
    master_seed: int = 0

    def __post_init__(self):
        if self.truth is None:
            object.__setattr__(self, "truth", self.chart.params)
        if self.reps < 1 or self.max_rl < 1:
            raise DomainError("reps and max_rl must be at least 1")
        if not 0 <= self.master_seed < 2**64:
            raise DomainError("master_seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class RunLengthSummary:
    arl: float
    sdrl: float
    reps: int
    censored: int
    max_rl: int
    se_arl: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "se_arl", self.sdrl / math.sqrt(self.reps))


def replication_rng(master_seed: int, index: int) -> np.random.Generator:
    seq = np.random.SeedSequence(master_seed, spawn_key=(index,))
    return np.random.Generator(np.random.PCG64(seq))


def _draw_means(rng, truth: ZinbParams, periods: int, n: int) -> np.ndarray:
    m = periods * n
    u = rng.random(m)
    y = rng.poisson(rng.gamma(truth.k, (1.0 - truth.p) / truth.p, m))
    y[u < truth.theta] = 0
    if n == 1:
        return y.astype(float)
    return y.reshape(periods, n).mean(axis=1)


def simulate_run_length(job: SimulationJob, index: int, limits: ControlLimits | None = None) -> int:
    """Periods until the first signal for one replication (``max_rl`` if censored)."""
    limits = limits or compute_limits(job.chart)
    lam, n = job.chart.lam, job.chart.n
    rng = replication_rng(job.master_seed, index)
    z, t, block = limits.cl, 0, _FIRST_BLOCK
    while t < job.max_rl:
        periods = min(block, job.max_rl - t)
        ybar = _draw_means(rng, job.truth, periods, n)
        path, _ = lfilter([lam], [1.0, lam - 1.0], ybar, zi=[(1.0 - lam) * z])
        hits = np.flatnonzero(path > limits.ucl)
        if hits.size:
            return t + int(hits[0]) + 1
        t += periods
        z = path[-1]
        block = min(2 * block, _MAX_BLOCK)
    return job.max_rl


def _run_slice(job: SimulationJob, limits: ControlLimits, start: int, stop: int) -> np.ndarray:
    return np.array([simulate_run_length(job, i, limits) for i in range(start, stop)], dtype=np.int64)


def run_lengths(
    job: SimulationJob,
    start: int = 0,
    stop: int | None = None,
    workers: int = 1,
    limits: ControlLimits | None = None,
) -> np.ndarray:
    """Run lengths for replications ``start..stop-1`` in index order."""
    stop = job.reps if stop is None else stop
    limits = limits or compute_limits(job.chart)
    if workers <= 1 or stop - start < 2 * workers:
        return _run_slice(job, limits, start, stop)
    bounds = np.linspace(start, stop, workers + 1).astype(int)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(_run_slice, [job] * workers, [limits] * workers, bounds[:-1], bounds[1:])
        return np.concatenate(list(parts))


def summarize(rls: np.ndarray, max_rl: int) -> RunLengthSummary:
    reps = len(rls)
    sdrl = float(np.std(rls, ddof=1)) if reps > 1 else 0.0
    return RunLengthSummary(
        arl=float(np.mean(rls)),
        sdrl=sdrl,
        reps=reps,
        censored=int(np.count_nonzero(rls >= max_rl)),
        max_rl=max_rl,
    )


def estimate_arl(job: SimulationJob, workers: int = 1) -> RunLengthSummary:
    summary = summarize(run_lengths(job, workers=workers), job.max_rl)
    if summary.censored:
        log.warning(
            "%d of %d replications censored at max_rl=%d; ARL is a lower bound",
            summary.censored, summary.reps, job.max_rl,
        )
    return summary
