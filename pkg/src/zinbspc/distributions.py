"""Zero-inflated negative binomial (ZINB) law and the comparison count families.

The ZINB here is parameterized by ``(k, p, theta)``:

* with probability ``theta`` the observation is a structural zero;
* otherwise it is negative binomial, the number of failures before the
  ``k``-th success with per-trial success probability ``p``.

``k`` may be any positive real; the binomial coefficient is evaluated through
log-gamma so non-integer shapes work.

The fitted families (:class:`CountModel`) use a mean parameterization instead,
``mu`` being the mean of the *un-inflated* component, so ``p = k / (mu + k)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import DomainError

#: Stand-in shape used when a Poisson-type model has to be expressed as a ZINB.
POISSON_LIMIT_K = 1e8


@dataclass(frozen=True)
class ZinbParams:
    k: float
    p: float
    theta: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.k) and self.k > 0):
            raise DomainError(f"k must be a positive finite real, got {self.k}")
        if not 0.0 < self.p < 1.0:
            raise DomainError(f"p must lie in (0, 1), got {self.p}")
        if not 0.0 <= self.theta < 1.0:
            raise DomainError(f"theta must lie in [0, 1), got {self.theta}")

    @classmethod
    def from_mean(cls, mu: float, k: float, theta: float = 0.0) -> "ZinbParams":
        """Build from the un-inflated component mean ``mu``."""
        if not mu > 0:
            raise DomainError(f"mu must be positive, got {mu}")
        return cls(k=k, p=k / (mu + k), theta=theta)

    def mean(self) -> float:
        return zinb_mean(self)

    def variance(self) -> float:
        return zinb_variance(self)

    def replace(self, **changes) -> "ZinbParams":
        fields = {"k": self.k, "p": self.p, "theta": self.theta}
        fields.update({key: val for key, val in changes.items() if val is not None})
        return ZinbParams(**fields)


def zinb_mean(params: ZinbParams) -> float:
    k, p, theta = params.k, params.p, params.theta
    return k * (1 - theta) * (1 - p) / p


def zinb_variance(params: ZinbParams) -> float:
    k, p, theta = params.k, params.p, params.theta
    return k * (1 - theta) * (1 - p) * (1 + (1 - p) * theta * k) / p**2


def _check_support(y):
    y = np.asarray(y)
    if np.any(y < 0):
        raise DomainError("counts must be nonnegative")
    return y


def nb_logpmf(y, k: float, p: float):
    """Log-pmf of the negative binomial (failures before the k-th success)."""
    y = np.asarray(y, dtype=float)
    return gammaln(y + k) - gammaln(k) - gammaln(y + 1) + k * math.log(p) + y * math.log1p(-p)


def zinb_logpmf(params: ZinbParams, y):
    y = _check_support(y)
    nb = nb_logpmf(y, params.k, params.p)
    theta = params.theta
    if theta == 0.0:
        out = nb
    else:
        zero = np.logaddexp(math.log(theta), math.log1p(-theta) + params.k * math.log(params.p))
        out = np.where(y == 0, zero, math.log1p(-theta) + nb)
    return out[()] if np.ndim(out) == 0 else out


def zinb_pmf(params: ZinbParams, y):
    return np.exp(zinb_logpmf(params, y))


def zinb_sample(params: ZinbParams, rng: np.random.Generator, size=None):
    """Draw ZINB variates as a Bernoulli/Gamma-Poisson mixture.

    The draw order (uniforms, then gammas, then Poissons) is fixed, so a given
    stream always yields the same sequence regardless of the parameters.
    """
    u = rng.random(size)
    rate = rng.gamma(params.k, (1 - params.p) / params.p, size)
    y = rng.poisson(rate)
    if size is None:
        return 0 if u < params.theta else int(y)
    y[u < params.theta] = 0
    return y


class Family(str, enum.Enum):
    POISSON = "poisson"
    NB = "nb"
    ZIP = "zip"
    ZINB = "zinb"

    @property
    def free_params(self) -> int:
        return {"poisson": 1, "nb": 2, "zip": 2, "zinb": 3}[self.value]

    @property
    def label(self) -> str:
        return {"poisson": "Poisson", "nb": "NB", "zip": "ZIP", "zinb": "ZINB"}[self.value]


@dataclass(frozen=True)
class CountModel:
    """A fitted or hypothesized count law in mean parameterization.

    ``k = inf`` is accepted for NB/ZINB and denotes the Poisson limit; it is
    what the fitter reports when the likelihood is maximized on that boundary.
    """

    family: Family
    mu: float
    k: float | None = None
    theta: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        needs_k = self.family in (Family.NB, Family.ZINB)
        needs_theta = self.family in (Family.ZIP, Family.ZINB)
        if not (math.isfinite(self.mu) and self.mu > 0):
            raise DomainError(f"mu must be positive, got {self.mu}")
        if needs_k != (self.k is not None) or needs_theta != (self.theta is not None):
            raise DomainError(f"wrong parameter set for family {self.family.value}")
        if needs_k and not self.k > 0:
            raise DomainError(f"k must be positive, got {self.k}")
        if needs_theta and not 0.0 <= self.theta < 1.0:
            raise DomainError(f"theta must lie in [0, 1), got {self.theta}")

    def free_param_count(self) -> int:
        return self.family.free_params

    @property
    def p(self) -> float | None:
        """Per-trial success probability of the NB component, if finite."""
        if self.k is None or math.isinf(self.k):
            return None
        return self.k / (self.mu + self.k)

    def mean(self) -> float:
        return (1 - (self.theta or 0.0)) * self.mu

    def variance(self) -> float:
        theta = self.theta or 0.0
        extra = 0.0 if self.k is None or math.isinf(self.k) else self.mu**2 / self.k
        return (1 - theta) * (self.mu + extra) + theta * (1 - theta) * self.mu**2

    def to_zinb_params(self) -> ZinbParams:
        k = self.k if self.k is not None and math.isfinite(self.k) else POISSON_LIMIT_K
        return ZinbParams.from_mean(self.mu, k, self.theta or 0.0)

    def logpmf(self, y):
        return model_logpmf(self, y)

    def sample(self, rng: np.random.Generator, size=None):
        return model_sample(self, rng, size)


def _poisson_logpmf(y, mu: float):
    y = np.asarray(y, dtype=float)
    return y * math.log(mu) - mu - gammaln(y + 1)


def model_logpmf(model: CountModel, y):
    y = _check_support(y)
    if model.k is None or math.isinf(model.k):
        base = _poisson_logpmf(y, model.mu)
        zero_base = -model.mu
    else:
        p = model.k / (model.mu + model.k)
        base = nb_logpmf(y, model.k, p)
        zero_base = model.k * math.log(p)
    theta = model.theta or 0.0
    if theta > 0.0:
        zero = np.logaddexp(math.log(theta), math.log1p(-theta) + zero_base)
        base = np.where(y == 0, zero, math.log1p(-theta) + base)
    return base[()] if np.ndim(base) == 0 else base


def model_pmf(model: CountModel, y):
    return np.exp(model_logpmf(model, y))


def model_sample(model: CountModel, rng: np.random.Generator, size=None):
    u = rng.random(size)
    if model.k is None or math.isinf(model.k):
        y = rng.poisson(model.mu, size)
    else:
        y = rng.poisson(rng.gamma(model.k, model.mu / model.k, size))
    theta = model.theta or 0.0
    if size is None:
        return 0 if u < theta else int(y)
    y[u < theta] = 0
    return y


def tail_bound(model_or_params, eps: float = 1e-10) -> int:
    """A count ``Y*`` with ``P(Y > Y*)`` below ``eps`` (Chebyshev on the NB part)."""
    if isinstance(model_or_params, ZinbParams):
        m, v = zinb_mean(model_or_params), zinb_variance(model_or_params)
    else:
        m, v = model_or_params.mean(), model_or_params.variance()
    return int(math.ceil(m + math.sqrt(v / eps))) + 10


def loglik_counts(model: CountModel, values, weights) -> float:
    """Log-likelihood of a frequency table ``values`` observed ``weights`` times."""
    return float(np.dot(weights, model_logpmf(model, values)))


__all__ = [
    "ZinbParams",
    "zinb_pmf",
    "zinb_logpmf",
    "zinb_mean",
    "zinb_variance",
    "zinb_sample",
    "nb_logpmf",
    "Family",
    "CountModel",
    "model_logpmf",
    "model_pmf",
    "model_sample",
    "tail_bound",
    "loglik_counts",
]
