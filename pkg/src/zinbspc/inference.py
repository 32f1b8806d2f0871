"""Maximum-likelihood fitting of intercept-only count models, BIC selection
and overdispersion tests.

All four families are fitted on the frequency table of the data, which keeps
the likelihood cheap even for long series. Non-Poisson families use a
Nelder-Mead simplex over ``(log mu, log k, logit theta)`` from several starts;
nested boundary models (``theta = 0``, ``k = inf``) are always compared too so
that the nesting order of the maximized log-likelihoods holds exactly.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import optimize, stats
from scipy.special import expit, logit

from .distributions import CountModel, Family, loglik_counts
from .errors import BoundaryWarning, ConvergenceError, DomainError

K_BOUNDS = (1e-6, 1e6)
THETA_BOUNDS = (1e-9, 1.0 - 1e-9)
Z95 = stats.norm.ppf(0.975)

_NM_OPTIONS = {"xatol": 1e-8, "fatol": 1e-8, "maxiter": 10_000, "maxfev": 20_000}


@dataclass(frozen=True)
class FitResult:
    model: CountModel
    loglik: float
    bic: float
    mean_hat: float
    mean_ci: tuple[float, float]
    p_hat: float | None
    n_obs: int
    converged: bool

    @property
    def family(self) -> Family:
        return self.model.family

    @property
    def overall_mean(self) -> float:
        """Mean of the full (inflated) law; differs from ``mean_hat`` when theta > 0."""
        return self.model.mean()


def bic(loglik: float, n_params: int, n_obs: int) -> float:
    return -2.0 * loglik + n_params * math.log(n_obs)


def p_from_overall_mean(mean: float, k: float, theta: float) -> float:
    """Success probability implied by an overall ZINB mean.

    Inverts ``mean = k (1 - theta) (1 - p) / p``.
    """
    return k * (1 - theta) / (mean + k * (1 - theta))


def frequency_table(data: Iterable[int]) -> tuple[np.ndarray, np.ndarray]:
    y = np.asarray(list(data) if not isinstance(data, np.ndarray) else data)
    if y.size == 0:
        raise DomainError("data must be nonempty")
    if np.any(y < 0) or np.any(y != np.floor(y)):
        raise DomainError("data must be nonnegative integers")
    values, counts = np.unique(y.astype(np.int64), return_counts=True)
    return values, counts.astype(float)


def _clip(x, bounds):
    return min(max(x, bounds[0]), bounds[1])


def _unpack(family: Family, x) -> CountModel:
    mu = math.exp(_clip(x[0], (-30.0, 30.0)))
    if family is Family.NB:
        return CountModel(family, mu, k=_clip(math.exp(_clip(x[1], (-50, 50))), K_BOUNDS))
    if family is Family.ZIP:
        return CountModel(family, mu, theta=_clip(float(expit(x[1])), THETA_BOUNDS))
    k = _clip(math.exp(_clip(x[1], (-50, 50))), K_BOUNDS)
    return CountModel(family, mu, k=k, theta=_clip(float(expit(x[2])), THETA_BOUNDS))


def _pack(model: CountModel) -> np.ndarray:
    x = [math.log(model.mu)]
    if model.k is not None:
        x.append(math.log(_clip(model.k, K_BOUNDS)))
    if model.theta is not None:
        x.append(float(logit(_clip(model.theta, THETA_BOUNDS))))
    return np.array(x)


def _moment_starts(family: Family, values, weights) -> list[CountModel]:
    n = weights.sum()
    ybar = float(np.dot(values, weights) / n)
    var = float(np.dot((values - ybar) ** 2, weights) / max(n - 1, 1))
    f0 = float(weights[values == 0].sum() / n)
    pos = values > 0
    mu_pos = float(np.dot(values[pos], weights[pos]) / weights[pos].sum()) if pos.any() else 1.0
    k_mom = ybar**2 / (var - ybar) if var > 1.01 * ybar else 50.0
    k_mom = _clip(k_mom, (0.05, 1e3))
    theta0 = _clip((f0 - math.exp(-mu_pos)) / max(1.0 - math.exp(-mu_pos), 1e-6), (0.01, 0.95))
    mu = max(ybar, 1e-3)
    if family is Family.NB:
        return [CountModel(family, mu, k=k_mom), CountModel(family, mu, k=1.0)]
    if family is Family.ZIP:
        return [
            CountModel(family, max(mu_pos, 1e-3), theta=theta0),
            CountModel(family, mu / (1 - 0.5 * f0), theta=0.5 * f0 + 0.01),
        ]
    return [
        CountModel(family, mu / (1 - theta0), k=k_mom, theta=theta0),
        CountModel(family, mu, k=k_mom, theta=0.05),
        CountModel(family, max(mu_pos, 1e-3), k=1.0, theta=_clip(f0 / 2, (0.01, 0.9))),
    ]


def _numeric_hessian(fun, x: np.ndarray) -> np.ndarray:
    d = len(x)
    h = 1e-4 * np.maximum(1.0, np.abs(x))
    hess = np.empty((d, d))
    f0 = fun(x)
    for i in range(d):
        ei = np.zeros(d)
        ei[i] = h[i]
        hess[i, i] = (fun(x + ei) - 2 * f0 + fun(x - ei)) / h[i] ** 2
        for j in range(i + 1, d):
            ej = np.zeros(d)
            ej[j] = h[j]
            val = (fun(x + ei + ej) - fun(x + ei - ej) - fun(x - ei + ej) + fun(x - ei - ej)) / (4 * h[i] * h[j])
            hess[i, j] = hess[j, i] = val
    return hess


def _mean_ci(model: CountModel, values, weights) -> tuple[float, float]:
    """Wald interval for the component mean on the log scale."""
    if model.family is Family.POISSON or (model.k is not None and math.isinf(model.k) and not model.theta):
        se = 1.0 / math.sqrt(float(np.dot(values, weights)))
        return math.exp(math.log(model.mu) - Z95 * se), math.exp(math.log(model.mu) + Z95 * se)
    # Reduced parameterization: drop parameters sitting on a boundary.
    fam = model.family
    has_k = model.k is not None and math.isfinite(model.k)
    has_theta = model.theta is not None and model.theta > 0
    if fam is Family.ZINB and not has_theta:
        fam = Family.NB
    elif fam is Family.ZINB and not has_k:
        fam = Family.ZIP
    elif fam is Family.NB and not has_k:
        fam = Family.POISSON
    elif fam is Family.ZIP and not has_theta:
        fam = Family.POISSON
    if fam is Family.POISSON:
        return _mean_ci(CountModel(Family.POISSON, model.mu), values, weights)
    reduced = CountModel(fam, model.mu, k=model.k if fam in (Family.NB, Family.ZINB) else None,
                         theta=model.theta if fam in (Family.ZIP, Family.ZINB) else None)
    x = _pack(reduced)
    hess = _numeric_hessian(lambda v: -loglik_counts(_unpack(fam, v), values, weights), x)
    try:
        cov = np.linalg.inv(hess)
        var = cov[0, 0]
    except np.linalg.LinAlgError:
        var = math.nan
    if not var > 0:
        var = 1.0 / hess[0, 0] if hess[0, 0] > 0 else math.nan
    se = math.sqrt(var) if var > 0 else math.nan
    return math.exp(x[0] - Z95 * se), math.exp(x[0] + Z95 * se)


def _minimize(family: Family, values, weights, starts: Sequence[CountModel], seed: int = 0):
    def objective(x):
        val = -loglik_counts(_unpack(family, x), values, weights)
        return val if math.isfinite(val) else 1e300

    rng = np.random.default_rng(seed)
    x_starts = [_pack(m) for m in starts]
    x_starts.append(x_starts[0] + rng.normal(0.0, 0.5, size=len(x_starts[0])))
    results = []
    for x0 in x_starts:
        res = optimize.minimize(objective, x0, method="Nelder-Mead", options=_NM_OPTIONS)
        if math.isfinite(res.fun) and res.fun < 1e299:
            results.append(res)
    if not results:
        raise ConvergenceError(f"all {len(x_starts)} starts failed for {family.value}")
    best = min(results, key=lambda r: r.fun)
    # One restart from the best vertex; Nelder-Mead can stall on a degenerate simplex.
    polished = optimize.minimize(objective, best.x, method="Nelder-Mead", options=_NM_OPTIONS)
    if polished.fun <= best.fun:
        best = polished
    return _unpack(family, best.x), -float(best.fun), bool(best.success)


def _boundary_candidates(family: Family, nested: dict[Family, FitResult]) -> list[CountModel]:
    """Reduced models embedded in ``family`` at the edge of its parameter space."""
    out = []
    if family is Family.NB:
        out.append(CountModel(Family.NB, nested[Family.POISSON].model.mu, k=math.inf))
    elif family is Family.ZIP:
        out.append(CountModel(Family.ZIP, nested[Family.POISSON].model.mu, theta=0.0))
    elif family is Family.ZINB:
        nb, zip_ = nested[Family.NB].model, nested[Family.ZIP].model
        out.append(CountModel(Family.ZINB, nb.mu, k=nb.k, theta=0.0))
        out.append(CountModel(Family.ZINB, zip_.mu, k=math.inf, theta=zip_.theta))
    return out


def _fit_table(family: Family, values, weights, nested: dict[Family, FitResult]) -> FitResult:
    n_obs = int(weights.sum())
    if family is Family.POISSON:
        ybar = float(np.dot(values, weights) / n_obs)
        if ybar <= 0:
            raise DomainError("Poisson fit needs at least one positive count")
        model = CountModel(Family.POISSON, ybar)
        converged = True
        ll = loglik_counts(model, values, weights)
    else:
        for dep in {Family.NB: [Family.POISSON], Family.ZIP: [Family.POISSON],
                    Family.ZINB: [Family.NB, Family.ZIP]}[family]:
            if dep not in nested:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", BoundaryWarning)
                    _fit_table(dep, values, weights, nested)
        starts = _moment_starts(family, values, weights)
        if family is Family.ZINB:
            nb, zip_ = nested[Family.NB].model, nested[Family.ZIP].model
            starts.append(CountModel(family, nb.mu, k=_clip(nb.k, K_BOUNDS), theta=1e-3))
            starts.append(CountModel(family, zip_.mu, k=100.0, theta=_clip(zip_.theta, (1e-3, 0.99))))
        model, ll, converged = _minimize(family, values, weights, starts)
        for cand in _boundary_candidates(family, nested):
            cand_ll = loglik_counts(cand, values, weights)
            if cand_ll > ll:
                model, ll, converged = cand, cand_ll, True
    if model.theta is not None and model.theta < 1e-6:
        warnings.warn(f"{family.label}: theta estimate {model.theta:.3g} at boundary", BoundaryWarning, stacklevel=3)
    if model.k is not None and model.k > 1e4:
        warnings.warn(f"{family.label}: k estimate {model.k:.3g} at boundary", BoundaryWarning, stacklevel=3)
    result = FitResult(
        model=model,
        loglik=ll,
        bic=bic(ll, family.free_params, n_obs),
        mean_hat=model.mu,
        mean_ci=_mean_ci(model, values, weights),
        p_hat=model.p,
        n_obs=n_obs,
        converged=converged,
    )
    nested[family] = result
    return result


def fit(family: Family | str, data: Iterable[int]) -> FitResult:
    """Maximum-likelihood fit of one intercept-only family."""
    values, weights = frequency_table(data)
    return _fit_table(Family(family), values, weights, {})


@dataclass(frozen=True)
class Selection:
    best: FitResult
    table: list[FitResult]
    notes: list[str]


def select_model(data: Iterable[int], families: Sequence[Family | str] | None = None) -> Selection:
    """Fit every family and rank by BIC (smallest first)."""
    values, weights = frequency_table(data)
    families = [Family(f) for f in (families or list(Family))]
    nested: dict[Family, FitResult] = {}
    table, notes = [], []
    for fam in families:
        try:
            table.append(nested[fam] if fam in nested else _fit_table(fam, values, weights, nested))
        except (ConvergenceError, DomainError) as exc:
            notes.append(f"{fam.label} excluded: {exc}")
    if not table:
        raise ConvergenceError("no family could be fitted; " + "; ".join(notes))
    table.sort(key=lambda r: r.bic)
    return Selection(best=table[0], table=table, notes=notes)


# --- overdispersion ---------------------------------------------------------


@dataclass(frozen=True)
class NaiveSummary:
    mean: float
    variance: float
    cv: float | None


def naive_cv(data: Iterable[int]) -> NaiveSummary:
    y = np.asarray(list(data), dtype=float)
    if y.size == 0:
        raise DomainError("data must be nonempty")
    mean = float(y.mean())
    var = float(y.var(ddof=1)) if y.size > 1 else 0.0
    cv = math.sqrt(var) / mean if mean > 0 else None
    return NaiveSummary(mean, var, cv)


@dataclass(frozen=True)
class AuxiliaryTest:
    c_hat: float
    t_stat: float
    p_value: float
    form: str
    alternative: str


def dispersion_test_auxiliary(
    data: Iterable[int], form: str = "linear", alternative: str = "two-sided"
) -> AuxiliaryTest:
    """Regression-based test of ``Var(Y) = mu + c f(mu)`` against ``c = 0``.

    ``form="linear"`` uses ``f(mu) = mu``, ``"quadratic"`` uses ``f(mu) = mu**2``.
    With an intercept-only Poisson fit the regressor is constant, so the slope
    is a scaled mean of the auxiliary response.
    """
    y = np.asarray(list(data), dtype=float)
    if y.size < 2:
        raise DomainError("need at least two observations")
    mu = y.mean()
    if mu <= 0:
        raise DomainError("mean must be positive")
    aux = ((y - mu) ** 2 - y) / mu
    if form == "linear":
        x = np.ones_like(y)
    elif form == "quadratic":
        x = np.full_like(y, mu)
    else:
        raise ValueError(f"unknown form {form!r}")
    sxx = float(x @ x)
    c_hat = float(x @ aux) / sxx
    resid = aux - c_hat * x
    sigma2 = float(resid @ resid) / (y.size - 1)
    se = math.sqrt(sigma2 / sxx)
    if se > 0:
        t = c_hat / se
    else:
        t = 0.0 if c_hat == 0 else math.copysign(math.inf, c_hat)
    if alternative == "two-sided":
        p = 2.0 * stats.norm.sf(abs(t))
    elif alternative == "greater":
        p = stats.norm.sf(t)
    elif alternative == "less":
        p = stats.norm.cdf(t)
    else:
        raise ValueError(f"unknown alternative {alternative!r}")
    return AuxiliaryTest(c_hat, t, float(p), form, alternative)


@dataclass(frozen=True)
class LikelihoodRatioTest:
    lr_stat: float
    p_value: float
    dispersion_param: float
    """Fitted NB size ``k``; ``inf`` when the fit collapses to Poisson."""

    @property
    def inverse_dispersion(self) -> float:
        return 0.0 if math.isinf(self.dispersion_param) else 1.0 / self.dispersion_param


def dispersion_test_lr(data: Iterable[int]) -> LikelihoodRatioTest:
    """NB versus Poisson likelihood ratio with the boundary-corrected p-value."""
    values, weights = frequency_table(data)
    nested: dict[Family, FitResult] = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoundaryWarning)
        nb = _fit_table(Family.NB, values, weights, nested)
    lr = max(0.0, 2.0 * (nb.loglik - nested[Family.POISSON].loglik))
    p = 0.5 * float(stats.chi2.sf(lr, 1))
    return LikelihoodRatioTest(float(lr), p, float(nb.model.k))


@dataclass(frozen=True)
class DispersionReport:
    mean: float
    variance: float
    cv: float | None
    c_hat: float
    t_stat: float
    aux_p_value: float
    lr_stat: float
    lr_p_value: float
    dispersion_param: float
    inverse_dispersion: float


def dispersion_report(data: Sequence[int], form: str = "linear") -> DispersionReport:
    data = list(data)
    naive = naive_cv(data)
    aux = dispersion_test_auxiliary(data, form=form)
    lr = dispersion_test_lr(data)
    return DispersionReport(
        mean=naive.mean,
        variance=naive.variance,
        cv=naive.cv,
        c_hat=aux.c_hat,
        t_stat=aux.t_stat,
        aux_p_value=aux.p_value,
        lr_stat=lr.lr_stat,
        lr_p_value=lr.p_value,
        dispersion_param=lr.dispersion_param,
        inverse_dispersion=lr.inverse_dispersion,
    )
