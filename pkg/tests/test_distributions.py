import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from zinbspc.distributions import (
    CountModel,
    Family,
    ZinbParams,
    model_logpmf,
    model_pmf,
    model_sample,
    tail_bound,
    zinb_logpmf,
    zinb_mean,
    zinb_pmf,
    zinb_sample,
    zinb_variance,
)
from zinbspc.errors import DomainError

ks = st.floats(0.2, 20.0)
ps = st.floats(0.05, 0.95)
thetas = st.floats(0.0, 0.95)
mus = st.floats(0.1, 30.0)


def test_pmf_examples():
    prm = ZinbParams(1, 0.4, 0.85)
    assert zinb_pmf(prm, 0) == pytest.approx(0.91, abs=1e-12)
    assert zinb_pmf(prm, 1) == pytest.approx(0.036, abs=1e-12)


def test_theta_zero_is_nb_against_scipy():
    y = np.arange(60)
    np.testing.assert_allclose(zinb_pmf(ZinbParams(2, 0.5, 0.0), y), stats.nbinom.pmf(y, 2, 0.5), rtol=1e-12)


def test_moment_examples():
    prm = ZinbParams(1, 0.4, 0.85)
    assert zinb_mean(prm) == pytest.approx(0.225)
    assert zinb_variance(prm) == pytest.approx(0.849375)
    assert zinb_mean(ZinbParams(3, 0.4, 1 - 1e-12)) == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("bad", [dict(k=0, p=0.4), dict(k=1, p=1.0), dict(k=1, p=0.4, theta=1.0), dict(k=math.inf, p=0.4)])
def test_domain_errors(bad):
    with pytest.raises(DomainError):
        ZinbParams(**bad)


def test_negative_support_rejected():
    with pytest.raises(DomainError):
        zinb_pmf(ZinbParams(1, 0.4), -1)


def test_sample_mean_matches_formula():
    prm = ZinbParams(1, 0.4, 0.85)
    y = zinb_sample(prm, np.random.default_rng(11), 1_000_000)
    assert abs(y.mean() - 0.225) < 3 * math.sqrt(0.849375 / 1e6)


def test_sample_zero_frequency_matches_pmf():
    prm = ZinbParams(2, 0.4, 0.85)
    y = zinb_sample(prm, np.random.default_rng(12), 1_000_000)
    p0 = zinb_pmf(prm, 0)
    assert abs((y == 0).mean() - p0) < 3 * math.sqrt(p0 * (1 - p0) / 1e6)


def test_degenerate_inflation_is_all_zero():
    y = zinb_sample(ZinbParams(2, 0.3, math.nextafter(1.0, 0.0)), np.random.default_rng(0), 10_000)
    assert not y.any()


def test_count_model_examples():
    assert float(model_logpmf(CountModel(Family.POISSON, 1.0), 0)) == pytest.approx(-1.0)
    y = np.arange(40)
    np.testing.assert_allclose(
        model_logpmf(CountModel(Family.ZIP, 3.0, theta=0.0), y), stats.poisson.logpmf(y, 3.0), rtol=1e-12
    )
    total = model_pmf(CountModel(Family.NB, 1.5, k=2.0), np.arange(501)).sum()
    assert abs(total - 1.0) < 1e-10


def test_poisson_limit_of_nb():
    y = np.arange(30)
    np.testing.assert_allclose(
        model_logpmf(CountModel(Family.NB, 4.0, k=math.inf), y), stats.poisson.logpmf(y, 4.0), rtol=1e-12
    )


def _models(family, mu, k, theta):
    return CountModel(
        family,
        mu,
        k=k if family in (Family.NB, Family.ZINB) else None,
        theta=theta if family in (Family.ZIP, Family.ZINB) else None,
    )


@settings(max_examples=60, deadline=None)
@given(family=st.sampled_from(list(Family)), mu=mus, k=ks, theta=thetas)
def test_normalization(family, mu, k, theta):
    model = _models(family, mu, k, theta)
    top = tail_bound(model)
    total = model_pmf(model, np.arange(top + 1)).sum()
    assert total >= 1 - 1e-9
    assert total <= 1 + 1e-9


@settings(max_examples=60, deadline=None)
@given(k=ks, p=ps, y=st.integers(0, 200))
def test_theta_zero_reduction_pointwise(k, p, y):
    assert zinb_pmf(ZinbParams(k, p, 0.0), y) == pytest.approx(stats.nbinom.pmf(y, k, p), rel=1e-10, abs=1e-300)


@settings(max_examples=60, deadline=None)
@given(mu=mus, y=st.integers(0, 200))
def test_zip_theta_zero_is_poisson(mu, y):
    lp = float(model_logpmf(CountModel(Family.ZIP, mu, theta=0.0), y))
    assert lp == pytest.approx(float(stats.poisson.logpmf(y, mu)), rel=1e-10)


@settings(max_examples=60, deadline=None)
@given(k=ks, p=ps, theta=thetas, y=st.integers(0, 500))
def test_log_and_linear_pmf_agree(k, p, theta, y):
    prm = ZinbParams(k, p, theta)
    pmf = zinb_pmf(prm, y)
    if pmf > 1e-300:
        assert abs(math.exp(zinb_logpmf(prm, y)) - pmf) <= 1e-12 * pmf


@settings(max_examples=100, deadline=None)
@given(k=ks, p=ps, theta=st.floats(1e-6, 0.95))
def test_inflation_overdisperses(k, p, theta):
    prm = ZinbParams(k, p, theta)
    assert zinb_variance(prm) >= zinb_mean(prm)


@pytest.mark.parametrize(
    "model",
    [
        CountModel(Family.POISSON, 3.0),
        CountModel(Family.NB, 4.0, k=1.5),
        CountModel(Family.ZIP, 6.0, theta=0.3),
        CountModel(Family.ZINB, 8.823, k=2.0, theta=0.24),
    ],
    ids=lambda m: m.family.value,
)
def test_moment_match_by_simulation(model):
    n = 200_000
    y = model_sample(model, np.random.default_rng(5), n).astype(float)
    mean, var = model.mean(), model.variance()
    assert abs(y.mean() - mean) < 4 * math.sqrt(var / n)
    # SE of the sample variance from the fourth central moment, estimated from the draws.
    m4 = np.mean((y - y.mean()) ** 4)
    assert abs(y.var(ddof=1) - var) < 4 * math.sqrt((m4 - var**2) / n)


def test_count_model_matches_zinb_params():
    model = CountModel(Family.ZINB, 8.823, k=2.0, theta=0.24)
    prm = model.to_zinb_params()
    assert prm.p == pytest.approx(2 / 10.823)
    assert model.mean() == pytest.approx(zinb_mean(prm))
    assert model.variance() == pytest.approx(zinb_variance(prm))
