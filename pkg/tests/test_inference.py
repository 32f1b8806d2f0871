import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zinbspc.distributions import CountModel, Family, ZinbParams, loglik_counts, zinb_sample
from zinbspc.errors import BoundaryWarning, DomainError
from zinbspc.inference import (
    bic,
    dispersion_report,
    dispersion_test_auxiliary,
    dispersion_test_lr,
    fit,
    frequency_table,
    naive_cv,
    p_from_overall_mean,
    select_model,
)

OWLS_FIT = ZinbParams.from_mean(8.823, 2.0, 0.24)
TOL = 1e-6


def _zinb_data(seed, n=599, params=OWLS_FIT):
    return zinb_sample(params, np.random.default_rng(seed), n)


def test_constant_data_poisson_closed_form():
    res = fit("poisson", [4] * 25)
    assert res.model.mu == 4.0
    assert res.mean_hat == 4.0


def test_parameter_recovery():
    y = _zinb_data(1)
    est = fit("zinb", y).model
    # Sampling SDs from a parametric bootstrap around the truth.
    boot = np.array([
        (m.mu, m.k, m.theta) for m in (fit("zinb", _zinb_data(100 + i)).model for i in range(40))
    ])
    sd = boot.std(axis=0, ddof=1)
    for got, truth, s in zip((est.mu, est.k, est.theta), (8.823, 2.0, 0.24), sd):
        assert abs(got - truth) <= 5 * s


def test_poisson_data_selects_poisson():
    y = np.random.default_rng(2).poisson(5.0, 2000)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoundaryWarning)
        sel = select_model(y)
    assert sel.best.family is Family.POISSON
    assert [r.bic for r in sel.table] == sorted(r.bic for r in sel.table)


def test_zinb_data_selects_zinb():
    y = _zinb_data(3, n=2000, params=ZinbParams.from_mean(5.0, 2.0, 0.5))
    assert select_model(y).best.family is Family.ZINB


def test_bic_identity_and_mean_ci():
    y = _zinb_data(4)
    for res in select_model(y).table:
        assert res.bic == pytest.approx(-2 * res.loglik + res.family.free_params * math.log(len(y)))
        assert res.bic == pytest.approx(bic(res.loglik, res.family.free_params, res.n_obs))
        lo, hi = res.mean_ci
        assert lo < res.mean_hat < hi


def test_poisson_ci_closed_form():
    y = _zinb_data(5)
    lo, hi = fit("poisson", y).mean_ci
    se = 1 / math.sqrt(y.sum())
    assert lo == pytest.approx(y.mean() * math.exp(-1.959963984540054 * se))
    assert hi == pytest.approx(y.mean() * math.exp(1.959963984540054 * se))


def test_p_back_out():
    res = fit("zinb", _zinb_data(6))
    k, theta = res.model.k, res.model.theta
    assert p_from_overall_mean(res.overall_mean, k, theta) == pytest.approx(res.p_hat, abs=1e-10)
    assert res.p_hat == pytest.approx(k / (res.mean_hat + k), abs=1e-12)
    # Same formula fed the component mean instead of the overall mean.
    assert p_from_overall_mean(8.823, 2.0, 0.24) == pytest.approx(0.1470, abs=1e-4)
    assert p_from_overall_mean(0.76 * 8.823, 2.0, 0.24) == pytest.approx(2 / 10.823, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    mu=st.floats(1.0, 15.0),
    k=st.floats(0.3, 20.0),
    theta=st.floats(0.0, 0.6),
    n=st.integers(40, 600),
)
def test_nesting_and_mle_dominance(seed, mu, k, theta, n):
    truth = ZinbParams.from_mean(mu, k, theta)
    y = zinb_sample(truth, np.random.default_rng(seed), n)
    if y.sum() == 0:
        return
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoundaryWarning)
        ll = {r.family: r.loglik for r in select_model(y).table}
    assert ll[Family.ZINB] >= ll[Family.NB] - TOL
    assert ll[Family.NB] >= ll[Family.POISSON] - TOL
    assert ll[Family.ZINB] >= ll[Family.ZIP] - TOL
    assert ll[Family.ZIP] >= ll[Family.POISSON] - TOL
    values, weights = frequency_table(y)
    truth_ll = loglik_counts(CountModel(Family.ZINB, mu, k=k, theta=theta), values, weights)
    assert ll[Family.ZINB] >= truth_ll - TOL


def test_boundary_warning_on_poisson_data():
    y = np.random.default_rng(7).poisson(3.0, 500)
    with pytest.warns(BoundaryWarning):
        fit("zinb", y)


def test_fit_rejects_bad_data():
    with pytest.raises(DomainError):
        fit("nb", [])
    with pytest.raises(DomainError):
        fit("nb", [1, -2, 3])
    with pytest.raises(DomainError):
        fit("poisson", [0, 0, 0])


def test_naive_cv_examples():
    s = naive_cv([0, 2])
    assert (s.mean, s.variance) == (1.0, 2.0)
    assert s.cv == pytest.approx(1.4142, abs=1e-4)
    c = naive_cv([3, 3, 3])
    assert (c.mean, c.variance, c.cv) == (3.0, 0.0, 0.0)


def test_auxiliary_null_case():
    # Population variance equals the mean exactly.
    res = dispersion_test_auxiliary([0, 2] * 50)
    assert res.c_hat == pytest.approx(0.0, abs=1e-12)
    assert abs(res.t_stat) < 1e-9


def test_auxiliary_forms_agree_on_significance():
    y = _zinb_data(8)
    lin = dispersion_test_auxiliary(y, "linear")
    quad = dispersion_test_auxiliary(y, "quadratic")
    assert lin.c_hat == pytest.approx(quad.c_hat * y.mean())
    assert lin.t_stat == pytest.approx(quad.t_stat)
    assert lin.p_value < 1e-4


def _aux_rejection_rate(seed, reps):
    rng = np.random.default_rng(seed)
    return np.mean([dispersion_test_auxiliary(rng.poisson(5.0, 5000)).p_value < 0.05 for _ in range(reps)])


def test_auxiliary_size_200():
    assert 0.03 <= _aux_rejection_rate(0, 200) <= 0.07


def test_auxiliary_size_large_sample():
    rate = _aux_rejection_rate(1, 2000)
    assert abs(rate - 0.05) <= 4 * math.sqrt(0.05 * 0.95 / 2000)


def test_lr_boundary_null():
    y = [4, 5, 6] * 40  # underdispersed: the NB fit collapses to Poisson
    res = dispersion_test_lr(y)
    assert res.lr_stat == 0.0
    assert res.p_value == 0.5
    assert math.isinf(res.dispersion_param)
    assert res.inverse_dispersion == 0.0


def test_lr_power():
    rng = np.random.default_rng(9)
    prm = ZinbParams.from_mean(5.0, 1.0)
    rejections = [dispersion_test_lr(zinb_sample(prm, rng, 2000)).p_value < 0.05 for _ in range(200)]
    assert np.mean(rejections) > 0.99


def test_report_collects_both_tests():
    y = _zinb_data(10)
    rep = dispersion_report(y)
    lr = dispersion_test_lr(y)
    assert rep.dispersion_param == lr.dispersion_param
    assert rep.inverse_dispersion == pytest.approx(1 / lr.dispersion_param)
    assert 0 <= rep.aux_p_value <= 1 and 0 <= rep.lr_p_value <= 1
    assert rep.variance >= 0
