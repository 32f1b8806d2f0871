import math

import pytest

from zinbspc.calibrate import CalibrationSpec, calibrate_L, shewhart_arl_exact
from zinbspc.chart import ChartConfig, compute_limits
from zinbspc.distributions import ZinbParams
from zinbspc.errors import BracketError, DomainError
from zinbspc.runlength import SimulationJob, estimate_arl

PRM = ZinbParams(1, 0.4, 0.85)


def test_exact_examples():
    assert shewhart_arl_exact(PRM, 7.9988) == pytest.approx(1 / (0.15 * 0.6**8), abs=1e-9)
    assert shewhart_arl_exact(PRM, 7.9988) == pytest.approx(396.9, abs=0.1)
    assert shewhart_arl_exact(PRM, -1.0) == 1.0
    assert shewhart_arl_exact(PRM.replace(p=0.38), 7.9988) == pytest.approx(305.3, abs=0.1)


def test_ewma_calibration_recovers_table_L():
    spec = CalibrationSpec(0.05, 1, PRM, target_arl0=500, reps=4000)
    res = calibrate_L(spec)
    assert res.l_star == pytest.approx(3.105, abs=0.1)
    assert res.converged and not res.plateau
    assert abs(res.achieved_arl - 500) <= spec.tol_arl
    assert spec.tol_arl == 5.0


def test_subgroup_calibration_recovers_table_L():
    res = calibrate_L(CalibrationSpec(0.10, 10, PRM, target_arl0=500, reps=2000))
    assert res.l_star == pytest.approx(3.083, abs=0.1)


def test_unreachable_target():
    with pytest.raises(BracketError):
        calibrate_L(CalibrationSpec(0.05, 1, PRM, target_arl0=1.0, reps=200))


def test_exact_shewhart_plateau():
    res = calibrate_L(CalibrationSpec(1.0, 1, PRM, target_arl0=500, method="exact"))
    assert res.plateau
    assert res.arl_below == pytest.approx(396.92, abs=0.01)
    assert res.arl_below < 500 < res.arl_above
    assert res.achieved_arl == res.arl_below  # 396.9 is nearer than 661.5
    ucl = compute_limits(ChartConfig(1.0, res.l_star, 1, PRM)).ucl
    assert shewhart_arl_exact(PRM, ucl) == pytest.approx(res.achieved_arl)


@pytest.mark.parametrize("policy", ["below", "above"])
def test_plateau_policies(policy):
    res = calibrate_L(CalibrationSpec(1.0, 1, PRM, target_arl0=500, method="exact", plateau_policy=policy))
    assert res.achieved_arl == (res.arl_below if policy == "below" else res.arl_above)


def test_mc_shewhart_agrees_with_oracle():
    spec = CalibrationSpec(1.0, 1, PRM, target_arl0=500, reps=3000, master_seed=4)
    res = calibrate_L(spec)
    assert res.plateau
    ucl = compute_limits(spec.chart(res.l_star)).ucl
    exact = shewhart_arl_exact(PRM, ucl)
    assert abs(res.achieved_arl - exact) <= 4 * res.summary.se_arl


def test_crn_makes_arl_monotone_in_L():
    arls = [
        estimate_arl(SimulationJob(ChartConfig(0.1, L, 1, PRM), None, 300, master_seed=9)).arl
        for L in (3.0, 3.4, 3.8, 4.2, 4.6)
    ]
    assert arls == sorted(arls)


def test_result_within_bracket():
    spec = CalibrationSpec(0.2, 1, PRM, target_arl0=100, reps=500, l_bracket=(1.0, 9.0))
    res = calibrate_L(spec)
    assert 1.0 <= res.l_star <= 9.0
    assert abs(res.achieved_arl - 100) <= spec.tol_arl or res.plateau


def test_spec_validation():
    with pytest.raises(DomainError):
        CalibrationSpec(0.1, 1, PRM, method="exact")
    with pytest.raises(DomainError):
        CalibrationSpec(0.1, 1, PRM, tol_arl=-1.0)
    assert math.isclose(CalibrationSpec(0.1, 1, PRM, target_arl0=20).tol_arl, 0.5)
