"""Pure request -> response functions shared by the HTTP app and the CLI."""

from __future__ import annotations

import math

from pydantic import ValidationError

from ..application.monitoring import monitor
from ..application.tables import ArlGrid, ArlTableRow, build_arl_table
from ..calibrate import CalibrationSpec, calibrate_L
from ..chart import ChartConfig, compute_limits
from ..distributions import ZinbParams
from ..errors import BracketError, ConvergenceError, DomainError, ParseError
from ..inference import FitResult, dispersion_report, fit, select_model
from ..runlength import SimulationJob, estimate_arl
from . import schemas as s

# Error kind -> (CLI exit code, HTTP status).
ERROR_KINDS = {
    "usage": (1, 400),
    "data": (2, 422),
    "convergence": (3, 409),
}


def error_kind(exc: BaseException) -> str | None:
    if isinstance(exc, ParseError):
        return "data"
    if isinstance(exc, (ConvergenceError, BracketError)):
        return "convergence"
    if isinstance(exc, (DomainError, ValidationError)):
        return "usage"
    return None


def _finite_or_none(x: float | None) -> float | None:
    return None if x is None or not math.isfinite(x) else float(x)


def _params(p: s.ZinbIn) -> ZinbParams:
    return ZinbParams(p.k, p.p, p.theta)


def _row_out(row: ArlTableRow) -> s.ArlRowOut:
    return s.ArlRowOut(**row.__dict__)


def simulate(req: s.SimulateRequest) -> s.SimulateResponse:
    params = _params(req.params)
    truth = params.replace(p=req.shift.p, theta=req.shift.theta, k=req.shift.k)
    job = SimulationJob(ChartConfig(req.lam, req.L, req.n, params), truth, req.reps, req.max_rl, req.seed)
    summary = estimate_arl(job, workers=req.workers)
    row = ArlTableRow(
        lam=req.lam, L=req.L, ucl=compute_limits(job.chart).ucl,
        p1=truth.p, theta1=truth.theta, k1=truth.k,
        arl=summary.arl, sdrl=summary.sdrl, se=summary.se_arl,
    )
    return s.SimulateResponse(row=_row_out(row), censored=summary.censored)


def calibrate(req: s.CalibrateRequest) -> s.CalibrateResponse:
    spec = CalibrationSpec(
        lam=req.lam, n=req.n, params=_params(req.params), target_arl0=req.target_arl0,
        reps=req.reps, tol_arl=req.tol, master_seed=req.seed, method=req.method,
        plateau_policy=req.plateau_policy,
    )
    res = calibrate_L(spec, workers=req.workers)
    return s.CalibrateResponse(
        L=res.l_star,
        ucl=compute_limits(spec.chart(res.l_star)).ucl,
        achieved_arl=res.achieved_arl,
        achieved_sdrl=_finite_or_none(res.achieved_sdrl),
        evaluations=res.evaluations,
        converged=res.converged,
        plateau=res.plateau,
        arl_below=res.arl_below,
        arl_above=res.arl_above,
    )


def _fit_out(r: FitResult) -> s.FitOut:
    return s.FitOut(
        family=r.family.value,
        mu=r.model.mu,
        k=_finite_or_none(r.model.k),
        theta=r.model.theta,
        p_hat=r.p_hat,
        loglik=r.loglik,
        bic=r.bic,
        mean_hat=r.mean_hat,
        mean_ci=r.mean_ci,
        converged=r.converged,
    )


def fit_models(req: s.FitRequest) -> s.FitResponse:
    if req.family == "all":
        sel = select_model(req.data)
        return s.FitResponse(fits=[_fit_out(r) for r in sel.table], best=sel.best.family.value, notes=sel.notes)
    r = fit(req.family, req.data)
    return s.FitResponse(fits=[_fit_out(r)], best=r.family.value)


def disptest(req: s.DispTestRequest) -> s.DispTestResponse:
    rep = dispersion_report(req.data, form=req.form)
    out = dict(rep.__dict__)
    out["dispersion_param"] = _finite_or_none(rep.dispersion_param)
    return s.DispTestResponse(**out)


def monitor_series(req: s.MonitorRequest) -> s.MonitorResponse:
    run = monitor(
        req.data, req.phase1_end, req.lam, L=req.L, target_arl0=req.target_arl0,
        family=req.family, n=req.n, reps=req.reps, seed=req.seed,
        reset_at_phase2=req.reset_at_phase2, workers=req.workers,
    )
    prm = run.config.params
    return s.MonitorResponse(
        phase1_end=run.phase1_end,
        lam=run.config.lam,
        L=run.config.L,
        n=run.config.n,
        params=s.ZinbIn(k=prm.k, p=prm.p, theta=prm.theta),
        family=None if run.fit is None else run.fit.family.value,
        ucl=run.limits.ucl,
        cl=run.limits.cl,
        lcl=run.limits.lcl,
        points=[s.PointOut(**p.__dict__) for p in run.points],
        ooc_indices=list(run.ooc_indices),
        phase1_signals=list(run.phase1_signals),
        notes=list(run.notes),
    )


def parse_grid(grid: dict) -> ArlGrid:
    try:
        return ArlGrid.from_dict(grid)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DomainError):
            raise
        raise ParseError(f"malformed grid: {exc!r}") from exc


def table(req: s.TableRequest) -> s.TableResponse:
    grid = dict(req.grid)
    if req.seed is not None:
        grid["seed"] = req.seed
    if req.reps is not None:
        grid["reps"] = req.reps
    rows = build_arl_table(parse_grid(grid), workers=req.workers)
    return s.TableResponse(rows=[_row_out(r) for r in rows])


__all__ = [
    "ERROR_KINDS",
    "error_kind",
    "simulate",
    "calibrate",
    "fit_models",
    "disptest",
    "monitor_series",
    "parse_grid",
    "table",
]
