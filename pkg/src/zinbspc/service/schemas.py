"""Request and response models of the HTTP service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class ZinbIn(BaseModel):
    k: float = Field(..., gt=0, description="NB size parameter.")
    p: float = Field(..., gt=0, le=1, description="NB success probability.")
    theta: float = Field(0.0, ge=0, lt=1, description="Zero-inflation probability.")


class ShiftIn(BaseModel):
    p: Optional[float] = None
    theta: Optional[float] = None
    k: Optional[float] = None


class SimulateRequest(BaseModel):
    params: ZinbIn
    lam: float = Field(..., gt=0, le=1)
    L: float = Field(..., gt=0)
    n: int = Field(1, ge=1)
    reps: int = Field(10_000, ge=1)
    seed: int = Field(0, ge=0)
    max_rl: int = Field(1_000_000, ge=1)
    shift: ShiftIn = Field(default_factory=ShiftIn)
    workers: int = Field(1, ge=1)


class ArlRowOut(BaseModel):
    lam: float
    L: float
    ucl: float
    p1: float
    theta1: float
    k1: float
    arl: float
    sdrl: float
    se: float


class SimulateResponse(BaseModel):
    row: ArlRowOut
    censored: int


class CalibrateRequest(BaseModel):
    params: ZinbIn
    lam: float = Field(..., gt=0, le=1)
    n: int = Field(1, ge=1)
    target_arl0: float = Field(500.0, gt=0)
    tol: Optional[float] = Field(None, gt=0)
    reps: int = Field(10_000, ge=1)
    seed: int = Field(0, ge=0)
    method: Literal["mc", "exact"] = "mc"
    plateau_policy: Literal["nearest", "below", "above"] = "nearest"
    workers: int = Field(1, ge=1)


class CalibrateResponse(BaseModel):
    L: float
    ucl: float
    achieved_arl: float
    achieved_sdrl: Optional[float]
    evaluations: int
    converged: bool
    plateau: bool
    arl_below: Optional[float] = None
    arl_above: Optional[float] = None


class CountsIn(BaseModel):
    data: list[int] = Field(..., min_length=1)


class FitRequest(CountsIn):
    family: Literal["all", "poisson", "nb", "zip", "zinb"] = "all"


class FitOut(BaseModel):
    family: str
    mu: float
    k: Optional[float] = Field(None, description="NB size; null for the Poisson limit.")
    theta: Optional[float]
    p_hat: Optional[float]
    loglik: float
    bic: float
    mean_hat: float
    mean_ci: tuple[float, float]
    converged: bool


class FitResponse(BaseModel):
    fits: list[FitOut]
    best: str
    notes: list[str] = Field(default_factory=list)


class DispTestRequest(CountsIn):
    form: Literal["linear", "quadratic"] = "linear"


class DispTestResponse(BaseModel):
    mean: float
    variance: float
    cv: Optional[float]
    c_hat: float
    t_stat: float
    aux_p_value: float
    lr_stat: float
    lr_p_value: float
    dispersion_param: Optional[float]
    inverse_dispersion: float


class MonitorRequest(CountsIn):
    phase1_end: int = Field(..., ge=1)
    lam: float = Field(..., gt=0, le=1)
    L: Optional[float] = Field(None, gt=0)
    target_arl0: Optional[float] = Field(None, gt=0)
    family: Literal["auto", "poisson", "nb", "zip", "zinb"] = "auto"
    n: int = Field(1, ge=1)
    reps: int = Field(10_000, ge=1)
    seed: int = Field(0, ge=0)
    reset_at_phase2: bool = False
    workers: int = Field(1, ge=1)


class PointOut(BaseModel):
    index: int
    ybar: float
    z: float
    signal: bool


class MonitorResponse(BaseModel):
    phase1_end: int
    lam: float
    L: float
    n: int
    params: ZinbIn
    family: Optional[str]
    ucl: float
    cl: float
    lcl: float
    points: list[PointOut]
    ooc_indices: list[int]
    phase1_signals: list[int]
    notes: list[str] = Field(default_factory=list)


class TableRequest(BaseModel):
    grid: dict = Field(..., description="ARL grid in the JSON grid-file layout.")
    seed: Optional[int] = Field(None, ge=0, description="Overrides the grid's seed.")
    reps: Optional[int] = Field(None, ge=1, description="Overrides the grid's reps.")
    workers: int = Field(1, ge=1)


class TableResponse(BaseModel):
    rows: list[ArlRowOut]


class HealthResponse(BaseModel):
    status: str = "ok"
    version: str
