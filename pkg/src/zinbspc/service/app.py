"""FastAPI application exposing the chart toolkit over HTTP."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import BracketError, ConvergenceError, DomainError, ParseError
from . import handlers
from . import schemas as s

app = FastAPI(title="zinbspc", version=__version__)


async def _known_error(request: Request, exc: Exception):
    kind = handlers.error_kind(exc)
    return JSONResponse(status_code=handlers.ERROR_KINDS[kind][1], content={"kind": kind, "detail": str(exc)})


for _exc in (DomainError, ParseError, ConvergenceError, BracketError):
    app.add_exception_handler(_exc, _known_error)


@app.get("/health", response_model=s.HealthResponse)
def health() -> s.HealthResponse:
    return s.HealthResponse(version=__version__)


@app.post("/simulate", response_model=s.SimulateResponse)
def simulate(req: s.SimulateRequest) -> s.SimulateResponse:
    return handlers.simulate(req)


@app.post("/calibrate", response_model=s.CalibrateResponse)
def calibrate(req: s.CalibrateRequest) -> s.CalibrateResponse:
    return handlers.calibrate(req)


@app.post("/fit", response_model=s.FitResponse)
def fit(req: s.FitRequest) -> s.FitResponse:
    return handlers.fit_models(req)


@app.post("/disptest", response_model=s.DispTestResponse)
def disptest(req: s.DispTestRequest) -> s.DispTestResponse:
    return handlers.disptest(req)


@app.post("/monitor", response_model=s.MonitorResponse)
def monitor(req: s.MonitorRequest) -> s.MonitorResponse:
    return handlers.monitor_series(req)


@app.post("/table", response_model=s.TableResponse)
def table(req: s.TableRequest) -> s.TableResponse:
    return handlers.table(req)
