"""Command-line interface.

Every subcommand builds a service request and either runs the handler
in-process or, with ``--server URL``, posts it to a running service.
Exit codes: 0 ok, 1 usage, 2 data error, 3 convergence/calibration failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from typing import Callable, Sequence, TextIO

from pydantic import BaseModel, ValidationError

from .application.io import ingest_counts
from .application.monitoring import MonitoringPoint, MonitoringRun
from .application.render import render_arl_curves, render_chart
from .application.tables import ArlTableRow, write_arl_csv
from .chart import ChartConfig, ControlLimits
from .distributions import ZinbParams
from .errors import ParseError
from .service import handlers
from .service import schemas as s

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_CONVERGENCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; usage errors here exit with 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class RemoteError(Exception):
    def __init__(self, kind: str, detail: str):
        super().__init__(detail)
        self.kind = kind


def _call(args, route: str, handler: Callable[[BaseModel], BaseModel], req: BaseModel, out_type: type[BaseModel]):
    if args.server is None:
        return handler(req)
    import httpx

    resp = httpx.post(f"{args.server.rstrip('/')}/{route}", json=req.model_dump(mode="json"), timeout=None)
    if resp.status_code != 200:
        body = resp.json() if resp.headers.get("content-type", "").startswith("application/json") else {}
        kind = body.get("kind", "usage" if resp.status_code < 500 else "internal")
        raise RemoteError(kind, str(body.get("detail", resp.text)))
    return out_type.model_validate(resp.json())


def _read_data(args) -> list[int]:
    data = ingest_counts(args.data, args.column)
    if not data:
        raise ParseError(f"no counts in {args.data}")
    return data


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool) or isinstance(x, int):
        return str(x)
    return f"{x:.4f}"


def _rows(rows: Sequence[s.ArlRowOut]) -> list[ArlTableRow]:
    return [ArlTableRow(**r.model_dump()) for r in rows]


def _open_out(path: str | None) -> TextIO:
    return sys.stdout if path in (None, "-") else open(path, "w", newline="", encoding="utf-8")


# --- subcommands ------------------------------------------------------------


def cmd_simulate(args) -> int:
    req = s.SimulateRequest(
        params=s.ZinbIn(k=args.k, p=args.p, theta=args.theta),
        lam=args.lam, L=args.L, n=args.n, reps=args.reps, seed=args.seed, max_rl=args.max_rl,
        shift=s.ShiftIn(p=args.shift_p, theta=args.shift_theta, k=args.shift_k),
        workers=args.workers,
    )
    res = _call(args, "simulate", handlers.simulate, req, s.SimulateResponse)
    out = _open_out(args.out)
    try:
        write_arl_csv(_rows([res.row]), out)
    finally:
        if out is not sys.stdout:
            out.close()
    if res.censored:
        print(f"warning: {res.censored} replications censored at max_rl={args.max_rl}", file=sys.stderr)
    return EXIT_OK


def cmd_calibrate(args) -> int:
    req = s.CalibrateRequest(
        params=s.ZinbIn(k=args.k, p=args.p, theta=args.theta),
        lam=args.lam, n=args.n, target_arl0=args.target_arl0, tol=args.tol, reps=args.reps,
        seed=args.seed, method=args.method, plateau_policy=args.plateau_policy, workers=args.workers,
    )
    res = _call(args, "calibrate", handlers.calibrate, req, s.CalibrateResponse)
    fields = ["L", "ucl", "achieved_arl", "achieved_sdrl", "evaluations", "plateau", "arl_below", "arl_above"]
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(fields)
    w.writerow([_fmt(getattr(res, f)) for f in fields])
    if res.plateau:
        print(
            f"note: target ARL0 {args.target_arl0} falls in a discreteness gap "
            f"({res.arl_below:.2f} .. {res.arl_above:.2f}); reporting the {args.plateau_policy} side",
            file=sys.stderr,
        )
    return EXIT_OK


def cmd_fit(args) -> int:
    req = s.FitRequest(data=_read_data(args), family=args.family)
    res = _call(args, "fit", handlers.fit_models, req, s.FitResponse)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["family", "mu", "k", "theta", "p_hat", "loglik", "bic", "mean_hat", "ci_low", "ci_high"])
    for f in res.fits:
        w.writerow([f.family] + [_fmt(x) for x in (f.mu, f.k, f.theta, f.p_hat, f.loglik, f.bic, f.mean_hat, *f.mean_ci)])
    print(f"best: {res.best}", file=sys.stderr)
    for note in res.notes:
        print(f"note: {note}", file=sys.stderr)
    return EXIT_OK


def cmd_disptest(args) -> int:
    req = s.DispTestRequest(data=_read_data(args), form=args.form)
    res = _call(args, "disptest", handlers.disptest, req, s.DispTestResponse)
    row = res.model_dump()
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(list(row))
    w.writerow([_fmt(v) for v in row.values()])
    return EXIT_OK


def _run_from_response(res: s.MonitorResponse) -> MonitoringRun:
    params = ZinbParams(res.params.k, res.params.p, res.params.theta)
    return MonitoringRun(
        phase1_end=res.phase1_end,
        config=ChartConfig(res.lam, res.L, res.n, params),
        limits=ControlLimits(res.ucl, res.cl, res.lcl),
        points=tuple(MonitoringPoint(**p.model_dump()) for p in res.points),
        ooc_indices=tuple(res.ooc_indices),
        notes=tuple(res.notes),
    )


def cmd_monitor(args) -> int:
    if (args.L is None) == (args.target_arl0 is None):
        raise UsageError("give exactly one of --L and --target-arl0")
    req = s.MonitorRequest(
        data=_read_data(args), phase1_end=args.phase1_end, lam=args.lam, L=args.L,
        target_arl0=args.target_arl0, family=args.family, n=args.n, reps=args.reps, seed=args.seed,
        reset_at_phase2=args.reset, workers=args.workers,
    )
    res = _call(args, "monitor", handlers.monitor_series, req, s.MonitorResponse)
    print(f"family: {res.family or 'given'}")
    print(f"lambda: {res.lam:.4f}  L: {res.L:.4f}")
    print(f"UCL: {res.ucl:.4f}  CL: {res.cl:.4f}  LCL: {res.lcl:.4f}")
    print("phase I signals: " + (" ".join(map(str, res.phase1_signals)) or "none"))
    print("phase II OOC: " + (" ".join(map(str, res.ooc_indices)) or "none"))
    for note in res.notes:
        print(f"note: {note}", file=sys.stderr)
    if args.plot:
        render_chart(_run_from_response(res), args.plot)
    return EXIT_OK


def cmd_table(args) -> int:
    try:
        with open(args.grid, encoding="utf-8") as fh:
            grid = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"grid is not valid JSON: {exc.msg}", exc.lineno) from None
    req = s.TableRequest(grid=grid, seed=args.seed, reps=args.reps, workers=args.workers)
    res = _call(args, "table", handlers.table, req, s.TableResponse)
    rows = _rows(res.rows)
    out = _open_out(args.out)
    try:
        write_arl_csv(rows, out)
    finally:
        if out is not sys.stdout:
            out.close()
    if args.plot:
        render_arl_curves(rows, args.plot)
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("zinbspc.service.app:app", host=args.host, port=args.port)
    return EXIT_OK


# --- parser -----------------------------------------------------------------


def _add_params(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=float, required=True, help="NB size parameter")
    p.add_argument("--p", type=float, required=True, help="NB success probability")
    p.add_argument("--theta", type=float, default=0.0, help="zero-inflation probability (default 0)")
    p.add_argument("--lambda", dest="lam", type=float, required=True, help="EWMA smoothing constant; 1 = Shewhart")
    p.add_argument("--n", type=int, default=1, help="subgroup size")
    p.add_argument("--reps", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0, help="master seed of the Monte Carlo streams")


def _add_data(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="CSV file of counts")
    p.add_argument("--column", default=None, help="column name or 0-based index (default: first)")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--server", default=None, metavar="URL", help="send the request to a running service")
    common.add_argument("--workers", type=int, default=1, help="worker processes (results do not depend on it)")

    parser = _Parser(prog="zinbspc", description="ZINB EWMA and Shewhart control charts.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo ARL/SDRL of one chart")
    _add_params(p)
    p.add_argument("--L", type=float, required=True, help="limit width multiplier")
    p.add_argument("--max-rl", type=int, default=1_000_000)
    p.add_argument("--shift-p", type=float, default=None)
    p.add_argument("--shift-theta", type=float, default=None)
    p.add_argument("--shift-k", type=float, default=None)
    p.add_argument("--out", default=None, help="CSV output path (default stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("calibrate", parents=[common], help="find L for a target in-control ARL")
    _add_params(p)
    p.add_argument("--target-arl0", type=float, default=500.0)
    p.add_argument("--tol", type=float, default=None, help="ARL tolerance (default max(0.5, 1%% of target))")
    p.add_argument("--method", choices=["mc", "exact"], default="mc", help="exact is for lambda = 1 only")
    p.add_argument("--plateau-policy", choices=["nearest", "below", "above"], default="nearest")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("fit", parents=[common], help="fit count families and rank by BIC")
    _add_data(p)
    p.add_argument("--family", choices=["all", "poisson", "nb", "zip", "zinb"], default="all")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("disptest", parents=[common], help="overdispersion tests")
    _add_data(p)
    p.add_argument("--form", choices=["linear", "quadratic"], default="linear")
    p.set_defaults(func=cmd_disptest)

    p = sub.add_parser("monitor", parents=[common], help="Phase I fit and Phase II monitoring")
    _add_data(p)
    p.add_argument("--phase1-end", type=int, required=True, help="last Phase I sample (1-based)")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--L", type=float, default=None)
    p.add_argument("--target-arl0", type=float, default=None)
    p.add_argument("--family", choices=["auto", "poisson", "nb", "zip", "zinb"], default="auto")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--reps", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reset", action="store_true", help="restart the EWMA at the first Phase II sample")
    p.add_argument("--plot", default=None, metavar="OUT.svg")
    p.set_defaults(func=cmd_monitor)

    p = sub.add_parser("table", parents=[common], help="ARL table over a JSON grid")
    p.add_argument("--grid", required=True, help="grid JSON file")
    p.add_argument("--out", default=None, help="CSV output path (default stdout)")
    p.add_argument("--seed", type=int, default=None, help="override the grid's seed")
    p.add_argument("--reps", type=int, default=None, help="override the grid's reps")
    p.add_argument("--plot", default=None, metavar="OUT.svg")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except Exception as exc:
        if isinstance(exc, UsageError):
            kind = "usage"
        elif isinstance(exc, RemoteError):
            kind = exc.kind
        elif isinstance(exc, FileNotFoundError):
            kind = "data"
        else:
            kind = handlers.error_kind(exc)
        if kind not in handlers.ERROR_KINDS:
            raise
        if isinstance(exc, ValidationError):
            msg = "; ".join(f"{'.'.join(map(str, e['loc']))}: {e['msg']}" for e in exc.errors())
        else:
            msg = str(exc)
        print(f"zinbspc: {kind} error: {msg}", file=sys.stderr)
        return handlers.ERROR_KINDS[kind][0]


if __name__ == "__main__":
    sys.exit(main())
