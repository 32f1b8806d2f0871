"""User-facing layer: CSV ingestion, monitoring, ARL tables and plots."""

from .io import ingest_counts, parse_counts_text, read_counts
from .monitoring import MonitoringPoint, MonitoringRun, monitor, sweep_lambda
from .render import render_arl_curves, render_chart
from .tables import ArlGrid, ArlTableRow, Shift, build_arl_table, read_arl_csv, write_arl_csv

__all__ = [
    "ingest_counts",
    "parse_counts_text",
    "read_counts",
    "MonitoringPoint",
    "MonitoringRun",
    "monitor",
    "sweep_lambda",
    "render_arl_curves",
    "render_chart",
    "ArlGrid",
    "ArlTableRow",
    "Shift",
    "build_arl_table",
    "read_arl_csv",
    "write_arl_csv",
]
