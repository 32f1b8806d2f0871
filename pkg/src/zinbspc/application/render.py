"""SVG rendering of monitoring charts and ARL curves."""

from __future__ import annotations

import os
from collections import defaultdict
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .monitoring import MonitoringRun  # noqa: E402
from .tables import ArlTableRow  # noqa: E402

OOC_GID = "ooc-markers"
CURVE_GID_PREFIX = "arl-curve-"

# Reproducible SVG bytes: fixed element ids, no timestamp.
_SVG_RC = {"svg.hashsalt": "zinbspc", "svg.fonttype": "none"}
_SVG_META = {"Date": None, "Creator": None}


def render_chart(run: MonitoringRun, path: str | os.PathLike, title: str | None = None) -> None:
    """Monitoring statistic with UCL/CL, the Phase-I/II divider and OOC markers.

    OOC markers (Phase II only) are grouped under the SVG id ``ooc-markers``.
    """
    idx = [p.index for p in run.points]
    z = [p.z for p in run.points]
    ooc = set(run.ooc_indices)
    with plt.rc_context(_SVG_RC):
        fig, ax = plt.subplots(figsize=(9, 4))
        ax.plot(idx, z, color="tab:blue", lw=1.0, marker=".", ms=3, label="statistic")
        ax.axhline(run.limits.ucl, color="tab:red", ls="--", lw=1.0, label=f"UCL = {run.limits.ucl:.4f}")
        ax.axhline(run.limits.cl, color="0.3", ls="-", lw=0.8, label=f"CL = {run.limits.cl:.4f}")
        if run.phase1_end < len(idx):
            ax.axvline(run.phase1_end + 0.5, color="0.5", ls=":", lw=1.0)
            ax.text(run.phase1_end + 0.5, ax.get_ylim()[1], " Phase II", va="top", fontsize=8)
        ox = [p.index for p in run.points if p.index in ooc]
        oy = [p.z for p in run.points if p.index in ooc]
        if ox:
            (markers,) = ax.plot(ox, oy, ls="none", marker="o", mfc="none", mec="tab:red", ms=7, label="OOC")
            markers.set_gid(OOC_GID)
        kind = "Shewhart" if run.config.lam == 1.0 else f"EWMA (lambda = {run.config.lam:g})"
        ax.set_title(title or f"ZINB {kind} chart, L = {run.config.L:.3f}")
        ax.set_xlabel("sample")
        ax.set_ylabel("Z" if run.config.lam < 1.0 else "Ybar")
        ax.legend(loc="upper left", fontsize=8)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata=_SVG_META)
        plt.close(fig)


def _shift_label(row: ArlTableRow) -> str:
    return f"({row.p1:g}, {row.theta1:g}, {row.k1:g})"


def render_arl_curves(rows: Sequence[ArlTableRow], path: str | os.PathLike, title: str | None = None) -> None:
    """ARL against the shift, one curve per lambda, log-scaled y axis.

    Shifts are ordered by the process mean under the shifted parameters, so a
    pure decrease in ``p`` reads left to right as a growing shift.
    """
    by_lam: dict[float, list[ArlTableRow]] = defaultdict(list)
    for row in rows:
        by_lam[row.lam].append(row)

    def shift_mean(r: ArlTableRow) -> float:
        return r.k1 * (1 - r.theta1) * (1 - r.p1) / r.p1

    order = sorted({(shift_mean(r), _shift_label(r)) for r in rows})
    xpos = {label: i for i, (_, label) in enumerate(order)}
    with plt.rc_context(_SVG_RC):
        fig, ax = plt.subplots(figsize=(8, 5))
        for lam in sorted(by_lam, reverse=True):
            pts = sorted(by_lam[lam], key=lambda r: xpos[_shift_label(r)])
            label = "Shewhart" if lam == 1.0 else f"EWMA lambda = {lam:g}"
            (line,) = ax.plot([xpos[_shift_label(r)] for r in pts], [r.arl for r in pts], marker="o", ms=4, label=label)
            line.set_gid(f"{CURVE_GID_PREFIX}{lam:g}")
        ax.set_yscale("log")
        ax.set_xticks(range(len(order)))
        ax.set_xticklabels([label for _, label in order], rotation=45, ha="right", fontsize=7)
        ax.set_xlabel("shifted (p, theta, k)")
        ax.set_ylabel("ARL")
        ax.set_title(title or "ARL of ZINB EWMA and Shewhart charts")
        ax.legend(fontsize=8)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata=_SVG_META)
        plt.close(fig)
