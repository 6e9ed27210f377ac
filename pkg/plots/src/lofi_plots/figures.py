"""Figure builders for sweep results.

Two report figures are produced from one results CSV:

* BER curves: bit error rate vs operating Es/N0, one line per
  (scheduler, K) series, log-scaled y.
* Cost/quality tradeoff: objective evaluations per channel vs the SNR
  where the series first reaches a target BER, one point per series.

Both builders return the matplotlib figure together with the plotted data
so callers and tests can inspect exactly what was drawn.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .results_io import ResultRow, series_keys


class PlotDataError(ValueError):
    """Raised when a figure would be empty (no plottable series)."""


def interp_snr_at_target(
    snr_db: Sequence[float], ber: Sequence[float], target_ber: float
) -> tuple[Optional[float], str]:
    """SNR where the BER series first reaches the target, log-linear in BER.

    This mirrors the producer's documented convention so both ends of the
    CSV interface agree on the crossing: find the first grid index i with
    ber[i] <= target. No such index -> (None, note). i == 0 -> the first
    grid point. ber[i] == 0 -> that grid point (log-interpolation is
    undefined at zero). Otherwise interpolate between points i-1 and i
    linearly in log(BER). A series that is not non-increasing gets note
    'non-monotone-ber'.
    """
    if len(snr_db) != len(ber) or len(snr_db) < 2:
        raise ValueError("need at least two (snr, ber) points")
    if any(s2 <= s1 for s1, s2 in zip(snr_db, snr_db[1:])):
        raise ValueError("snr_db must be strictly increasing")
    if not (target_ber > 0.0):
        raise ValueError("target_ber must be > 0")
    if any(b < 0 for b in ber):
        raise ValueError("ber values must be >= 0")
    note = "non-monotone-ber" if any(b2 > b1 for b1, b2 in zip(ber, ber[1:])) else ""
    for i, b in enumerate(ber):
        if b <= target_ber:
            if i == 0 or b == 0.0:
                return float(snr_db[i]), note
            b_hi = ber[i - 1]
            frac = (math.log(b_hi) - math.log(target_ber)) / (math.log(b_hi) - math.log(b))
            return float(snr_db[i - 1] + (snr_db[i] - snr_db[i - 1]) * frac), note
    return None, note


def series_label(scheduler: str, restarts: int) -> str:
    """Legend label for a series; K is shown only where it matters."""
    if scheduler in ("lofi", "lofi-pp"):
        return f"{scheduler} (K={restarts})"
    return scheduler


@dataclass(frozen=True)
class SeriesCurve:
    """One plotted BER-vs-SNR line."""

    scheduler: str
    restarts: int
    label: str
    snr_db: np.ndarray
    ber: np.ndarray


@dataclass(frozen=True)
class TradeoffPoint:
    """One plotted cost/quality point."""

    scheduler: str
    restarts: int
    label: str
    snr_db_at_target: float
    obj_evals: float
    note: str


def _select(
    rows: list[ResultRow], include: Optional[Iterable[str]]
) -> tuple[list[tuple[str, int]], list[str]]:
    """Series keys to plot, plus warnings for unknown include names."""
    keys = series_keys(rows)
    if include is None:
        return keys, []
    wanted = [name for name in include if name]
    if not wanted:
        return keys, []
    known = {scheduler for scheduler, _ in keys}
    notes = [f"unknown scheduler {name!r} in include list" for name in wanted if name not in known]
    kept = [key for key in keys if key[0] in wanted]
    return kept, notes


def _series_rows(rows: list[ResultRow], key: tuple[str, int]) -> list[ResultRow]:
    picked = [r for r in rows if (r.scheduler, r.restarts) == key]
    return sorted(picked, key=lambda r: r.snr_db)


def make_ber_figure(
    rows: list[ResultRow],
    include: Optional[Iterable[str]] = None,
    title: Optional[str] = None,
) -> tuple[plt.Figure, list[SeriesCurve], list[str]]:
    """BER-vs-SNR figure with one line per (scheduler, K) series.

    Refused series are skipped with a warning entry. Zero-BER points stay
    in the returned curve data but are masked on the log axis. Returns
    (figure, curves, warnings); raises PlotDataError when nothing plots.
    """
    keys, notes = _select(rows, include)
    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    curves: list[SeriesCurve] = []
    for key in keys:
        picked = _series_rows(rows, key)
        if any(r.refused for r in picked):
            notes.append(f"series {series_label(*key)} was refused by the producer; skipped")
            continue
        snr = np.array([r.snr_db for r in picked], dtype=np.float64)
        ber = np.array([r.ber for r in picked], dtype=np.float64)
        label = series_label(*key)
        shown = np.where(ber > 0.0, ber, np.nan)
        ax.semilogy(snr, shown, marker="o", label=label)
        curves.append(SeriesCurve(key[0], key[1], label, snr, ber))
    if not curves:
        plt.close(fig)
        raise PlotDataError("no plottable series in results")
    ax.set_xlabel("Es/N0 (dB)")
    ax.set_ylabel("bit error rate")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return fig, curves, notes


def make_tradeoff_figure(
    rows: list[ResultRow],
    target_ber: float,
    include: Optional[Iterable[str]] = None,
    title: Optional[str] = None,
) -> tuple[plt.Figure, list[TradeoffPoint], list[str]]:
    """Scheduling cost vs SNR needed to reach a target BER.

    x is the interpolated crossing from interp_snr_at_target, y is the
    series' objective evaluations per channel. Series that never reach
    the target (or were refused) are skipped with a warning. Raises
    PlotDataError when no series crosses the target.
    """
    keys, notes = _select(rows, include)
    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    points: list[TradeoffPoint] = []
    for key in keys:
        picked = _series_rows(rows, key)
        label = series_label(*key)
        if any(r.refused for r in picked):
            notes.append(f"series {label} was refused by the producer; skipped")
            continue
        snr = [r.snr_db for r in picked]
        ber = [r.ber for r in picked]
        evals = float(np.mean([r.obj_evals for r in picked]))
        crossing, note = interp_snr_at_target(snr, ber, target_ber)
        if crossing is None:
            notes.append(f"series {label} never reaches BER {target_ber:g}; skipped")
            continue
        points.append(TradeoffPoint(key[0], key[1], label, crossing, evals, note))
    if not points:
        plt.close(fig)
        raise PlotDataError(f"no series reaches the target BER {target_ber:g}")
    for pt in points:
        ax.semilogy([pt.snr_db_at_target], [pt.obj_evals], marker="o", markersize=9)
        ax.annotate(
            pt.label,
            (pt.snr_db_at_target, pt.obj_evals),
            textcoords="offset points",
            xytext=(8, 4),
            fontsize=9,
        )
    ax.set_xlabel(f"Es/N0 at BER {target_ber:g} (dB)")
    ax.set_ylabel("objective evaluations per channel")
    ax.grid(True, which="both", alpha=0.3)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return fig, points, notes


def save_figure(fig: plt.Figure, out_path: str) -> None:
    """Render the figure to a file and release it."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        fig.savefig(out_path, dpi=150)
    plt.close(fig)
