"""Monte Carlo sweep harness: realizations x schedulers x SNR grid -> BER table.

Per channel realization: draw (or load) the channel, apply power control,
rescale to unit median receive power (so Es/N0 is the median UE's operating
SNR), form the BS-side estimate, let each configured scheduler pick its slots
once at the reference operating point (the highest swept SNR unless
overridden), then simulate both slots at every swept SNR on the true channel
with detection from the estimate.

Determinism: every random draw comes from a per-purpose substream keyed by
(master seed, purpose, realization, ...), so results are bit-identical for
any worker count. Payload/noise substreams are keyed by (realization, SNR,
slot) and deliberately NOT by scheduler, so all partition schedulers face
identical bits and noise in a cell: common random numbers for paired
comparison.
"""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

import numpy as np

from . import seeds
from .channel import (
    ChannelMatrix,
    EstimationErrorModel,
    SynthChannelConfig,
    apply_power_control,
    estimate_channel,
    load_channel,
    normalize_median_power,
    synth_channel,
)
from .detection import LinkParams, lmmse_matrix, make_qam16, post_eq_sinr, simulate_slot
from .scheduling import SchedulerConfig, run_scheduler

__all__ = [
    "SweepConfig",
    "CellStats",
    "RealizationRecord",
    "SweepResult",
    "TargetCrossing",
    "run_sweep",
    "snr_at_target",
    "interp_snr_at_target",
    "export_results",
    "load_results",
    "CSV_HEADER",
]

CSV_HEADER = ("scheduler", "K", "snr_db", "ber", "min_sinr_db", "obj_evals", "realizations", "symbols")
_UNREACHED = "unreached"


@dataclass(frozen=True)
class SweepConfig:
    """Everything a sweep needs; exactly one channel source must be set.

    symbols is the per-realization symbol-period budget, split evenly between
    the two slots. The embedded SynthChannelConfig seed is ignored; each
    realization's channel seed derives from the master `seed`.
    """

    snr_db: tuple[float, ...]
    schedulers: tuple[SchedulerConfig, ...]
    symbols: int
    realizations: int
    seed: int
    dynamic_range_db: float = 6.0
    estimation_error_variance: float = 0.0
    channel: Optional[SynthChannelConfig] = None
    channel_files: Optional[tuple[str, ...]] = None
    schedule_snr_db: Optional[float] = None
    reschedule_per_snr: bool = False

    def __post_init__(self) -> None:
        if (self.channel is None) == (self.channel_files is None):
            raise ValueError("exactly one of channel / channel_files must be set")
        if not self.snr_db:
            raise ValueError("snr_db grid must be non-empty")
        if any(b <= a for a, b in zip(self.snr_db, self.snr_db[1:])):
            raise ValueError("snr_db grid must be strictly increasing")
        if not self.schedulers:
            raise ValueError("at least one scheduler is required")
        labels = [(s.algorithm, s.effective_restarts) for s in self.schedulers]
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate (algorithm, restarts) scheduler entries")
        if self.symbols < 1:
            raise ValueError("symbols must be >= 1")
        if self.realizations < 1:
            raise ValueError("realizations must be >= 1")
        if self.channel_files is not None and len(self.channel_files) != self.realizations:
            raise ValueError("realizations must equal the number of channel files")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if not (math.isfinite(self.dynamic_range_db) and self.dynamic_range_db >= 0):
            raise ValueError("dynamic_range_db must be finite and >= 0")
        if self.estimation_error_variance < 0:
            raise ValueError("estimation_error_variance must be >= 0")


@dataclass
class CellStats:
    """Aggregate of one (scheduler, K, SNR) cell.

    wall_time_s is diagnostic only and excluded from equality, so reruns of
    the same configuration compare equal.
    """

    scheduler: str
    restarts: int
    snr_db: float
    ber: Optional[float]
    min_sinr_db: Optional[float]
    obj_evals: Optional[float]
    realizations: int
    symbols: int
    refused: bool = False
    wall_time_s: float = field(default=0.0, compare=False)


@dataclass
class RealizationRecord:
    """Per-realization slice of a cell; BER and means are recomputable from these."""

    realization: int
    scheduler: str
    restarts: int
    snr_db: float
    bits: int
    bit_errors: int
    min_sinr: float  # linear, at this cell's operating point
    obj_evals: int


@dataclass
class SweepResult:
    config: SweepConfig
    cells: list[CellStats]
    records: list[RealizationRecord]


@dataclass
class TargetCrossing:
    """Where a scheduler's interpolated BER curve crosses the target."""

    scheduler: str
    restarts: int
    snr_db: Optional[float]
    reachable: bool
    note: str = ""


def _slot_lists(deployed, u_count: int) -> tuple[tuple[int, ...], ...]:
    if deployed is None:  # no scheduling: everyone in both slots
        everyone = tuple(range(u_count))
        return (everyone, everyone)
    return deployed.slots


def _min_sinr(h_hat: np.ndarray, slots, rho: float) -> float:
    if slots[0] == slots[1]:
        sub = h_hat
        return float(np.min(post_eq_sinr(sub, lmmse_matrix(sub, rho), rho)))
    worst = math.inf
    for slot in slots:
        sub = h_hat[:, slot]
        worst = min(worst, float(np.min(post_eq_sinr(sub, lmmse_matrix(sub, rho), rho))))
    return worst


def _realization_task(cfg: SweepConfig, refused: tuple[bool, ...], r: int):
    """All cells of one realization. Returns per (scheduler, snr) arrays."""
    if cfg.channel is not None:
        ch_seed = seeds.derive_seed(cfg.seed, seeds.PURPOSE_CHANNEL, r)
        h_true = synth_channel(replace(cfg.channel, seed=ch_seed))
    else:
        h_true = load_channel(cfg.channel_files[r])
    h_true = normalize_median_power(apply_power_control(h_true, cfg.dynamic_range_db))
    est_seed = seeds.derive_seed(cfg.seed, seeds.PURPOSE_ESTIMATION, r)
    h_hat = estimate_channel(h_true, EstimationErrorModel(cfg.estimation_error_variance), est_seed)

    n_sched, n_snr = len(cfg.schedulers), len(cfg.snr_db)
    errors = np.zeros((n_sched, n_snr), dtype=np.int64)
    bits = np.zeros((n_sched, n_snr), dtype=np.int64)
    min_sinr = np.zeros((n_sched, n_snr))
    evals = np.zeros((n_sched, n_snr), dtype=np.int64)
    wall = np.zeros((n_sched, n_snr))

    ref_snr = cfg.schedule_snr_db if cfg.schedule_snr_db is not None else cfg.snr_db[-1]
    rho_ref = 10.0 ** (-ref_snr / 10.0)
    qam = make_qam16(1.0)
    n_slot_symbols = ((cfg.symbols + 1) // 2, cfg.symbols // 2)

    for i, scfg in enumerate(cfg.schedulers):
        if refused[i]:
            continue
        if not cfg.reschedule_per_snr:
            sched_seed = seeds.derive_seed(cfg.seed, seeds.PURPOSE_SCHEDULING, r, i)
            report = run_scheduler(h_hat.entries, replace(scfg, seed=sched_seed), rho_ref)
        for j, snr_db in enumerate(cfg.snr_db):
            t0 = time.perf_counter()
            rho = 10.0 ** (-snr_db / 10.0)
            if cfg.reschedule_per_snr:
                sched_seed = seeds.derive_seed(cfg.seed, seeds.PURPOSE_SCHEDULING, r, i, j)
                report = run_scheduler(h_hat.entries, replace(scfg, seed=sched_seed), rho)
            slots = _slot_lists(report.deployed, h_hat.u_count)
            min_sinr[i, j] = _min_sinr(h_hat.entries, slots, rho)
            evals[i, j] = report.objective_evaluations
            params = LinkParams(es=1.0, n0=rho)
            for slot_idx, (slot, nsym) in enumerate(zip(slots, n_slot_symbols)):
                sim_seed = seeds.derive_seed(cfg.seed, seeds.PURPOSE_NOISE, r, j, slot_idx)
                batch = simulate_slot(
                    h_true.entries[:, slot], h_hat.entries[:, slot], params, qam, nsym, sim_seed
                )
                errors[i, j] += batch.bit_errors
                bits[i, j] += batch.bits_transmitted
            wall[i, j] = time.perf_counter() - t0
    return r, errors, bits, min_sinr, evals, wall


def _detect_refusals(cfg: SweepConfig) -> tuple[bool, ...]:
    if cfg.channel is not None:
        u = cfg.channel.u_count
    else:
        u = load_channel(cfg.channel_files[0]).u_count
    flags = []
    for scfg in cfg.schedulers:
        over = (
            scfg.algorithm == "exhaustive"
            and scfg.cap is not None
            and math.comb(u, u // 2) > scfg.cap
        )
        flags.append(over)
    return tuple(flags)


def run_sweep(cfg: SweepConfig, workers: int = 1) -> SweepResult:
    """Run the full sweep. Results are bit-identical for any workers >= 1.

    Exhaustive cells whose partition count exceeds their cap are recorded as
    refused (BER exported as 'unreached'), never fatal.
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    refused = _detect_refusals(cfg)

    outputs = [None] * cfg.realizations
    if workers == 1 or cfg.realizations == 1:
        for r in range(cfg.realizations):
            outputs[r] = _realization_task(cfg, refused, r)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_realization_task, cfg, refused, r) for r in range(cfg.realizations)]
            for fut in futures:
                out = fut.result()
                outputs[out[0]] = out

    n_sched, n_snr = len(cfg.schedulers), len(cfg.snr_db)
    errors = np.zeros((n_sched, n_snr), dtype=np.int64)
    bits = np.zeros((n_sched, n_snr), dtype=np.int64)
    sinr_sum = np.zeros((n_sched, n_snr))
    eval_sum = np.zeros((n_sched, n_snr), dtype=np.int64)
    wall_sum = np.zeros((n_sched, n_snr))
    records: list[RealizationRecord] = []
    for r in range(cfg.realizations):  # fixed merge order, independent of completion order
        _, e, b, s, v, w = outputs[r]
        errors += e
        bits += b
        sinr_sum += s
        eval_sum += v
        wall_sum += w
        for i, scfg in enumerate(cfg.schedulers):
            if refused[i]:
                continue
            for j, snr_db in enumerate(cfg.snr_db):
                records.append(
                    RealizationRecord(
                        realization=r,
                        scheduler=scfg.algorithm,
                        restarts=scfg.effective_restarts,
                        snr_db=snr_db,
                        bits=int(b[i, j]),
                        bit_errors=int(e[i, j]),
                        min_sinr=float(s[i, j]),
                        obj_evals=int(v[i, j]),
                    )
                )

    cells = []
    for i, scfg in enumerate(cfg.schedulers):
        for j, snr_db in enumerate(cfg.snr_db):
            if refused[i]:
                cells.append(
                    CellStats(
                        scheduler=scfg.algorithm,
                        restarts=scfg.effective_restarts,
                        snr_db=snr_db,
                        ber=None,
                        min_sinr_db=None,
                        obj_evals=None,
                        realizations=cfg.realizations,
                        symbols=cfg.symbols,
                        refused=True,
                    )
                )
                continue
            mean_sinr = sinr_sum[i, j] / cfg.realizations
            cells.append(
                CellStats(
                    scheduler=scfg.algorithm,
                    restarts=scfg.effective_restarts,
                    snr_db=snr_db,
                    ber=float(errors[i, j]) / float(bits[i, j]),
                    min_sinr_db=10.0 * math.log10(mean_sinr),
                    obj_evals=float(eval_sum[i, j]) / cfg.realizations,
                    realizations=cfg.realizations,
                    symbols=cfg.symbols,
                    wall_time_s=float(wall_sum[i, j]),
                )
            )
    return SweepResult(config=cfg, cells=cells, records=records)


# ---------------------------------------------------------------------------
# target-BER interpolation (rule shared verbatim with the plots package)
# ---------------------------------------------------------------------------

def interp_snr_at_target(
    snr_db: Sequence[float], ber: Sequence[float], target_ber: float
) -> tuple[Optional[float], str]:
    """SNR where the BER series first reaches the target, log-linear in BER.

    Rule: find the first grid index i with ber[i] <= target. No such index ->
    (None, note). i == 0 -> the first grid point. ber[i] == 0 -> that grid
    point (log-interpolation undefined at zero). Otherwise interpolate
    between points i-1 and i linearly in log(BER). A series that is not
    non-increasing gets note 'non-monotone-ber'.
    """
    if len(snr_db) != len(ber) or len(snr_db) < 2:
        raise ValueError("need at least two (snr, ber) points")
    if any(b2 <= b1 for b1, b2 in zip(snr_db, snr_db[1:])):
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
            b_hi, b_lo = ber[i - 1], b
            frac = (math.log(b_hi) - math.log(target_ber)) / (math.log(b_hi) - math.log(b_lo))
            return float(snr_db[i - 1] + (snr_db[i] - snr_db[i - 1]) * frac), note
    return None, note


def _cells_of(res: Union[SweepResult, Sequence[CellStats]]) -> Sequence[CellStats]:
    return res.cells if isinstance(res, SweepResult) else res


def snr_at_target(res: Union[SweepResult, Sequence[CellStats]], target_ber: float) -> list[TargetCrossing]:
    """Per (scheduler, K): SNR at which the swept BER crosses target_ber."""
    cells = _cells_of(res)
    groups: dict[tuple[str, int], list[CellStats]] = {}
    order: list[tuple[str, int]] = []
    for c in cells:
        key = (c.scheduler, c.restarts)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(c)
    out = []
    for key in order:
        series = sorted(groups[key], key=lambda c: c.snr_db)
        if any(c.refused for c in series):
            out.append(TargetCrossing(key[0], key[1], None, False, "refused"))
            continue
        snrs = [c.snr_db for c in series]
        bers = [c.ber for c in series]
        snr, note = interp_snr_at_target(snrs, bers, target_ber)
        out.append(TargetCrossing(key[0], key[1], snr, snr is not None, note))
    return out


# ---------------------------------------------------------------------------
# CSV contract
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.12g}"


def export_results(res: Union[SweepResult, Sequence[CellStats]], path: str) -> None:
    """Write the delimited results table (one row per scheduler/K/SNR cell)."""
    with open(path, "w", encoding="ascii", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for c in _cells_of(res):
            writer.writerow(
                [
                    c.scheduler,
                    str(c.restarts),
                    _fmt(c.snr_db),
                    _UNREACHED if c.ber is None else _fmt(c.ber),
                    "nan" if c.min_sinr_db is None else _fmt(c.min_sinr_db),
                    "nan" if c.obj_evals is None else _fmt(c.obj_evals),
                    str(c.realizations),
                    str(c.symbols),
                ]
            )


def load_results(path: str) -> list[CellStats]:
    """Parse a results CSV back into cells (numbers at 12 significant digits)."""
    with open(path, "r", encoding="ascii", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or tuple(header) != CSV_HEADER:
            raise ValueError(f"{path}: bad results header {header!r}")
        cells = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(CSV_HEADER):
                raise ValueError(f"{path}: line {lineno}: expected {len(CSV_HEADER)} columns")
            refused = row[3] == _UNREACHED
            cells.append(
                CellStats(
                    scheduler=row[0],
                    restarts=int(row[1]),
                    snr_db=float(row[2]),
                    ber=None if refused else float(row[3]),
                    min_sinr_db=None if refused else float(row[4]),
                    obj_evals=None if refused else float(row[5]),
                    realizations=int(row[6]),
                    symbols=int(row[7]),
                    refused=refused,
                )
            )
    return cells
