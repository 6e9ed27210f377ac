"""Two-slot UE schedulers: LoFi, LoFi++, and the baseline policies.

A schedule splits the U UEs into two equal-size uplink slots. Quality is
judged by an objective evaluated on the estimated channel at a given
N0/Es: `min-sinr` (smallest post-equalization SINR across all U UEs, larger
is better) or `sum-mse` (negated total LMMSE symbol MSE, again larger is
better, so every scheduler is an argmax).

The randomized schedulers draw candidate schedules from substreams indexed
by (seed, candidate ordinal). Because the ordinal indexes the substream, the
candidate list for K restarts is a prefix of the list for K+1 restarts, which
makes deployed quality monotone in K for a fixed seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

import numpy as np

from .detection import lmmse_matrix, post_eq_sinr

__all__ = [
    "Schedule",
    "SchedulerConfig",
    "SchedulerReport",
    "EnumerationCapError",
    "DEFAULT_ENUMERATION_CAP",
    "ALGORITHMS",
    "OBJECTIVES",
    "random_schedule",
    "evaluate_schedule",
    "worst_ue_swap",
    "lofi",
    "lofi_pp",
    "random_baseline",
    "exhaustive",
    "greedy_mse",
    "no_scheduling_reference",
    "run_scheduler",
]

ALGORITHMS = ("lofi", "lofi-pp", "random", "greedy-mse", "exhaustive", "none")
OBJECTIVES = ("min-sinr", "sum-mse")
# `none` serves everyone at once instead of partitioning; `random` deploys a
# single unchecked draw. Neither takes restarts.
_SINGLE_SHOT = ("random", "greedy-mse", "exhaustive", "none")
DEFAULT_ENUMERATION_CAP = 20000


class EnumerationCapError(RuntimeError):
    """Exhaustive search refused: the partition count exceeds the cap."""

    def __init__(self, count: int, cap: int):
        super().__init__(
            f"exhaustive search refused: {count} slot-1 subsets exceed the cap of {cap}"
        )
        self.count = count
        self.cap = cap


@dataclass(frozen=True)
class Schedule:
    """Equal-size two-slot partition of UEs {0..U-1}; slots stored ascending."""

    slot1: tuple[int, ...]
    slot2: tuple[int, ...]

    def __post_init__(self) -> None:
        s1 = tuple(sorted(int(i) for i in self.slot1))
        s2 = tuple(sorted(int(i) for i in self.slot2))
        object.__setattr__(self, "slot1", s1)
        object.__setattr__(self, "slot2", s2)
        if len(s1) != len(s2):
            raise ValueError(f"slots must have equal size, got {len(s1)} and {len(s2)}")
        if not s1:
            raise ValueError("slots must be non-empty")
        u = len(s1) + len(s2)
        if set(s1) | set(s2) != set(range(u)) or len(set(s1) | set(s2)) != u:
            raise ValueError("slots must partition the UE index range exactly once each")

    @property
    def u_count(self) -> int:
        return len(self.slot1) + len(self.slot2)

    @property
    def slots(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return (self.slot1, self.slot2)

    def canonical_key(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Slot-order-free key (the slot holding UE 0 listed first); for dedup only."""
        return (self.slot1, self.slot2) if 0 in self.slot1 else (self.slot2, self.slot1)

    def serialize(self) -> str:
        """One-line form with ascending 1-based indices."""
        a = ",".join(str(i + 1) for i in self.slot1)
        b = ",".join(str(i + 1) for i in self.slot2)
        return f"slot1={a};slot2={b}"

    @staticmethod
    def parse(line: str) -> "Schedule":
        line = line.strip()
        try:
            part1, part2 = line.split(";")
            if not part1.startswith("slot1=") or not part2.startswith("slot2="):
                raise ValueError
            s1 = [int(t) - 1 for t in part1[len("slot1="):].split(",")]
            s2 = [int(t) - 1 for t in part2[len("slot2="):].split(",")]
        except ValueError:
            raise ValueError(f"bad schedule line {line!r}") from None
        return Schedule(tuple(s1), tuple(s2))


@dataclass(frozen=True)
class SchedulerConfig:
    """Which scheduler to run and how.

    restarts (K) only matters for lofi / lofi-pp; the single-shot algorithms
    force it to 1. `cap` bounds the exhaustive enumeration. `seed` feeds the
    candidate substreams of the randomized algorithms.
    """

    algorithm: str
    restarts: int = 1
    objective: str = "min-sinr"
    seed: int = 0
    cap: Optional[int] = DEFAULT_ENUMERATION_CAP

    def __post_init__(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}, expected one of {ALGORITHMS}")
        if self.objective not in OBJECTIVES:
            raise ValueError(f"unknown objective {self.objective!r}, expected one of {OBJECTIVES}")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if self.cap is not None and self.cap < 1:
            raise ValueError("cap must be >= 1 or None")

    @property
    def effective_restarts(self) -> int:
        return 1 if self.algorithm in _SINGLE_SHOT else self.restarts


@dataclass
class SchedulerReport:
    """What a scheduler deployed and what it looked at on the way.

    candidates holds the (schedule, value) pairs actually scored against the
    configured objective, in evaluation order. For the candidate-based
    schedulers objective_evaluations == len(candidates) and objective_value is
    their max; greedy-mse instead counts its per-candidate-UE trial probes (its
    log holds the single constructed schedule). `none` deploys no partition:
    deployed is None and the log is empty.
    """

    algorithm: str
    restarts: int
    objective: str
    deployed: Optional[Schedule]
    objective_value: float
    objective_evaluations: int
    per_ue_sinr: np.ndarray
    candidates: list[tuple[Optional[Schedule], float]] = field(default_factory=list)


def random_schedule(u_count: int, rng: np.random.Generator) -> Schedule:
    """Uniform draw over all C(U, U/2) slot-1 subsets."""
    if u_count < 2 or u_count % 2 != 0:
        raise ValueError("u_count must be even and >= 2")
    perm = rng.permutation(u_count)
    half = u_count // 2
    return Schedule(tuple(perm[:half]), tuple(perm[half:]))


def _slot_sinr(h_slot: np.ndarray, n0_over_es: float) -> np.ndarray:
    return post_eq_sinr(h_slot, lmmse_matrix(h_slot, n0_over_es), n0_over_es)


def _slot_mse_sum(h_slot: np.ndarray, n0_over_es: float) -> float:
    # total LMMSE symbol MSE of the slot, in units of Es:
    # sum of diag(rho * (HᴴH + rho I)^-1)
    m = h_slot.shape[1]
    gram = h_slot.conj().T @ h_slot
    gram[np.diag_indices(m)] += n0_over_es
    inv = np.linalg.inv(gram)
    return float(n0_over_es * np.sum(inv.diagonal().real))


def evaluate_schedule(
    h_hat: np.ndarray, schedule: Schedule, objective: str, n0_over_es: float
) -> tuple[float, np.ndarray]:
    """Score a schedule on the estimated channel; returns (value, per-UE SINR).

    min-sinr: value is the smallest per-UE SINR across both slots.
    sum-mse: value is the negated total per-UE LMMSE symbol MSE (units of Es),
    so that bigger is better for either objective. The per-UE SINR vector
    (indexed by UE, each computed within its slot) is returned either way.
    """
    h = np.asarray(h_hat, dtype=np.complex128)
    if objective not in OBJECTIVES:
        raise ValueError(f"unknown objective {objective!r}")
    if schedule.u_count != h.shape[1]:
        raise ValueError(
            f"schedule covers {schedule.u_count} UEs but channel has {h.shape[1]} columns"
        )
    sinr = np.empty(h.shape[1])
    mse_total = 0.0
    for slot in schedule.slots:
        sub = h[:, slot]
        sinr[list(slot)] = _slot_sinr(sub, n0_over_es)
        if objective == "sum-mse":
            mse_total += _slot_mse_sum(sub, n0_over_es)
    value = float(np.min(sinr)) if objective == "min-sinr" else -mse_total
    return value, sinr


def worst_ue_swap(schedule: Schedule, per_ue_sinr: np.ndarray) -> Schedule:
    """Exchange the lowest-SINR UE of each slot (ties to the lowest UE index)."""
    sinr = np.asarray(per_ue_sinr, dtype=float)
    if sinr.shape != (schedule.u_count,):
        raise ValueError("per_ue_sinr must have one entry per UE")

    def worst(slot: tuple[int, ...]) -> int:
        # slot is ascending, so the first minimum is the lowest index
        return slot[int(np.argmin(sinr[list(slot)]))]

    w1, w2 = worst(schedule.slot1), worst(schedule.slot2)
    new1 = tuple(u for u in schedule.slot1 if u != w1) + (w2,)
    new2 = tuple(u for u in schedule.slot2 if u != w2) + (w1,)
    return Schedule(new1, new2)


def _candidate_rng(seed: int, ordinal: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(ordinal,)))


def _deploy_argmax(
    cfg: SchedulerConfig, candidates: list[tuple[Schedule, float, np.ndarray]]
) -> SchedulerReport:
    best = 0
    for i in range(1, len(candidates)):
        if candidates[i][1] > candidates[best][1]:
            best = i
    sched, value, sinr = candidates[best]
    return SchedulerReport(
        algorithm=cfg.algorithm,
        restarts=cfg.effective_restarts,
        objective=cfg.objective,
        deployed=sched,
        objective_value=value,
        objective_evaluations=len(candidates),
        per_ue_sinr=sinr,
        candidates=[(s, v) for s, v, _ in candidates],
    )


def lofi(h_hat: np.ndarray, cfg: SchedulerConfig, n0_over_es: float) -> SchedulerReport:
    """Guess-and-check: draw 2K random schedules, score each once, deploy the best.

    All 2K candidate draws and evaluations are mutually independent (nothing
    feeds back), so a parallel deployment can run every substream at once.
    Ties deploy the earliest candidate.
    """
    u = np.asarray(h_hat).shape[1]
    scored = []
    for ordinal in range(2 * cfg.restarts):
        s = random_schedule(u, _candidate_rng(cfg.seed, ordinal))
        value, sinr = evaluate_schedule(h_hat, s, cfg.objective, n0_over_es)
        scored.append((s, value, sinr))
    return _deploy_argmax(cfg, scored)


def lofi_pp(h_hat: np.ndarray, cfg: SchedulerConfig, n0_over_es: float) -> SchedulerReport:
    """LoFi with one guided retry per restart.

    Restart k draws a random schedule, scores it, then builds a second
    candidate by swapping the worst UE of each slot (judged by per-UE SINR)
    and scores that too: 2K evaluations total, deploy the argmax. The retry
    depends on its restart's first evaluation, so at most K of the 2K
    evaluations can run concurrently.
    """
    u = np.asarray(h_hat).shape[1]
    scored = []
    for k in range(cfg.restarts):
        s = random_schedule(u, _candidate_rng(cfg.seed, k))
        value, sinr = evaluate_schedule(h_hat, s, cfg.objective, n0_over_es)
        scored.append((s, value, sinr))
        retry = worst_ue_swap(s, sinr)
        r_value, r_sinr = evaluate_schedule(h_hat, retry, cfg.objective, n0_over_es)
        scored.append((retry, r_value, r_sinr))
    return _deploy_argmax(cfg, scored)


def random_baseline(h_hat: np.ndarray, cfg: SchedulerConfig, n0_over_es: float) -> SchedulerReport:
    """Deploy a single unchecked random draw (scored once, for reporting)."""
    u = np.asarray(h_hat).shape[1]
    s = random_schedule(u, _candidate_rng(cfg.seed, 0))
    value, sinr = evaluate_schedule(h_hat, s, cfg.objective, n0_over_es)
    return _deploy_argmax(cfg, [(s, value, sinr)])


def exhaustive(
    h_hat: np.ndarray,
    objective: str,
    n0_over_es: float,
    cap: Optional[int] = DEFAULT_ENUMERATION_CAP,
) -> SchedulerReport:
    """Score every slot-1 subset in lexicographic order; deploy the first argmax.

    Refuses with EnumerationCapError when C(U, U/2) exceeds `cap`.
    """
    u = np.asarray(h_hat).shape[1]
    if u < 2 or u % 2 != 0:
        raise ValueError("channel must have an even number of UE columns >= 2")
    count = math.comb(u, u // 2)
    if cap is not None and count > cap:
        raise EnumerationCapError(count, cap)
    cfg = SchedulerConfig(algorithm="exhaustive", objective=objective, cap=cap)
    scored = []
    everyone = set(range(u))
    for subset in combinations(range(u), u // 2):
        s = Schedule(subset, tuple(everyone - set(subset)))
        value, sinr = evaluate_schedule(h_hat, s, objective, n0_over_es)
        scored.append((s, value, sinr))
    return _deploy_argmax(cfg, scored)


def greedy_mse(
    h_hat: np.ndarray, n0_over_es: float, objective: str = "sum-mse"
) -> SchedulerReport:
    """Grow slot 1 one UE at a time, each round keeping the addition with the
    smallest slot-1 total MSE; the remainder forms slot 2.

    Deterministic (ties to the lowest UE index). The first round degenerates
    to picking the largest-norm UE, since a single-UE slot's MSE is
    rho/(||h||^2 + rho). objective_evaluations counts one per candidate-UE
    trial: U/2 rounds over the remaining candidates, e.g. 8+7+6+5 = 26 for
    U=8. The deployed schedule is then scored once against `objective` for
    the report.
    """
    h = np.asarray(h_hat, dtype=np.complex128)
    u = h.shape[1]
    if u < 2 or u % 2 != 0:
        raise ValueError("channel must have an even number of UE columns >= 2")
    chosen: list[int] = []
    trials = 0
    for _ in range(u // 2):
        best_ue, best_mse = -1, math.inf
        for cand in range(u):
            if cand in chosen:
                continue
            trial = chosen + [cand]
            mse = _slot_mse_sum(h[:, trial], n0_over_es)
            trials += 1
            if mse < best_mse:
                best_ue, best_mse = cand, mse
        chosen.append(best_ue)
    slot1 = tuple(sorted(chosen))
    slot2 = tuple(sorted(set(range(u)) - set(chosen)))
    deployed = Schedule(slot1, slot2)
    value, sinr = evaluate_schedule(h, deployed, objective, n0_over_es)
    return SchedulerReport(
        algorithm="greedy-mse",
        restarts=1,
        objective=objective,
        deployed=deployed,
        objective_value=value,
        objective_evaluations=trials,
        per_ue_sinr=sinr,
        candidates=[(deployed, value)],
    )


def no_scheduling_reference(h_hat: np.ndarray, n0_over_es: float) -> np.ndarray:
    """Per-UE SINR when every UE transmits in the same slot (B x U, regularizer I_U)."""
    return _slot_sinr(np.asarray(h_hat, dtype=np.complex128), n0_over_es)


def _none_report(h_hat: np.ndarray, cfg: SchedulerConfig, n0_over_es: float) -> SchedulerReport:
    h = np.asarray(h_hat, dtype=np.complex128)
    sinr = no_scheduling_reference(h, n0_over_es)
    if cfg.objective == "sum-mse":
        value = -_slot_mse_sum(h, n0_over_es)
    else:
        value = float(np.min(sinr))
    return SchedulerReport(
        algorithm="none",
        restarts=1,
        objective=cfg.objective,
        deployed=None,
        objective_value=value,
        objective_evaluations=1,
        per_ue_sinr=sinr,
        candidates=[],
    )


def run_scheduler(h_hat: np.ndarray, cfg: SchedulerConfig, n0_over_es: float) -> SchedulerReport:
    """Dispatch on cfg.algorithm. May raise EnumerationCapError (exhaustive only)."""
    if cfg.algorithm == "lofi":
        return lofi(h_hat, cfg, n0_over_es)
    if cfg.algorithm == "lofi-pp":
        return lofi_pp(h_hat, cfg, n0_over_es)
    if cfg.algorithm == "random":
        return random_baseline(h_hat, cfg, n0_over_es)
    if cfg.algorithm == "greedy-mse":
        return greedy_mse(h_hat, n0_over_es, cfg.objective)
    if cfg.algorithm == "exhaustive":
        return exhaustive(h_hat, cfg.objective, n0_over_es, cfg.cap)
    if cfg.algorithm == "none":
        return _none_report(h_hat, cfg, n0_over_es)
    raise ValueError(f"unknown algorithm {cfg.algorithm!r}")
