"""Command-line front end: `sweep`, `schedule`, and `count` subcommands.

Config files are strict JSON (unknown keys are rejected, naming the key's
path; parse errors carry line numbers). Exit status: 0 when every requested
cell completed or was explicitly refused by the enumeration cap, 2 for
config/file problems, 1 for unexpected runtime failures.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from typing import Any, Optional

from . import __version__
from .channel import ChannelFormatError, SynthChannelConfig, load_channel
from .scheduling import (
    ALGORITHMS,
    DEFAULT_ENUMERATION_CAP,
    OBJECTIVES,
    EnumerationCapError,
    SchedulerConfig,
    run_scheduler,
)
from .simulator import SweepConfig, export_results, run_sweep

WORKERS_ENV = "LOFI_SCHED_WORKERS"

_CONFIG_DEFAULTS: dict[str, Any] = {
    "seed": 1,
    "realizations": 50,
    "symbols": 10000,
    "snr_db": [0, 5, 10, 15, 20, 25, 30],
    "dynamic_range_db": 6.0,
    "estimation_error_variance": 0.0,
    "schedule_snr_db": None,
    "reschedule_per_snr": False,
    "exhaustive_cap": DEFAULT_ENUMERATION_CAP,
}
_SYNTH_KEYS = {"kind", "b", "u_count", "num_paths", "los_k_factor_db", "angle_spread"}
_FILES_KEYS = {"kind", "paths"}
_SCHEDULER_KEYS = {"algorithm", "restarts", "objective"}


class ConfigError(ValueError):
    """Configuration problem; maps to exit code 2."""


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def _as_number(value: Any, path: str) -> float:
    _require(isinstance(value, (int, float)) and not isinstance(value, bool), f"{path}: expected a number")
    return float(value)


def _as_int(value: Any, path: str) -> int:
    _require(isinstance(value, int) and not isinstance(value, bool), f"{path}: expected an integer")
    return value


def _check_keys(obj: dict, allowed: set[str], path: str) -> None:
    for key in obj:
        _require(key in allowed, f"unknown key {path}{key!r} (allowed: {sorted(allowed)})")


def parse_sweep_config(doc: dict[str, Any], base_dir: str) -> tuple[SweepConfig, dict[str, Any]]:
    """Validate a config document; returns (SweepConfig, fully-resolved dict).

    The resolved dict has every default filled in and file paths resolved, and
    round-trips: feeding it back through this function reproduces the sweep.
    """
    _require(isinstance(doc, dict), "top level: expected an object")
    allowed = set(_CONFIG_DEFAULTS) | {"channel", "schedulers"}
    _check_keys(doc, allowed, "")
    merged = dict(_CONFIG_DEFAULTS)
    merged.update(doc)
    _require("channel" in merged, "missing required key 'channel'")
    _require("schedulers" in merged, "missing required key 'schedulers'")

    ch = merged["channel"]
    _require(isinstance(ch, dict), "channel: expected an object")
    kind = ch.get("kind")
    _require(kind in ("synthetic", "files"), "channel.kind: expected 'synthetic' or 'files'")
    synth = None
    files: Optional[tuple[str, ...]] = None
    if kind == "synthetic":
        _check_keys(ch, _SYNTH_KEYS, "channel.")
        for key in ("b", "u_count", "num_paths", "los_k_factor_db", "angle_spread"):
            _require(key in ch, f"channel.{key}: missing")
        try:
            synth = SynthChannelConfig(
                b=_as_int(ch["b"], "channel.b"),
                u_count=_as_int(ch["u_count"], "channel.u_count"),
                num_paths=_as_int(ch["num_paths"], "channel.num_paths"),
                los_k_factor_db=_as_number(ch["los_k_factor_db"], "channel.los_k_factor_db"),
                angle_spread=_as_number(ch["angle_spread"], "channel.angle_spread"),
                seed=0,  # per-realization seeds come from the master seed
            )
        except ValueError as exc:
            raise ConfigError(f"channel: {exc}") from None
        resolved_channel: dict[str, Any] = {
            "kind": "synthetic",
            "b": synth.b,
            "u_count": synth.u_count,
            "num_paths": synth.num_paths,
            "los_k_factor_db": synth.los_k_factor_db,
            "angle_spread": synth.angle_spread,
        }
    else:
        _check_keys(ch, _FILES_KEYS, "channel.")
        paths = ch.get("paths")
        _require(isinstance(paths, list) and paths, "channel.paths: expected a non-empty list")
        _require(all(isinstance(p, str) for p in paths), "channel.paths: expected strings")
        files = tuple(os.path.normpath(os.path.join(base_dir, p)) for p in paths)
        resolved_channel = {"kind": "files", "paths": list(files)}

    scheds = merged["schedulers"]
    _require(isinstance(scheds, list) and scheds, "schedulers: expected a non-empty list")
    cap = _as_int(merged["exhaustive_cap"], "exhaustive_cap")
    parsed_scheds = []
    resolved_scheds = []
    for idx, entry in enumerate(scheds):
        path = f"schedulers[{idx}]"
        _require(isinstance(entry, dict), f"{path}: expected an object")
        _check_keys(entry, _SCHEDULER_KEYS, path + ".")
        _require("algorithm" in entry, f"{path}.algorithm: missing")
        algorithm = entry["algorithm"]
        _require(algorithm in ALGORITHMS, f"{path}.algorithm: unknown {algorithm!r} (expected one of {list(ALGORITHMS)})")
        restarts = _as_int(entry.get("restarts", 1), f"{path}.restarts")
        objective = entry.get("objective", "min-sinr")
        _require(objective in OBJECTIVES, f"{path}.objective: unknown {objective!r} (expected one of {list(OBJECTIVES)})")
        try:
            scfg = SchedulerConfig(algorithm=algorithm, restarts=restarts, objective=objective, cap=cap)
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        parsed_scheds.append(scfg)
        resolved_scheds.append(
            {"algorithm": algorithm, "restarts": scfg.effective_restarts, "objective": objective}
        )

    schedule_snr = merged["schedule_snr_db"]
    if schedule_snr is not None:
        schedule_snr = _as_number(schedule_snr, "schedule_snr_db")
    _require(isinstance(merged["reschedule_per_snr"], bool), "reschedule_per_snr: expected a boolean")
    snr_grid = merged["snr_db"]
    _require(isinstance(snr_grid, list) and snr_grid, "snr_db: expected a non-empty list")
    snr_db = tuple(_as_number(x, f"snr_db[{i}]") for i, x in enumerate(snr_grid))

    try:
        cfg = SweepConfig(
            snr_db=snr_db,
            schedulers=tuple(parsed_scheds),
            symbols=_as_int(merged["symbols"], "symbols"),
            realizations=_as_int(merged["realizations"], "realizations"),
            seed=_as_int(merged["seed"], "seed"),
            dynamic_range_db=_as_number(merged["dynamic_range_db"], "dynamic_range_db"),
            estimation_error_variance=_as_number(
                merged["estimation_error_variance"], "estimation_error_variance"
            ),
            channel=synth,
            channel_files=files,
            schedule_snr_db=schedule_snr,
            reschedule_per_snr=merged["reschedule_per_snr"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    resolved = {
        "seed": cfg.seed,
        "realizations": cfg.realizations,
        "symbols": cfg.symbols,
        "snr_db": list(cfg.snr_db),
        "dynamic_range_db": cfg.dynamic_range_db,
        "estimation_error_variance": cfg.estimation_error_variance,
        "channel": resolved_channel,
        "schedulers": resolved_scheds,
        "schedule_snr_db": cfg.schedule_snr_db,
        "reschedule_per_snr": cfg.reschedule_per_snr,
        "exhaustive_cap": cap,
    }
    return cfg, resolved


def _load_config_file(path: str) -> tuple[SweepConfig, dict[str, Any]]:
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    return parse_sweep_config(doc, os.path.dirname(os.path.abspath(path)))


def _resolve_workers(flag: Optional[int]) -> int:
    if flag is not None:
        return flag
    env = os.environ.get(WORKERS_ENV)
    if env is not None:
        try:
            value = int(env)
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV}: expected an integer, got {env!r}") from None
        return value
    return 1


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _cmd_sweep(args: argparse.Namespace) -> int:
    cfg, resolved = _load_config_file(args.config)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
        resolved["seed"] = args.seed
    workers = _resolve_workers(args.workers)
    if workers < 1:
        raise ConfigError("workers must be >= 1")
    os.makedirs(args.out, exist_ok=True)
    result = run_sweep(cfg, workers=workers)
    csv_path = os.path.join(args.out, "results.csv")
    export_results(result, csv_path)
    manifest = {"artifact": "lofi-sched", "version": __version__, "config": resolved}
    manifest_path = os.path.join(args.out, "manifest.json")
    with open(manifest_path, "w", encoding="utf-8") as f:
        f.write(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    refused = sorted({(c.scheduler, c.restarts) for c in result.cells if c.refused})
    for scheduler, restarts in refused:
        print(f"note: {scheduler} (K={restarts}) refused by enumeration cap; BER exported as unreached")
    print(f"wrote {csv_path} ({len(result.cells)} cells, {cfg.realizations} realizations)")
    print(f"wrote {manifest_path}")
    return 0


def _cmd_schedule(args: argparse.Namespace) -> int:
    if not os.path.exists(args.channel):
        raise ConfigError(f"channel file not found: {args.channel}")
    try:
        h = load_channel(args.channel)
    except ChannelFormatError as exc:
        raise ConfigError(str(exc)) from None
    try:
        cfg = SchedulerConfig(
            algorithm=args.algorithm,
            restarts=args.restarts,
            objective=args.objective,
            seed=args.seed if args.seed is not None else 0,
            cap=args.cap,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    rho = 10.0 ** (-args.snr_db / 10.0)
    try:
        report = run_scheduler(h.entries, cfg, rho)
    except EnumerationCapError as exc:
        print(str(exc))
        return 0  # explicit refusal is a completed request
    if report.deployed is not None:
        print(report.deployed.serialize())
    else:
        print("deployed=none (every UE transmits in both slots)")
    print(f"objective={_fmt(report.objective_value)}")
    sinr_db = ",".join(_fmt(10.0 * math.log10(s)) for s in report.per_ue_sinr)
    print(f"sinr_db={sinr_db}")
    print(f"evaluations={report.objective_evaluations}")
    return 0


def _cmd_count(args: argparse.Namespace) -> int:
    u = args.u_count
    if u < 2 or u % 2 != 0:
        raise ConfigError(f"U must be even and >= 2, got {u}")
    print(math.comb(u, u // 2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lofi-sched",
        description="Two-slot multiuser MIMO uplink scheduling simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="run a Monte Carlo sweep from a JSON config")
    p_sweep.add_argument("--config", required=True, help="JSON sweep configuration")
    p_sweep.add_argument("--out", required=True, help="output directory (results.csv + manifest.json)")
    p_sweep.add_argument("--workers", type=int, default=None, help=f"process count (default: ${WORKERS_ENV} or 1)")
    p_sweep.add_argument("--seed", type=int, default=None, help="override the config master seed")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_sched = sub.add_parser("schedule", help="schedule one channel file and print the result")
    p_sched.add_argument("channel", help="channel matrix file")
    p_sched.add_argument("--algorithm", required=True, choices=ALGORITHMS)
    p_sched.add_argument("--restarts", type=int, default=1, help="K, for lofi / lofi-pp")
    p_sched.add_argument("--objective", choices=OBJECTIVES, default="min-sinr")
    p_sched.add_argument("--seed", type=int, default=None)
    p_sched.add_argument("--snr-db", type=float, default=20.0, help="operating Es/N0 in dB")
    p_sched.add_argument("--cap", type=int, default=DEFAULT_ENUMERATION_CAP, help="exhaustive enumeration cap")
    p_sched.set_defaults(func=_cmd_schedule)

    p_count = sub.add_parser("count", help="print the exhaustive partition count C(U, U/2)")
    p_count.add_argument("u_count", type=int)
    p_count.set_defaults(func=_cmd_count)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ChannelFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - last-resort CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())
