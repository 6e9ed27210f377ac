"""End-to-end tests for the plots CLI against a real simulator run.

The fixture drives the simulator's own CLI to produce a results CSV, so
these tests cover the full handoff between the two packages: the only
thing they share is that file. The simulator package is imported here
only to cross-check the interpolation convention, never by the plotting
code itself.
"""

import hashlib
import json
import shutil
import subprocess
import sys

import pytest

from lofi_plots import load_results, make_ber_figure, make_tradeoff_figure, series_keys

PRIMARY = [sys.executable, "-m", "lofi_sched"]
PLOTS = [sys.executable, "-m", "lofi_plots.cli"]

SWEEP_CONFIG = {
    "seed": 11,
    "realizations": 4,
    "symbols": 2000,
    "snr_db": [0, 10, 20, 30],
    "channel": {
        "kind": "synthetic",
        "b": 8,
        "u_count": 8,
        "num_paths": 2,
        "los_k_factor_db": 8.0,
        "angle_spread": 0.5,
    },
    "schedulers": [
        {"algorithm": "none"},
        {"algorithm": "random"},
        {"algorithm": "lofi", "restarts": 2},
        {"algorithm": "lofi-pp", "restarts": 3},
    ],
}

ALL_LABELS = ["none", "random", "lofi (K=2)", "lofi-pp (K=3)"]


def run_plots(*args):
    return subprocess.run(PLOTS + list(args), capture_output=True, text=True)


@pytest.fixture(scope="module")
def sweep_csv(tmp_path_factory):
    root = tmp_path_factory.mktemp("plotsrun")
    cfg = root / "u8.json"
    cfg.write_text(json.dumps(SWEEP_CONFIG, indent=2) + "\n")
    out_dir = root / "run"
    proc = subprocess.run(
        PRIMARY + ["sweep", "--config", str(cfg), "--out", str(out_dir)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    return out_dir / "results.csv"


def test_fixture_csv_loads_with_the_expected_series(sweep_csv):
    rows = load_results(sweep_csv)
    assert len(rows) == 16
    assert series_keys(rows) == [("none", 1), ("random", 1), ("lofi", 2), ("lofi-pp", 3)]
    assert all(not r.refused for r in rows)


def test_ber_command_renders_a_png_with_every_series_in_the_legend(sweep_csv, tmp_path):
    out = tmp_path / "ber.png"
    proc = run_plots("ber", "--csv", str(sweep_csv), "--out", str(out))
    assert proc.returncode == 0, proc.stderr
    assert f"wrote {out} (4 series)" in proc.stdout
    assert out.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    fig, curves, notes = make_ber_figure(load_results(sweep_csv))
    import matplotlib.pyplot as plt

    try:
        assert notes == []
        assert [c.label for c in curves] == ALL_LABELS
        legend = fig.axes[0].get_legend()
        assert [t.get_text() for t in legend.get_texts()] == ALL_LABELS
    finally:
        plt.close(fig)


def test_tradeoff_costs_are_exactly_two_evaluations_per_restart(sweep_csv, tmp_path):
    out = tmp_path / "tradeoff.png"
    proc = run_plots("tradeoff", "--csv", str(sweep_csv), "--out", str(out), "--target-ber", "0.01")
    assert proc.returncode == 0, proc.stderr
    assert out.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    # the all-UEs baseline never dips below 1e-2 in this run; it must be
    # skipped with a note, not silently dropped
    assert "never reaches" in proc.stderr and "none" in proc.stderr

    _, points, _ = make_tradeoff_figure(load_results(sweep_csv), 0.01)
    by_label = {p.label: p for p in points}
    assert set(by_label) == {"random", "lofi (K=2)", "lofi-pp (K=3)"}
    assert by_label["random"].obj_evals == 1.0
    assert by_label["lofi (K=2)"].obj_evals == 4.0
    assert by_label["lofi-pp (K=3)"].obj_evals == 6.0


def test_tradeoff_crossings_match_the_simulators_own_rule(sweep_csv):
    from lofi_sched.simulator import interp_snr_at_target as producer_interp

    rows = load_results(sweep_csv)
    _, points, _ = make_tradeoff_figure(rows, 0.01)
    assert len(points) == 3
    for pt in points:
        picked = sorted(
            (r for r in rows if (r.scheduler, r.restarts) == (pt.scheduler, pt.restarts)),
            key=lambda r: r.snr_db,
        )
        expected, _ = producer_interp(
            [r.snr_db for r in picked], [r.ber for r in picked], 0.01
        )
        assert expected is not None
        assert abs(pt.snr_db_at_target - expected) <= 1e-6


def test_plotting_leaves_the_results_file_untouched(sweep_csv, tmp_path):
    before = hashlib.sha256(sweep_csv.read_bytes()).hexdigest()
    run_plots("ber", "--csv", str(sweep_csv), "--out", str(tmp_path / "a.png"))
    run_plots(
        "tradeoff", "--csv", str(sweep_csv), "--out", str(tmp_path / "b.png"),
        "--target-ber", "0.01",
    )
    after = hashlib.sha256(sweep_csv.read_bytes()).hexdigest()
    assert after == before


def test_only_filter_warns_on_unknown_names_but_still_plots(sweep_csv, tmp_path):
    out = tmp_path / "ber.png"
    proc = run_plots("ber", "--csv", str(sweep_csv), "--out", str(out), "--only", "lofi,bogus")
    assert proc.returncode == 0
    assert "bogus" in proc.stderr
    assert "(1 series)" in proc.stdout


def test_only_filter_with_no_known_names_is_fatal(sweep_csv, tmp_path):
    proc = run_plots(
        "ber", "--csv", str(sweep_csv), "--out", str(tmp_path / "x.png"), "--only", "bogus"
    )
    assert proc.returncode == 1
    assert "no plottable series" in proc.stderr
    assert not (tmp_path / "x.png").exists()


def test_unreachable_target_is_fatal(sweep_csv, tmp_path):
    # lofi and lofi-pp measure an exact-zero BER at the top of this run, and
    # a zero-BER point crosses every positive target, so only the series
    # with a nonzero floor can demonstrate the no-crossing failure
    proc = run_plots(
        "tradeoff", "--csv", str(sweep_csv), "--out", str(tmp_path / "x.png"),
        "--target-ber", "1e-12", "--only", "none,random",
    )
    assert proc.returncode == 1
    assert "reaches" in proc.stderr
    assert not (tmp_path / "x.png").exists()


def test_nonpositive_target_is_a_usage_error(sweep_csv, tmp_path):
    proc = run_plots(
        "tradeoff", "--csv", str(sweep_csv), "--out", str(tmp_path / "x.png"),
        "--target-ber", "0",
    )
    assert proc.returncode == 2
    assert "--target-ber" in proc.stderr


def test_missing_results_file_exits_two(tmp_path):
    proc = run_plots("ber", "--csv", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "x.png"))
    assert proc.returncode == 2
    assert "not found" in proc.stderr


def test_malformed_results_file_exits_two(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("scheduler,K\nrandom,1\n")
    proc = run_plots("ber", "--csv", str(bad), "--out", str(tmp_path / "x.png"))
    assert proc.returncode == 2
    assert "bad header" in proc.stderr


def test_console_script_is_installed():
    exe = shutil.which("plots")
    assert exe is not None
    proc = subprocess.run([exe, "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "tradeoff" in proc.stdout
