import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from bbeq_plots import CurveGroup, discover_groups, plot_nashconv, plot_strategy
from bbeq_plots.cli import main

METRICS_COLUMNS = [
    "run_id", "epoch", "player", "utility", "best_response", "gap", "nashconv", "seed",
]


def write_run(run_dir: Path, noise_dim: int, nashconv_by_epoch, seed=0):
    """Synthesize one run directory following the documented artifact schema."""
    run_dir.mkdir(parents=True)
    with open(run_dir / "metrics.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(METRICS_COLUMNS)
        for epoch, nc in enumerate(nashconv_by_epoch):
            for player in (0, 1):
                w.writerow(["run", epoch, player, 0.1, 0.2, nc / 2, nc, seed])
    (run_dir / "config.json").write_text(json.dumps({"policy": {"noise_dim": noise_dim}}))


def synthetic_sweep(root: Path):
    rng = np.random.default_rng(0)
    for trial in range(4):
        # 0-dim runs plateau high; 2-dim runs decay low
        high = 0.8 + 0.05 * rng.standard_normal(6).cumsum() * 0.1
        low = 0.8 * np.exp(-0.8 * np.arange(6)) + 0.02
        write_run(root / f"noise0_trial{trial}", 0, np.abs(high))
        write_run(root / f"noise2_trial{trial}", 2, low + 0.01 * trial)
    return root


def test_discover_groups_and_labels(tmp_path):
    synthetic_sweep(tmp_path)
    groups = discover_groups(tmp_path)
    assert [g.label for g in groups] == ["0-dim noise", "2-dim noise"]
    assert all(len(g.series) == 4 for g in groups)


def test_mismatched_epoch_axes_rejected(tmp_path):
    write_run(tmp_path / "a", 0, [0.5, 0.4])
    write_run(tmp_path / "b", 0, [0.5, 0.4, 0.3])
    with pytest.raises(ValueError):
        discover_groups(tmp_path)


def test_plot_nashconv_writes_figure(tmp_path):
    synthetic_sweep(tmp_path / "sweep")
    groups = discover_groups(tmp_path / "sweep")
    out = plot_nashconv(groups, tmp_path / "fig" / "nashconv.png", n_boot=500)
    assert out.exists() and out.stat().st_size > 0


def test_zero_dim_plateaus_above_two_dim(tmp_path):
    synthetic_sweep(tmp_path / "sweep")
    groups = {g.label: g for g in discover_groups(tmp_path / "sweep")}
    final_high = np.mean([s[-1] for s in groups["0-dim noise"].series])
    final_low = np.mean([s[-1] for s in groups["2-dim noise"].series])
    assert final_high > 2 * final_low


def test_single_trial_band_collapses(tmp_path):
    write_run(tmp_path / "solo", 1, [0.5, 0.3, 0.2])
    groups = discover_groups(tmp_path)
    out = plot_nashconv(groups, tmp_path / "fig.png", n_boot=200)
    assert out.exists()


def test_rerendering_is_byte_identical(tmp_path):
    synthetic_sweep(tmp_path / "sweep")
    groups = discover_groups(tmp_path / "sweep")
    a = plot_nashconv(groups, tmp_path / "a.png", n_boot=300, seed=4)
    b = plot_nashconv(groups, tmp_path / "b.png", n_boot=300, seed=4)
    assert a.read_bytes() == b.read_bytes()


def write_strategy_csv(path, obs, actions):
    header = [f"obs_{k}" for k in range(obs.shape[1])] + [
        f"action_{k}" for k in range(actions.shape[1])
    ]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in np.concatenate([obs, actions], axis=1):
            w.writerow([repr(float(v)) for v in row])


def test_plot_strategy_all_kinds(tmp_path):
    rng = np.random.default_rng(1)
    n = 500
    cases = {
        "blotto": (np.zeros((n, 0)), rng.dirichlet([1, 1, 1], size=n)),
        "chopstick": (np.zeros((n, 0)), rng.random((n, 3)) / 2),
        "visibility": (np.zeros((n, 0)), rng.random((n, 1)) * 0.6),
        "auction": (rng.random((n, 1)), rng.random((n, 1))),
    }
    for kind, (obs, actions) in cases.items():
        src = tmp_path / f"{kind}.csv"
        write_strategy_csv(src, obs, actions)
        out = plot_strategy(src, kind, tmp_path / f"{kind}.png")
        assert out.exists() and out.stat().st_size > 0


def test_plot_strategy_schema_mismatch(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("foo,bar\n1,2\n")
    with pytest.raises(ValueError):
        plot_strategy(bad, "auction", tmp_path / "out.png")


def test_cli_nashconv_end_to_end(tmp_path):
    synthetic_sweep(tmp_path / "sweep")
    rc = main(["nashconv", "--in", str(tmp_path / "sweep"), "--out", str(tmp_path / "figs")])
    assert rc == 0
    assert (tmp_path / "figs" / "nashconv.png").exists()


def test_cli_error_paths(tmp_path, capsys):
    assert main(["nashconv", "--in", str(tmp_path), "--out", str(tmp_path)]) == 1
    bad = tmp_path / "bad.csv"
    bad.write_text("foo\n1\n")
    assert main(["strategy", "--in", str(bad), "--game", "auction",
                 "--out", str(tmp_path)]) == 1


# -- end-to-end against the primary CLI (external interface only) -----------------


def run_bbeq(args, cwd):
    return subprocess.run(
        [sys.executable, "-m", "bbeq", *args], cwd=cwd, capture_output=True, text=True
    )


def test_visibility_analytic_dump_cutoff(tmp_path):
    """The analytic visibility dump's 99th action percentile sits at the
    distribution's support edge, within 0.05 of 1 - 1/e."""
    proc = run_bbeq(
        ["dump-strategy", "--profile", "analytic:visibility", "--samples", "20000",
         "--out", str(tmp_path)],
        cwd=tmp_path,
    )
    assert proc.returncode == 0, proc.stderr
    path = json.loads(proc.stdout)["path"]
    out = plot_strategy(Path(path), "visibility", tmp_path / "vis.png")
    assert out.exists()
    with open(path, newline="") as fh:
        actions = np.array([float(r["action_0"]) for r in csv.DictReader(fh)])
    assert abs(np.quantile(actions, 0.99) - (1.0 - 1.0 / np.e)) < 0.05


def test_figures_from_real_desk_artifacts(tmp_path):
    """A miniature desk sweep made through the primary CLI renders end to end."""
    cfg = {
        "game": {"kind": "auction", "value_structure": "complete",
                 "payment_rule": "all_pay"},
        "policy": {"noise_dim": 2},
        "eval": {"n_obs_samples": 5, "n_state_samples": 10,
                 "n_opponent_action_samples": 1},
        "training": {"epochs": 2, "steps_per_epoch": 200, "n_strategy_samples": 200},
        "seed": 5,
    }
    for noise, trial in [(0, 0), (0, 1), (2, 0), (2, 1)]:
        cfg["policy"]["noise_dim"] = noise
        cfg["seed"] = 10 * noise + trial
        cfg_path = tmp_path / f"cfg{noise}{trial}.json"
        cfg_path.write_text(json.dumps(cfg))
        proc = run_bbeq(
            ["train", "--config", str(cfg_path), "--out",
             str(tmp_path / "sweep" / f"noise{noise}_trial{trial}")],
            cwd=tmp_path,
        )
        assert proc.returncode == 0, proc.stderr
    rc = main(["nashconv", "--in", str(tmp_path / "sweep"), "--out", str(tmp_path / "figs")])
    assert rc == 0
    assert (tmp_path / "figs" / "nashconv.png").exists()
    strat = next((tmp_path / "sweep" / "noise2_trial0").glob("strategy_epoch2_*.csv"))
    rc = main(["strategy", "--in", str(strat), "--game", "auction",
               "--out", str(tmp_path / "figs")])
    assert rc == 0
