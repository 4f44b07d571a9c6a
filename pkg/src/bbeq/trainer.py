"""Training orchestration: epochs, checkpoints, metrics, strategy dumps.

A run is a pure function of its config (master seed included): metrics
CSVs are byte-identical across repeats.  Per-epoch evaluation draws from
a substream independent of the training stream, so evaluating more or
less often never perturbs the training trajectory.

Epoch 0 rows describe the freshly initialized profile before any update;
epoch k rows follow k * steps_per_epoch training iterations.
"""

from __future__ import annotations

import csv
import hashlib
import json
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .config import ExperimentConfig
from .distributed import DUMP_TAG, EVAL_TAG, INIT_TAG, Snapshot, TrainingRun
from .evaluation import EvalReport, estimate_nashconv
from .policy import he_init
from .prng import seed_stream
from .strategy import PolicyStrategy

METRICS_COLUMNS = [
    "run_id",
    "epoch",
    "player",
    "utility",
    "best_response",
    "gap",
    "nashconv",
    "seed",
]

_NAN_CHECK_CHUNK = 250


@dataclass
class RunArtifacts:
    run_id: str
    out_dir: Path
    metrics_path: Path
    config_path: Path
    summary_path: Path
    strategy_paths: list[Path] = field(default_factory=list)
    checkpoint_paths: list[Path] = field(default_factory=list)


def run_id_for(cfg: ExperimentConfig) -> str:
    doc = cfgmod.render(cfg)
    # the epoch count extends a run without changing its identity
    doc["training"] = {k: v for k, v in doc["training"].items() if k != "epochs"}
    blob = json.dumps(doc, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def _metrics_rows(run_id: str, epoch: int, report: EvalReport, seed: int) -> list[list]:
    return [
        [run_id, epoch, p.player, repr(float(p.utility)), repr(float(p.best_response)),
         repr(float(p.gap)), repr(float(report.nashconv)), seed]
        for p in report.players
    ]


def _dump_strategy(path: Path, game, strategy, player: int, n: int, stream) -> None:
    states = game.sample_states(n, stream)
    obs = game.observe(states, player)
    actions = strategy.sample_actions(obs, stream)
    header = [f"obs_{k}" for k in range(obs.shape[1])] + [
        f"action_{k}" for k in range(actions.shape[1])
    ]
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in np.concatenate([obs, actions], axis=1):
            writer.writerow([repr(float(v)) for v in row])


def save_run_checkpoint(path: Path, cfg: ExperimentConfig, epoch: int, snap: Snapshot) -> None:
    payload = {
        "config": cfgmod.render(cfg),
        "epoch": epoch,
    }
    with path.open("wb") as fh:
        np.savez(
            fh,
            meta=np.frombuffer(json.dumps(payload).encode(), dtype=np.uint8),
            snapshot=np.frombuffer(snap.to_bytes(), dtype=np.uint8),
        )


def load_run_checkpoint(path: Path) -> tuple[ExperimentConfig, int, Snapshot]:
    with np.load(path) as data:
        meta = json.loads(bytes(data["meta"]).decode())
        snap = Snapshot.from_bytes(bytes(data["snapshot"]))
    return cfgmod.parse(meta["config"]), meta["epoch"], snap


def train(
    cfg: ExperimentConfig,
    out_dir: str | Path,
    resume_from: str | Path | None = None,
) -> RunArtifacts:
    """Run the configured experiment and write all artifacts under out_dir.

    With ``resume_from`` pointing at a run checkpoint, training continues
    from that epoch and reproduces the uninterrupted run bit for bit.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    run_id = run_id_for(cfg)
    game = cfgmod.build_game(cfg.game)
    archs = cfgmod.build_architectures(game, cfg.policy)
    base = seed_stream(cfg.seed)
    profile = [he_init(archs[i], base.substream(INIT_TAG, i)) for i in range(game.n_players)]
    run = TrainingRun(
        game, archs, profile, cfg.estimator, cfg.dynamics, cfg.seed,
        n_virtual=cfg.training.n_workers,
    )
    start_epoch = 0
    if resume_from is not None:
        ck_cfg, start_epoch, snap = load_run_checkpoint(Path(resume_from))
        ours, theirs = cfgmod.render(cfg), cfgmod.render(ck_cfg)
        # a resumed run may extend the epoch count; everything else is pinned
        ours["training"] = {k: v for k, v in ours["training"].items() if k != "epochs"}
        theirs["training"] = {k: v for k, v in theirs["training"].items() if k != "epochs"}
        if ours != theirs:
            raise ValueError("checkpoint config does not match the requested config")
        run.restore(snap)

    art = RunArtifacts(
        run_id=run_id,
        out_dir=out_dir,
        metrics_path=out_dir / "metrics.csv",
        config_path=out_dir / "config.json",
        summary_path=out_dir / "summary.json",
    )
    cfgmod.save(cfg, art.config_path)

    mode = "a" if resume_from is not None and art.metrics_path.exists() else "w"
    metrics = art.metrics_path.open(mode, newline="")
    writer = csv.writer(metrics)
    if mode == "w":
        writer.writerow(METRICS_COLUMNS)
    summary_epochs = []
    if resume_from is not None and art.summary_path.exists():
        summary_epochs = json.loads(art.summary_path.read_text())["epochs"]

    def eval_and_dump(epoch: int) -> None:
        t0 = time.monotonic()
        strategies = [PolicyStrategy(archs[i], run.profile[i]) for i in range(game.n_players)]
        report = estimate_nashconv(game, strategies, cfg.eval, base.substream(EVAL_TAG, epoch))
        for row in _metrics_rows(run_id, epoch, report, cfg.seed):
            writer.writerow(row)
        metrics.flush()
        dump_stream = base.substream(DUMP_TAG, epoch)
        for i in range(game.n_players):
            spath = out_dir / f"strategy_epoch{epoch}_player{i}.csv"
            _dump_strategy(
                spath, game, strategies[i], i, cfg.training.n_strategy_samples, dump_stream
            )
            art.strategy_paths.append(spath)
        cpath = out_dir / f"checkpoint_epoch{epoch}.npz"
        save_run_checkpoint(cpath, cfg, epoch, run.snapshot())
        art.checkpoint_paths.append(cpath)
        summary_epochs.append(
            {
                "epoch": epoch,
                "nashconv": report.nashconv,
                "gaps": [p.gap for p in report.players],
                "utilities": [p.utility for p in report.players],
                "wall_ms": int(1000 * (time.monotonic() - t0)),
            }
        )

    try:
        if start_epoch == 0 and cfg.training.eval_initial:
            eval_and_dump(0)
        for epoch in range(start_epoch + 1, cfg.training.epochs + 1):
            remaining = cfg.training.steps_per_epoch
            while remaining > 0:
                chunk = min(_NAN_CHECK_CHUNK, remaining)
                run.step(chunk)
                remaining -= chunk
                if any(np.isnan(x).any() for x in run.profile):
                    raise FloatingPointError(
                        f"NaN in parameters by training iteration {run.iteration}"
                    )
            eval_and_dump(epoch)
    finally:
        metrics.close()
        art.summary_path.write_text(
            json.dumps({"run_id": run_id, "epochs": summary_epochs}, indent=2) + "\n"
        )
    return art


def derived_seed(master_seed: int, *key: int) -> int:
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(90, *key))
    return int(ss.generate_state(1, np.uint64)[0])


def sweep(
    base_cfg: ExperimentConfig,
    noise_dims: list[int],
    trials: int,
    out_root: str | Path,
) -> list[RunArtifacts]:
    """Independent runs over noise dimensions x trials with derived seeds."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    out_root = Path(out_root)
    artifacts = []
    for d_idx, nd in enumerate(noise_dims):
        for trial in range(trials):
            cfg = replace(
                base_cfg,
                policy=replace(base_cfg.policy, noise_dim=nd),
                seed=derived_seed(base_cfg.seed, d_idx, trial),
            )
            artifacts.append(train(cfg, out_root / f"noise{nd}_trial{trial}"))
    return artifacts
