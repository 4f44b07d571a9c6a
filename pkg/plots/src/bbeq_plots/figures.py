"""Batch figure generation from experiment artifacts.

Consumes only the documented CSV/JSON schemas: per-run ``metrics.csv``
(columns run_id,epoch,player,utility,best_response,gap,nashconv,seed)
with a ``config.json`` echo next to it, and strategy sample CSVs
(obs_* columns followed by action_* columns).  Rendering is read-only
and deterministic given inputs and the bootstrap seed.
"""

from __future__ import annotations

import csv
import json
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .bootstrap import bca_interval


@dataclass
class CurveGroup:
    """Aligned NashConv series of all trials sharing one setting label."""

    label: str
    epochs: list[int] = field(default_factory=list)
    series: list[np.ndarray] = field(default_factory=list)

    def add(self, epochs: list[int], values: np.ndarray) -> None:
        if self.series and epochs != self.epochs:
            raise ValueError(
                f"group {self.label!r}: epoch axis {epochs} does not match {self.epochs}"
            )
        self.epochs = epochs
        self.series.append(values)


def read_metrics(path: Path) -> tuple[list[int], np.ndarray]:
    """Per-epoch NashConv from one metrics.csv (players share the value)."""
    by_epoch: dict[int, float] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            by_epoch[int(row["epoch"])] = float(row["nashconv"])
    epochs = sorted(by_epoch)
    return epochs, np.array([by_epoch[e] for e in epochs])


def discover_groups(in_dir: Path) -> list[CurveGroup]:
    """Group run directories under in_dir by their noise dimension."""
    groups: dict[str, CurveGroup] = {}
    for metrics in sorted(in_dir.glob("*/metrics.csv")):
        config = metrics.parent / "config.json"
        if config.exists():
            noise = json.loads(config.read_text())["policy"]["noise_dim"]
            label = f"{noise}-dim noise"
        else:
            label = metrics.parent.name
        epochs, values = read_metrics(metrics)
        groups.setdefault(label, CurveGroup(label)).add(epochs, values)
    if not groups:
        raise ValueError(f"no run directories with metrics.csv under {in_dir}")
    return [groups[k] for k in sorted(groups)]


def plot_nashconv(
    groups: list[CurveGroup],
    out_path: Path,
    confidence: float = 0.95,
    n_boot: int = 10_000,
    seed: int = 0,
    log_y: bool = False,
) -> Path:
    """One mean curve per group with a BCa confidence band across trials."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for g in groups:
        data = np.stack(g.series)  # (trials, epochs)
        mean = data.mean(axis=0)
        if data.shape[0] > 1:
            lo, hi = zip(
                *(bca_interval(data[:, k], confidence, n_boot, seed) for k in range(data.shape[1]))
            )
        else:
            lo, hi = mean, mean  # single trial: the band collapses
        (line,) = ax.plot(g.epochs, mean, label=g.label)
        ax.fill_between(g.epochs, lo, hi, color=line.get_color(), alpha=0.25, linewidth=0)
    ax.set_xlabel("epoch")
    ax.set_ylabel("NashConv")
    if log_y:
        ax.set_yscale("log")
    ax.legend()
    fig.tight_layout()
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


# -- strategy panels ------------------------------------------------------------


def read_strategy(path: Path) -> tuple[np.ndarray, np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = np.array([[float(v) for v in row] for row in reader])
    n_obs = sum(1 for c in header if c.startswith("obs_"))
    n_act = sum(1 for c in header if c.startswith("action_"))
    if n_act == 0 or n_obs + n_act != len(header):
        raise ValueError(f"{path} does not follow the obs_*/action_* schema: {header}")
    return rows[:, :n_obs], rows[:, n_obs:]


def plot_strategy(csv_path: Path, game_kind: str, out_path: Path) -> Path:
    """Game-appropriate view of sampled actions.

    blotto: scatter on the 2-simplex; chopstick: 3-d bid scatter;
    auction: observation-vs-bid histogram; visibility: bid histogram.
    """
    obs, actions = read_strategy(Path(csv_path))
    fig = plt.figure(figsize=(5, 4.5))
    if game_kind == "blotto":
        if actions.shape[1] != 3:
            raise ValueError("blotto strategy files carry 3 action columns")
        total = actions.sum(axis=1, keepdims=True)
        bary = actions / np.maximum(total, 1e-300)
        x = bary[:, 1] + 0.5 * bary[:, 2]
        y = (np.sqrt(3.0) / 2.0) * bary[:, 2]
        ax = fig.add_subplot(111)
        ax.plot([0, 1, 0.5, 0], [0, 0, np.sqrt(3) / 2, 0], color="black", linewidth=1)
        ax.scatter(x, y, s=2, alpha=0.2)
        ax.set_aspect("equal")
        ax.set_axis_off()
    elif game_kind == "chopstick":
        if actions.shape[1] != 3:
            raise ValueError("chopstick strategy files carry 3 action columns")
        ax = fig.add_subplot(111, projection="3d")
        ax.scatter(actions[:, 0], actions[:, 1], actions[:, 2], s=2, alpha=0.25)
        ax.set_xlabel("item 1 bid")
        ax.set_ylabel("item 2 bid")
        ax.set_zlabel("item 3 bid")
    elif game_kind == "visibility" or obs.shape[1] == 0:
        ax = fig.add_subplot(111)
        ax.hist(actions[:, 0], bins=60, density=True)
        ax.set_xlabel("point")
        ax.set_ylabel("density")
    else:  # auctions: observation on X, bid on Y
        ax = fig.add_subplot(111)
        ax.hist2d(obs[:, 0], actions[:, 0], bins=60, cmap="viridis")
        ax.set_xlabel("observation")
        ax.set_ylabel("bid")
    fig.tight_layout()
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path
