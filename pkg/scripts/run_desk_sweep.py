#!/usr/bin/env python3
"""Desk-scale noise-dimension sweep plus figures.

Trains one game across noise dimensions and seeds with the desk preset,
then (if bbeq-plots is installed) renders the NashConv curves and the
final strategy panel.

Usage:
  python scripts/run_desk_sweep.py --game blotto --noise-dims 0,2,3 \
      --trials 5 --steps 200000 --out runs/blotto_sweep
"""

import argparse
import json
import subprocess
import sys
from dataclasses import replace
from pathlib import Path

from bbeq import trainer
from bbeq.config import (
    ExperimentConfig,
    GameConfig,
    PolicyConfig,
    TrainingConfig,
    apply_preset,
)

GAMES = {
    "blotto": GameConfig(kind="blotto"),
    "allpay": GameConfig(kind="auction", value_structure="complete", payment_rule="all_pay"),
    "ipv1st": GameConfig(kind="auction", value_structure="ipv", payment_rule="winner_pay",
                         price_rank=1),
    "visibility": GameConfig(kind="visibility"),
    "chopstick": GameConfig(kind="chopstick"),
}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--game", choices=sorted(GAMES), default="blotto")
    ap.add_argument("--noise-dims", default="0,2")
    ap.add_argument("--trials", type=int, default=5)
    ap.add_argument("--steps", type=int, default=200_000)
    ap.add_argument("--epochs", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="runs/sweep")
    args = ap.parse_args()

    dims = [int(x) for x in args.noise_dims.split(",")]
    base = apply_preset(ExperimentConfig(game=GAMES[args.game]), "desk")
    base = replace(
        base,
        seed=args.seed,
        training=TrainingConfig(epochs=args.epochs, steps_per_epoch=args.steps),
        policy=PolicyConfig(noise_dim=dims[0]),
    )
    out = Path(args.out)
    arts = trainer.sweep(base, dims, trials=args.trials, out_root=out)
    print(json.dumps({"runs": len(arts), "out": str(out)}))

    try:
        subprocess.run(
            ["plots", "nashconv", "--in", str(out), "--out", str(out / "figures")],
            check=True,
        )
        strategy_csv = sorted(arts[-1].strategy_paths)[-1]
        kind = "auction" if GAMES[args.game].kind == "auction" else GAMES[args.game].kind
        subprocess.run(
            ["plots", "strategy", "--in", str(strategy_csv), "--game", kind,
             "--out", str(out / "figures")],
            check=True,
        )
    except FileNotFoundError:
        print("bbeq-plots not installed; skipping figures", file=sys.stderr)


if __name__ == "__main__":
    main()
