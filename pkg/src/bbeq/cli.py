"""Command-line entry point.

Commands:

  bbeq train --config cfg.json [--seed N] [--out DIR] [--profile desk|paper]
  bbeq eval --profile analytic:<kind>|<checkpoint.npz> [--out DIR] [overrides]
  bbeq dump-strategy --checkpoint ck.npz | --profile analytic:<kind>
                     [--samples N] [--observations o1,o2,...] [--player I]

Exit codes: 0 success, 1 usage or config error, 2 runtime failure.
The default output root is $BBEQ_OUT (falling back to ./bbeq_out).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import trainer
from .analytic import ANALYTIC_KINDS, analytic_profile
from .config import ConfigError
from .distributed import DUMP_TAG, EVAL_TAG
from .evaluation import EvalConfig, estimate_nashconv
from .prng import seed_stream
from .strategy import PolicyStrategy
from .trainer import METRICS_COLUMNS, load_run_checkpoint


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.exit(1, f"{self.prog}: error: {message}\n")


def _out_root(arg: str | None) -> Path:
    if arg:
        return Path(arg)
    return Path(os.environ.get("BBEQ_OUT", "bbeq_out"))


def _load_profile(spec: str, seed_hint: int):
    """Returns (game, strategies, label) for analytic:<kind> or a checkpoint."""
    if spec.startswith("analytic:"):
        kind = spec.split(":", 1)[1]
        if kind not in ANALYTIC_KINDS:
            raise ConfigError(
                f"unknown analytic kind {kind!r}; choose from {', '.join(ANALYTIC_KINDS)}"
            )
        game, strategies = analytic_profile(kind)
        return game, strategies, f"analytic_{kind}"
    path = Path(spec)
    if not path.exists():
        raise ConfigError(f"checkpoint not found: {path}")
    cfg, epoch, snap = load_run_checkpoint(path)
    game = cfgmod.build_game(cfg.game)
    archs = cfgmod.build_architectures(game, cfg.policy)
    strategies = [PolicyStrategy(archs[i], snap.profile[i]) for i in range(game.n_players)]
    return game, strategies, f"checkpoint_epoch{epoch}"


def cmd_train(args) -> int:
    try:
        cfg = cfgmod.load(args.config)
        if args.profile:
            cfg = cfgmod.apply_preset(cfg, args.profile)
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1
    out = _out_root(args.out)
    try:
        art = trainer.train(cfg, out)
    except Exception as err:  # noqa: BLE001 - runtime failures map to exit 2
        print(f"runtime error: {err}", file=sys.stderr)
        return 2
    print(json.dumps({"run_id": art.run_id, "out_dir": str(art.out_dir)}))
    return 0


def cmd_eval(args) -> int:
    try:
        game, strategies, label = _load_profile(args.profile, args.seed)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    if args.game and args.game != game.kind:
        print(
            f"error: --game {args.game} does not match the profile's game {game.kind}",
            file=sys.stderr,
        )
        return 1
    eval_cfg = EvalConfig(
        n_obs_samples=args.n_obs,
        n_state_samples=args.n_states,
        grid_resolution=args.grid_resolution,
        n_opponent_action_samples=args.n_opp,
    )
    try:
        stream = seed_stream(args.seed).substream(EVAL_TAG, 0)
        report = estimate_nashconv(game, strategies, eval_cfg, stream)
    except Exception as err:  # noqa: BLE001
        print(f"runtime error: {err}", file=sys.stderr)
        return 2
    print(json.dumps(report.to_dict(), indent=2))
    out = _out_root(args.out)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"eval_{label}.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRICS_COLUMNS)
        for p in report.players:
            writer.writerow(
                [label, 0, p.player, repr(float(p.utility)), repr(float(p.best_response)),
                 repr(float(p.gap)), repr(float(report.nashconv)), args.seed]
            )
    return 0


def cmd_dump_strategy(args) -> int:
    spec = args.checkpoint if args.checkpoint else args.profile
    if spec is None:
        print("error: provide --checkpoint or --profile", file=sys.stderr)
        return 1
    try:
        game, strategies, label = _load_profile(spec, args.seed)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    player = args.player
    if not 0 <= player < game.n_players:
        print(f"error: player must be in [0, {game.n_players})", file=sys.stderr)
        return 1
    out = _out_root(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stream = seed_stream(args.seed).substream(DUMP_TAG, 0, player)
    strat = strategies[player]
    rows = []
    if args.observations:
        obs_values = [float(x) for x in args.observations.split(",")]
        for o in obs_values:
            obs = np.full((args.samples, game.obs_dim(player)), o)
            actions = strat.sample_actions(obs, stream)
            rows.append((obs, actions))
    else:
        states = game.sample_states(args.samples, stream)
        obs = game.observe(states, player)
        rows.append((obs, strat.sample_actions(obs, stream)))
    path = out / f"strategy_{label}_player{player}.csv"
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        obs0, act0 = rows[0]
        writer.writerow(
            [f"obs_{k}" for k in range(obs0.shape[1])]
            + [f"action_{k}" for k in range(act0.shape[1])]
        )
        for obs, actions in rows:
            for row in np.concatenate([obs, actions], axis=1):
                writer.writerow([repr(float(v)) for v in row])
    print(json.dumps({"path": str(path), "rows": sum(o.shape[0] for o, _ in rows)}))
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="bbeq", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="run a training experiment")
    p_train.add_argument("--config", required=True, help="JSON experiment config")
    p_train.add_argument("--seed", type=int, default=None, help="master seed override")
    p_train.add_argument("--out", default=None, help="output directory")
    p_train.add_argument("--profile", choices=("desk", "paper"), default=None)
    p_train.set_defaults(fn=cmd_train)

    p_eval = sub.add_parser("eval", help="evaluate NashConv of a profile")
    p_eval.add_argument("--profile", required=True,
                        help="analytic:<kind> or a run checkpoint path")
    p_eval.add_argument("--game", default=None,
                        help="optional consistency check against the profile's game kind")
    p_eval.add_argument("--seed", type=int, default=0)
    p_eval.add_argument("--out", default=None)
    p_eval.add_argument("--n-obs", dest="n_obs", type=int, default=100)
    p_eval.add_argument("--n-states", dest="n_states", type=int, default=300)
    p_eval.add_argument("--n-opp", dest="n_opp", type=int, default=3)
    p_eval.add_argument("--grid-resolution", dest="grid_resolution", type=int, default=100)
    p_eval.set_defaults(fn=cmd_eval)

    p_dump = sub.add_parser("dump-strategy", help="sample actions to CSV for plotting")
    p_dump.add_argument("--checkpoint", default=None, help="run checkpoint path")
    p_dump.add_argument("--profile", default=None,
                        help="analytic:<kind> as an alternative to --checkpoint")
    p_dump.add_argument("--samples", type=int, default=10_000)
    p_dump.add_argument("--observations", default=None,
                        help="comma-separated observation values (scalar-obs games)")
    p_dump.add_argument("--player", type=int, default=0)
    p_dump.add_argument("--seed", type=int, default=0)
    p_dump.add_argument("--out", default=None)
    p_dump.set_defaults(fn=cmd_dump_strategy)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
