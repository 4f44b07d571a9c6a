"""plots: batch figure generation from bbeq artifacts.

  plots nashconv --in <sweep dir> --out <dir> [--confidence 0.95] [--log-y]
  plots strategy --in <strategy csv> --game <kind> --out <dir>
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .figures import discover_groups, plot_nashconv, plot_strategy


def cmd_nashconv(args) -> int:
    try:
        groups = discover_groups(Path(args.in_dir))
        out = plot_nashconv(
            groups,
            Path(args.out) / "nashconv.png",
            confidence=args.confidence,
            log_y=args.log_y,
        )
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    print(out)
    return 0


def cmd_strategy(args) -> int:
    src = Path(args.in_path)
    try:
        out = plot_strategy(src, args.game, Path(args.out) / f"{src.stem}.png")
    except (ValueError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    print(out)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="plots", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_nc = sub.add_parser("nashconv", help="NashConv-vs-epoch curves with BCa bands")
    p_nc.add_argument("--in", dest="in_dir", required=True)
    p_nc.add_argument("--out", required=True)
    p_nc.add_argument("--confidence", type=float, default=0.95)
    p_nc.add_argument("--log-y", action="store_true")
    p_nc.set_defaults(fn=cmd_nashconv)

    p_st = sub.add_parser("strategy", help="strategy scatter/histogram panel")
    p_st.add_argument("--in", dest="in_path", required=True)
    p_st.add_argument("--game", required=True,
                      choices=("blotto", "chopstick", "visibility", "auction"))
    p_st.add_argument("--out", required=True)
    p_st.set_defaults(fn=cmd_strategy)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
