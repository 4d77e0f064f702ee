"""``revmeas`` command line.

Example::

    revmeas theorem1-sweep --dims 2x2 --a-grid 0.05:0.45:0.05 --states 100 \\
        --rank 4 --seed 1 --restarts 8 --tol 2e-3 --out report.csv --format csv

Exit status is 0 when every checked inequality held, 1 when some did (the
report is still written), and 2 for invalid input.
"""
from __future__ import annotations

import argparse
import sys

from .campaign import COMMANDS, CampaignConfig, load_config_file, parse_a_grid, parse_dims, run
from .errors import RevmeasError

MAX_LISTED_VIOLATIONS = 20


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="revmeas",
        description="Verification campaigns for logically reversible measurements.",
    )
    parser.add_argument("command", nargs="?", choices=COMMANDS, help="campaign to run")
    parser.add_argument("--config", help="JSON file whose keys mirror these flags")
    parser.add_argument("--dims", type=parse_dims, help="subsystem dimensions, e.g. 2x2 (or 4 for a single system)")
    parser.add_argument("--a-grid", dest="a_grid", type=parse_a_grid, help="start:stop:step or comma list")
    parser.add_argument("--states", dest="num_states", type=int, help="number of random states or distributions")
    parser.add_argument("--rank", type=int, help="rank of random states (default: full)")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--restarts", type=int, help="random optimizer restarts")
    parser.add_argument("--tol", type=float, help="tolerance for the discord inequalities")
    parser.add_argument("--trials", type=int, help="Monte Carlo trials for reversal-sim")
    parser.add_argument("--state", dest="state_paths", action="append", help="state JSON file (repeatable)")
    parser.add_argument("--measurement", dest="measurement_path", help="measurement JSON file for reversal-sim")
    parser.add_argument("--out", dest="output_path")
    parser.add_argument("--format", choices=("csv", "json"))
    parser.add_argument("--corrupt-checks", dest="corrupt_checks", action="store_true", default=None,
                        help=argparse.SUPPRESS)
    return parser


def config_from_args(args: argparse.Namespace) -> CampaignConfig:
    values = load_config_file(args.config) if args.config else {}
    for key, value in vars(args).items():
        if key != "config" and value is not None:
            values[key] = tuple(value) if key == "state_paths" else value
    if "command" not in values:
        raise RevmeasError("a command is required (positional or in --config)")
    return CampaignConfig(**values)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = config_from_args(args)
        result = run(cfg)
    except (RevmeasError, OSError) as exc:
        print(f"revmeas: error: {exc}", file=sys.stderr)
        return 2
    if result.violations:
        print(f"revmeas: {len(result.violations)} check(s) failed:", file=sys.stderr)
        for line in result.violations[:MAX_LISTED_VIOLATIONS]:
            print(f"  {line}", file=sys.stderr)
        if len(result.violations) > MAX_LISTED_VIOLATIONS:
            print(f"  ... and {len(result.violations) - MAX_LISTED_VIOLATIONS} more", file=sys.stderr)
    print(f"{cfg.command}: {len(result.rows)} rows -> {cfg.output_path}", file=sys.stderr)
    return result.exit_status


if __name__ == "__main__":
    sys.exit(main())
