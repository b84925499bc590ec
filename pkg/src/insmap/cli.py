"""Command line entry point: ``insmap run`` and ``insmap compare``."""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .config import RunConfig, dump_config, load_config
from .environment import EnvironmentParseError, EnvironmentValidationError
from .mapper import dump_map, dump_trajectory, render_svg
from .navigation import dump_graph
from .runner import EpisodeError, EpisodeResult, compare_strategies, format_comparison, run_episode

EXIT_COMPLETE = 0
EXIT_ERROR = 1
EXIT_INCOMPLETE = 2


def write_outputs(result: EpisodeResult, out: Path, cfg: RunConfig | None = None) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "map.txt").write_text(dump_map(result.map), encoding="utf-8")
    (out / "trajectory.txt").write_text(dump_trajectory(result.map), encoding="utf-8")
    (out / "graph.txt").write_text(dump_graph(result.graph), encoding="utf-8")
    (out / "map.svg").write_text(render_svg(result.map, result.environment), encoding="utf-8")
    (out / "metrics.txt").write_text(result.metrics.dump(), encoding="utf-8")
    (out / "timing.txt").write_text(result.metrics.dump_timing(), encoding="utf-8")
    if cfg is not None:
        (out / "config.txt").write_text(dump_config(cfg), encoding="utf-8")


def _base_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    return cfg


def _cmd_run(args) -> int:
    cfg = _base_config(args)
    changes = {"environment": str(args.env), "seed": args.seed}
    if args.strategy:
        changes["strategy"] = args.strategy
    if args.slam:
        changes["slam"] = args.slam
    cfg = dataclasses.replace(cfg, **changes)
    out = Path(args.out)
    try:
        result = run_episode(cfg)
    except EpisodeError as exc:
        write_outputs(exc.result, out, cfg)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    write_outputs(result, out, cfg)
    sys.stdout.write(result.metrics.dump())
    return EXIT_COMPLETE if result.metrics.complete else EXIT_INCOMPLETE


def _cmd_compare(args) -> int:
    cfg = dataclasses.replace(_base_config(args), seed=args.seed)
    envs = sorted(Path(args.envs).glob("*.env"))
    if not envs:
        print(f"error: no .env files in {args.envs}", file=sys.stderr)
        return EXIT_ERROR
    rows = compare_strategies(cfg, envs)
    table = format_comparison(rows)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "comparison.txt").write_text(table, encoding="utf-8")
    sys.stdout.write(table)
    return EXIT_COMPLETE if all(r.complete for r in rows) else EXIT_INCOMPLETE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="insmap", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="explore one environment")
    run.add_argument("--env", required=True, type=Path)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--strategy", choices=("min-gap", "max-gap"))
    run.add_argument("--slam", choices=("none", "similarity", "particle"))
    run.add_argument("--config", type=Path)
    run.add_argument("--out", default="out", type=Path)
    run.set_defaults(func=_cmd_run)

    cmp_ = sub.add_parser("compare", help="min-gap vs max-gap over a directory of environments")
    cmp_.add_argument("--envs", required=True, type=Path)
    cmp_.add_argument("--seed", type=int, default=0)
    cmp_.add_argument("--config", type=Path)
    cmp_.add_argument("--out", default="out", type=Path)
    cmp_.set_defaults(func=_cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, KeyError, ValueError, EnvironmentParseError, EnvironmentValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
