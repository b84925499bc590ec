"""Explore the bundled junction-and-loop fixture and print every travel decision.

    python scripts/run_junction_loop.py [--strategy max-gap] [--out out/junction_loop]
"""

import argparse
from pathlib import Path

from insmap.cli import write_outputs
from insmap.config import RunConfig
from insmap.runner import run_episode

ENV = Path(__file__).resolve().parents[1] / "src" / "insmap" / "data" / "envs" / "junction_loop.env"


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--strategy", default="min-gap", choices=("min-gap", "max-gap"))
    ap.add_argument("--noisy", action="store_true", help="use the default sensor and odometry noise")
    ap.add_argument("--out", type=Path, default=Path("out/junction_loop"))
    args = ap.parse_args()

    make = RunConfig if args.noisy else RunConfig.noiseless
    cfg = make(environment=str(ENV), strategy=args.strategy)
    res = run_episode(cfg)
    g = res.graph
    for leg in res.legs:
        gap = g.nodes[leg.target_node].gaps[leg.gap_index]
        route = " -> ".join(map(str, leg.path))
        print(f"node {leg.from_node:2d}: gap {leg.gap_index} of node {leg.target_node} (width {gap.width:.2f} m) "
              f"via {route}, {leg.distance:.2f} m, arrived as node {leg.arrived_node}")
    rule_edges = [k for k, kind in sorted(g.edge_kinds.items()) if kind == "neighbour"]
    print("edges added by the neighbour rules:", rule_edges)
    print(res.metrics.dump(), end="")
    write_outputs(res, args.out, cfg)
    print(f"artifacts written to {args.out}")


if __name__ == "__main__":
    main()
