"""Min-gap-first vs max-gap-first on the five comparison environments.

    python scripts/compare_strategies.py [--noisy] [--seeds 5]
"""

import argparse
from pathlib import Path

import numpy as np

from insmap.config import RunConfig
from insmap.runner import compare_strategies

ENVS = Path(__file__).resolve().parents[1] / "src" / "insmap" / "data" / "envs" / "compare"


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--noisy", action="store_true", help="default sensor and odometry noise (no SLAM)")
    ap.add_argument("--seeds", type=int, default=1)
    args = ap.parse_args()

    envs = sorted(ENVS.glob("*.env"))
    table = {}
    for seed in range(args.seeds):
        cfg = RunConfig(seed=seed) if args.noisy else RunConfig.noiseless(seed=seed)
        for row in compare_strategies(cfg, envs):
            table.setdefault((row.environment, row.strategy), []).append(row)

    print(f"{'environment':16s} {'strategy':8s} {'nodes':>6s} {'travel m':>9s} {'complete':>9s}")
    wins = 0
    for env in sorted({e for e, _ in table}):
        stats = {}
        for strategy in ("min-gap", "max-gap"):
            rows = table[(env, strategy)]
            nodes = np.mean([r.node_count for r in rows])
            dist = np.mean([r.travel_distance for r in rows])
            done = sum(r.complete for r in rows)
            stats[strategy] = (nodes, dist)
            print(f"{env:16s} {strategy:8s} {nodes:6.1f} {dist:9.2f} {done:5d}/{len(rows)}")
        wins += stats["min-gap"][0] <= stats["max-gap"][0] and stats["min-gap"][1] <= stats["max-gap"][1]
    print(f"min-gap no worse on both counts in {wins}/{len(envs)} environments")


if __name__ == "__main__":
    main()
