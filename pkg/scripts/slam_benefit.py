"""Final pose error of odometry alone vs the two SLAM back ends on the drift room.

    python scripts/slam_benefit.py [--seeds 100] [--slam particle similarity]
"""

import argparse
import time
from pathlib import Path

import numpy as np

from insmap.config import RunConfig
from insmap.runner import EpisodeError, run_episode

ENV = Path(__file__).resolve().parents[1] / "src" / "insmap" / "data" / "envs" / "drift_room.env"


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--seeds", type=int, default=100)
    ap.add_argument("--slam", nargs="+", default=["particle", "similarity"])
    args = ap.parse_args()

    for mode in args.slam:
        t0 = time.perf_counter()
        cor, odo, aborted = [], [], 0
        for seed in range(args.seeds):
            try:
                m = run_episode(RunConfig(environment=str(ENV), seed=seed, slam=mode)).metrics
            except EpisodeError as exc:
                aborted += 1
                m = exc.result.metrics
            cor.append(m.final_pose_error)
            odo.append(m.odometry_pose_error)
        cor, odo = np.array(cor), np.array(odo)
        print(f"{mode}: median error {np.median(cor):.3f} m (odometry {np.median(odo):.3f} m), "
              f"< 0.1 m in {np.sum(cor < 0.1)}/{args.seeds}, beats odometry in {np.sum(cor < odo)}/{args.seeds}, "
              f"{aborted} aborted, {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
