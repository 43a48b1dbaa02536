"""Compile kernels and check python-reference vs kernel trajectories bitwise."""
from __future__ import annotations

import sys
import time

import numpy as np

from boxsearch import society
from boxsearch.beliefs import REVEALED_QUALITY, REVEALED_VALUE


def check(config: society.WorldConfig, label: str) -> None:
    T = config.rounds
    grid = list(range(1, T + 1))
    t0 = time.time()
    batch = society.replication_matrix(config, grid)
    t1 = time.time()
    worst = 0
    for rep in range(config.runs):
        trace = society.run_replication(config, rep)
        usum = 0.0
        msum = 0.0
        avg_out = np.empty(T)
        avg_must = np.empty(T)
        for t in range(1, T + 1):
            if config.utility_convention == society.UTILITY_OUTSIDE:
                uo, um = trace.utility[t - 1], trace.alt_utility[t - 1]
            else:
                uo, um = trace.alt_utility[t - 1], trace.utility[t - 1]
            usum += uo
            msum += um
            avg_out[t - 1] = usum / t
            avg_must[t - 1] = msum / t
        bad = 0
        bad += np.sum(avg_out != batch.utility_outside[rep])
        bad += np.sum(avg_must != batch.utility_must[rep])
        bad += np.sum(trace.max_quality != batch.max_quality[rep])
        bad += np.sum(trace.items_explored != batch.items_explored[rep])
        if bad:
            print(f"  rep {rep}: {bad} mismatches")
            i = np.argmax(avg_out != batch.utility_outside[rep])
            print("   first uout mismatch at t=", i + 1,
                  avg_out[i], batch.utility_outside[rep][i])
            i = np.argmax(trace.max_quality != batch.max_quality[rep])
            print("   first m mismatch at t=", i + 1,
                  trace.max_quality[i], batch.max_quality[rep][i])
            i = np.argmax(trace.items_explored != batch.items_explored[rep])
            print("   first items mismatch at t=", i + 1,
                  trace.items_explored[i], batch.items_explored[rep][i])
        worst += bad
    status = "OK " if worst == 0 else "FAIL"
    print(f"{status} {label}: kernel {t1-t0:.1f}s, mismatched cells {worst}")
    if worst:
        sys.exit(1)


def main() -> None:
    T, R = 60, 6
    for sigma in (0.0, 0.25, 0.5, 0.75, 1.0):
        check(
            society.WorldConfig(sigma=sigma, cost=0.1, rounds=T, runs=R,
                                model=REVEALED_QUALITY),
            f"quality sigma={sigma}",
        )
    for sigma in (0.0, 0.25, 0.5, 0.75, 1.0):
        check(
            society.WorldConfig(sigma=sigma, cost=0.1, rounds=T, runs=R,
                                model=REVEALED_VALUE),
            f"value   sigma={sigma}",
        )
    check(
        society.WorldConfig(sigma=0.5, cost=0.3, rounds=T, runs=R,
                            model=REVEALED_QUALITY, diamond=(0.002, 100.0)),
        "quality diamond sigma=0.5",
    )
    check(
        society.WorldConfig(sigma=1.0, cost=0.3, rounds=T, runs=R,
                            model=REVEALED_VALUE, diamond=(0.02, 10.0)),
        "value   diamond sigma=1",
    )
    check(
        society.WorldConfig(sigma=0.0, cost=0.3, rounds=T, runs=R,
                            model=REVEALED_VALUE, diamond=(0.02, 10.0)),
        "value   diamond sigma=0",
    )
    check(
        society.WorldConfig(sigma=1.0, cost=0.3, rounds=T, runs=R,
                            model=REVEALED_VALUE, diamond=(0.002, 100.0),
                            utility_convention=society.UTILITY_MUST_CHOOSE),
        "value   diamond sigma=1 must-choose",
    )
    print("all lockstep checks passed")


if __name__ == "__main__":
    main()
