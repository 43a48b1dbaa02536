"""Time the batch kernels at the acceptance-test operating points."""
from __future__ import annotations

import time

from boxsearch import society
from boxsearch.beliefs import REVEALED_QUALITY, REVEALED_VALUE


def bench(label: str, config: society.WorldConfig, grid) -> None:
    t0 = time.time()
    society.replication_matrix(config, grid)
    dt = time.time() - t0
    per = dt / config.runs
    print(f"{label:34s} R={config.runs:<6d} wall={dt:7.2f}s per-rep={per*1e3:8.3f}ms")


def main() -> None:
    # warm the caches
    bench("warmup quality", society.WorldConfig(0.5, 0.1, 100, runs=4), [100])
    bench(
        "quality s=0.75 T=1e5",
        society.WorldConfig(0.75, 0.1, 10**5, runs=20),
        [10**5],
    )
    bench(
        "quality s=0.5  T=1e4",
        society.WorldConfig(0.5, 0.1, 10**4, runs=100),
        [10**4],
    )
    bench(
        "quality s=0.25 T=1e4",
        society.WorldConfig(0.25, 0.1, 10**4, runs=100),
        [10**4],
    )
    bench(
        "quality s=0.25 T=1e5",
        society.WorldConfig(0.25, 0.1, 10**5, runs=20),
        [10**5],
    )
    bench(
        "quality s=0    T=1e4",
        society.WorldConfig(0.0, 0.1, 10**4, runs=200),
        [10**4],
    )
    bench(
        "quality s=1    T=1e2",
        society.WorldConfig(1.0, 0.1, 100, runs=2000),
        [100],
    )
    bench(
        "diamond value  T=5e3",
        society.WorldConfig(1.0, 0.3, 5000, runs=50, model=REVEALED_VALUE,
                            diamond=(0.002, 100.0)),
        [5000],
    )
    bench(
        "value   s=0.5  T=1e3",
        society.WorldConfig(0.5, 0.1, 1000, runs=50, model=REVEALED_VALUE),
        [1000],
    )


if __name__ == "__main__":
    main()
