"""One agent's optimal search over explored items plus an infinite fresh reservoir.

The policy is the index rule: open items with positive reservation value in
decreasing index order, stop as soon as the best observed value reaches the
largest index still unopened. Fresh items all share one index, so the
reservoir enters the ordering as a sentinel rather than as actual entries,
and a new id is materialized only when a fresh box is actually opened.
"""
from __future__ import annotations

import dataclasses
import heapq
import math
from typing import Callable, Sequence

from .reservation import ValueBelief, reservation_value

DEFAULT_STEP_CAP = 10**6


class StepCapExceeded(RuntimeError):
    """An agent hit the per-search open cap (runaway configuration)."""


@dataclasses.dataclass(frozen=True)
class SearchOutcome:
    """Transcript of one agent's search.

    observed_qualities carries the quality of freshly materialized items
    and NaN for re-opened ones; the first RevealedQuality write is the only
    history update that needs a quality.
    """

    opened: tuple[int, ...]
    observed_values: tuple[float, ...]
    observed_qualities: tuple[float, ...]
    chosen: int | None
    utility: float

    @property
    def best_value(self) -> float:
        return max(self.observed_values)


def run_search(
    beliefs: Sequence[ValueBelief],
    fresh_index: float,
    fresh_sampler: Callable[[], tuple[float, float]],
    explored_sampler: Callable[[int], float],
    cost: float,
    step_cap: int = DEFAULT_STEP_CAP,
) -> SearchOutcome:
    """Run one optimal search; item i's belief is beliefs[i], fresh ids follow on.

    fresh_sampler() -> (q, s) materializes the next fresh item; the observed
    value is q + s. explored_sampler(i) -> the realized value of known item i.
    Ties between equal indices open the smaller item id first and fresh
    items last; both tie rules follow from the index policy's conventions.
    """
    if not fresh_index > 0.0:
        raise ValueError("run_search requires fresh_index > 0")
    if step_cap < 1:
        raise ValueError("run_search requires step_cap >= 1")
    # (-index, id): heapq then pops highest index first, smaller id on ties
    heap = [(-reservation_value(b, cost), i) for i, b in enumerate(beliefs)]
    heapq.heapify(heap)

    opened: list[int] = []
    values: list[float] = []
    qualities: list[float] = []
    best = -math.inf
    best_id = -1
    next_fresh = len(beliefs)

    while True:
        use_explored = bool(heap) and -heap[0][0] >= fresh_index
        next_index = -heap[0][0] if use_explored else fresh_index
        if best >= next_index:
            break
        if len(opened) >= step_cap:
            raise StepCapExceeded(f"agent opened {step_cap} boxes without stopping")
        if use_explored:
            _, item = heapq.heappop(heap)
            value = explored_sampler(item)
            quality = math.nan
        else:
            item = next_fresh
            next_fresh += 1
            quality, s = fresh_sampler()
            value = quality + s
        opened.append(item)
        values.append(value)
        qualities.append(quality)
        if value > best:
            best = value
            best_id = item

    chosen = best_id if best >= 0.0 else None
    utility = (best if best > 0.0 else 0.0) - cost * len(opened)
    return SearchOutcome(
        opened=tuple(opened),
        observed_values=tuple(values),
        observed_qualities=tuple(qualities),
        chosen=chosen,
        utility=utility,
    )
