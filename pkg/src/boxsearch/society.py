"""The T-round social process and its Monte Carlo estimators.

Each round one agent runs an optimal search against the public history,
then her observations update that history for the next agent. A(sigma, T)
is estimated as the mean over replications of the first-T-rounds average
utility; M(sigma, T) as the mean max posterior-mean quality among explored
items, clamped at zero.

Two engines compute the same process: a pure-Python path built from
run_search/belief_for_agent (the reference, used by tests), and batch numba
kernels (used by estimate_curve). Both draw every variate from the keyed
counter RNG in ``_scalar``, so for a fixed (seed, replication) they produce
bitwise identical trajectories; replications are embarrassingly parallel
and are reduced in replication order regardless of worker scheduling.
"""
from __future__ import annotations

import concurrent.futures
import dataclasses
import hashlib
import math
import os
from typing import Sequence

import numpy as np

from . import _kernels, _scalar
from .beliefs import (
    MODELS,
    REVEALED_QUALITY,
    REVEALED_VALUE,
    PublicRecord,
    RevealedQuality,
    ValueStats,
    belief_for_agent,
)
from .reservation import MAX_FRESH_COST, fresh_item_index
from .search import DEFAULT_STEP_CAP, SearchOutcome, StepCapExceeded, run_search

UTILITY_OUTSIDE = "outside-option"
UTILITY_MUST_CHOOSE = "must-choose"
UTILITY_CONVENTIONS = (UTILITY_OUTSIDE, UTILITY_MUST_CHOOSE)

WORKERS_ENV_VAR = "BOXSEARCH_WORKERS"

_SEED_MASK = (1 << 64) - 1


class ConfigError(ValueError):
    """A WorldConfig invariant is violated; the message names it."""


@dataclasses.dataclass(frozen=True)
class WorldConfig:
    """Parameters of one simulated society."""

    sigma: float
    cost: float
    rounds: int
    model: str = REVEALED_QUALITY
    diamond: tuple[float, float] | None = None
    runs: int = 1000
    seed: int = 0
    common_random_numbers: bool = True
    utility_convention: str = UTILITY_OUTSIDE

    def __post_init__(self) -> None:
        if not 0.0 <= self.sigma <= 1.0:
            raise ConfigError(f"sigma must lie in [0, 1], got {self.sigma}")
        if not 0.0 < self.cost < MAX_FRESH_COST:
            raise ConfigError(
                f"cost must lie in (0, 1/sqrt(2*pi) ~= {MAX_FRESH_COST:.6f}), got {self.cost}"
            )
        if self.rounds < 1:
            raise ConfigError("rounds must be >= 1")
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if self.model not in MODELS:
            raise ConfigError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.utility_convention not in UTILITY_CONVENTIONS:
            raise ConfigError(
                f"utility_convention must be one of {UTILITY_CONVENTIONS}"
            )
        if self.diamond is not None:
            p, jump = self.diamond
            if not 0.0 < p < 1.0:
                raise ConfigError("diamond probability p must lie in (0, 1)")
            if not jump > 0.0:
                raise ConfigError("diamond jump D must be > 0")
            if p * jump > self.cost:
                raise ConfigError("diamond model requires p * D <= cost")
            if self.model == REVEALED_VALUE and self.sigma not in (0.0, 1.0):
                raise ConfigError(
                    "diamond + revealed-value is defined only at sigma in {0, 1}"
                )


@dataclasses.dataclass(frozen=True)
class CurvePoint:
    """One (sigma, T) cell of the estimated utility/quality curves."""

    sigma: float
    T: int
    mean_avg_utility: float
    se_avg_utility: float
    alt_convention_utility: float
    mean_max_quality: float
    se_max_quality: float
    mean_items_explored: float
    runs: int


@dataclasses.dataclass(frozen=True)
class ReplicationTrace:
    """Per-round traces of one replication (arrays of length rounds)."""

    utility: np.ndarray
    alt_utility: np.ndarray
    max_quality: np.ndarray
    items_explored: np.ndarray


@dataclasses.dataclass
class SimBatch:
    """Per-replication checkpoint matrices; rows are replications in order."""

    t_grid: np.ndarray
    utility_outside: np.ndarray
    utility_must: np.ndarray
    max_quality: np.ndarray
    items_explored: np.ndarray
    probe_rounds: np.ndarray
    probe_utility: np.ndarray
    discovery_round: np.ndarray | None = None
    discovery_count: np.ndarray | None = None
    discovery_value_sum: np.ndarray | None = None


def _stream_seed(config: WorldConfig) -> int:
    """Master seed of the RNG stream; salted per-config when CRN is off."""
    seed = config.seed & _SEED_MASK
    if config.common_random_numbers:
        return seed
    desc = f"{config.sigma!r}|{config.cost!r}|{config.model}|{config.diamond!r}"
    salt = int.from_bytes(hashlib.sha256(desc.encode()).digest()[:8], "big")
    return (seed ^ salt) & _SEED_MASK


class RoundSampler:
    """Keyed draws for one (replication, round); owns the true qualities."""

    def __init__(
        self,
        seed: int,
        replication: int,
        round_no: int,
        sigma: float,
        diamond: tuple[float, float] | None,
        qualities: list[float],
    ) -> None:
        self._seed = seed
        self._rep = replication
        self._tag = _scalar.TAG_ROUND_BASE + round_no - 1
        self._sigma = sigma
        self._sq1ms2 = math.sqrt(1.0 - sigma * sigma)
        self._diamond = diamond
        self._qualities = qualities

    def fresh(self) -> tuple[float, float]:
        iid = len(self._qualities)
        d = 0.0
        if self._diamond is not None:
            p, jump = self._diamond
            if _scalar.key_uniform(self._seed, self._rep, iid, _scalar.TAG_DIAMOND) < p:
                d = jump
        q = d + self._sq1ms2 * _scalar.key_normal(
            self._seed, self._rep, iid, _scalar.TAG_QUALITY
        )
        s = self._sigma * _scalar.key_normal(self._seed, self._rep, iid, self._tag)
        self._qualities.append(q)
        return q, s

    def explored(self, iid: int) -> float:
        return self._qualities[iid] + self._sigma * _scalar.key_normal(
            self._seed, self._rep, iid, self._tag
        )


def run_round(
    history: Sequence[PublicRecord],
    config: WorldConfig,
    round_rng: RoundSampler,
) -> tuple[SearchOutcome, list[PublicRecord]]:
    """Run one agent against the current history; return her outcome and the update.

    Revealed-quality publishes q for newly explored items; revealed-value
    adds the agent's observed value into (count, sum) for every item she
    opened, including re-openings.
    """
    beliefs = [
        belief_for_agent(rec, config.model, config.sigma, config.diamond)
        for rec in history
    ]
    fresh_index = fresh_item_index(config.sigma, config.cost, config.diamond)
    outcome = run_search(
        beliefs,
        fresh_index,
        round_rng.fresh,
        round_rng.explored,
        config.cost,
        DEFAULT_STEP_CAP,
    )
    updated: list[PublicRecord] = list(history)
    for iid, value, quality in zip(
        outcome.opened, outcome.observed_values, outcome.observed_qualities
    ):
        if iid == len(updated):  # freshly materialized this round
            if config.model == REVEALED_QUALITY:
                updated.append(RevealedQuality(quality))
            else:
                updated.append(ValueStats(1, value))
        elif config.model == REVEALED_VALUE:
            rec = updated[iid]
            assert isinstance(rec, ValueStats)
            updated[iid] = ValueStats(rec.count + 1, rec.value_sum + value)
    return outcome, updated


def _max_posterior_mean(history: Sequence[PublicRecord], config: WorldConfig) -> float:
    best = -math.inf
    for rec in history:
        if isinstance(rec, RevealedQuality):
            m = rec.quality
        elif isinstance(rec, ValueStats):
            if config.diamond is not None and config.sigma == 1.0:
                p, jump = config.diamond
                m = (
                    _scalar.diamond_theta_s(float(rec.count), rec.value_sum, p, jump)
                    * jump
                )
            else:
                m, _ = _scalar.posterior_mean_var_s(
                    float(rec.count), rec.value_sum, config.sigma
                )
        else:
            continue
        if m > best:
            best = m
    return best if best > 0.0 else 0.0


def run_replication(config: WorldConfig, replication_seed: int) -> ReplicationTrace:
    """Pure-Python reference run of one replication; bitwise matches the kernels."""
    seed = _stream_seed(config)
    T = config.rounds
    utility = np.empty(T)
    alt = np.empty(T)
    max_quality = np.empty(T)
    items = np.empty(T)
    history: list[PublicRecord] = []
    qualities: list[float] = []
    for t in range(1, T + 1):
        sampler = RoundSampler(
            seed, replication_seed, t, config.sigma, config.diamond, qualities
        )
        outcome, history = run_round(history, config, sampler)
        best = outcome.best_value
        u_outside = outcome.utility
        u_must = best - config.cost * len(outcome.opened)
        if config.utility_convention == UTILITY_OUTSIDE:
            utility[t - 1], alt[t - 1] = u_outside, u_must
        else:
            utility[t - 1], alt[t - 1] = u_must, u_outside
        max_quality[t - 1] = _max_posterior_mean(history, config)
        items[t - 1] = len(history)
    return ReplicationTrace(utility, alt, max_quality, items)


def _resolve_workers(workers: int | None) -> int:
    if workers is not None:
        if workers < 1:
            raise ConfigError("workers must be >= 1")
        return workers
    env = os.environ.get(WORKERS_ENV_VAR)
    if env:
        try:
            value = int(env)
        except ValueError as exc:
            raise ConfigError(f"{WORKERS_ENV_VAR} must be an integer") from exc
        if value < 1:
            raise ConfigError(f"{WORKERS_ENV_VAR} must be >= 1")
        return value
    return 1


def _validated_grid(t_grid: Sequence[int], rounds: int) -> np.ndarray:
    grid = np.asarray(list(t_grid), dtype=np.int64)
    if grid.size == 0:
        raise ConfigError("t_grid must be nonempty")
    if np.any(grid < 1) or np.any(grid > rounds):
        raise ConfigError("t_grid checkpoints must lie in [1, rounds]")
    if np.any(np.diff(grid) <= 0):
        raise ConfigError("t_grid must be strictly increasing")
    return grid


def default_t_grid(rounds: int, points_per_decade: int = 20) -> list[int]:
    """Geometric checkpoint grid, 20 points per decade by default."""
    ts = {1, rounds}
    j = 0
    while True:
        t = int(round(10.0 ** (j / points_per_decade)))
        if t > rounds:
            break
        ts.add(t)
        j += 1
    return sorted(ts)


def replication_matrix(
    config: WorldConfig,
    t_grid: Sequence[int],
    probe_rounds: Sequence[int] = (),
    workers: int | None = None,
    step_cap: int = DEFAULT_STEP_CAP,
) -> SimBatch:
    """Run all replications through the batch kernels.

    Returns per-replication checkpoint matrices (row r = replication r), so
    callers can form paired CRN differences; estimate_curve reduces them.
    """
    grid = _validated_grid(t_grid, config.rounds)
    probes = np.asarray(list(probe_rounds), dtype=np.int64)
    if probes.size and (np.any(np.diff(probes) <= 0) or probes[0] < 1 or probes[-1] > config.rounds):
        raise ConfigError("probe_rounds must be strictly increasing within [1, rounds]")
    seed = _stream_seed(config)
    R = config.runs
    K = grid.size
    out_uout = np.empty((R, K))
    out_umust = np.empty((R, K))
    out_m = np.empty((R, K))
    out_items = np.empty((R, K))
    out_probe = np.empty((R, probes.size))
    diamondish = config.diamond is not None and config.model == REVEALED_VALUE and config.sigma == 1.0
    out_disc_round = np.empty(R, dtype=np.int64) if diamondish else None
    out_disc_k = np.empty(R, dtype=np.int64) if diamondish else None
    out_disc_vsum = np.empty(R) if diamondish else None

    sq1ms2 = math.sqrt(1.0 - config.sigma * config.sigma)
    fresh = fresh_item_index(config.sigma, config.cost, config.diamond)
    p, jump = config.diamond if config.diamond is not None else (0.0, 1.0)

    if config.model == REVEALED_QUALITY:
        explored_offset = _scalar.resv_gauss_s(
            0.0, math.sqrt(config.sigma * config.sigma), config.cost
        )

        def run_block(lo: int, hi: int) -> int:
            return _kernels.quality_batch(
                seed, lo, hi, config.sigma, sq1ms2, config.cost, p, jump,
                config.rounds, fresh, explored_offset, step_cap, grid, probes,
                out_uout[lo:hi], out_umust[lo:hi], out_m[lo:hi],
                out_items[lo:hi], out_probe[lo:hi],
            )

    elif diamondish:

        def run_block(lo: int, hi: int) -> int:
            return _kernels.diamond_value_batch(
                seed, lo, hi, p, jump, config.cost, config.rounds, fresh,
                step_cap, grid, probes,
                out_uout[lo:hi], out_umust[lo:hi], out_m[lo:hi],
                out_items[lo:hi], out_probe[lo:hi],
                out_disc_round[lo:hi], out_disc_k[lo:hi], out_disc_vsum[lo:hi],
            )

    else:
        g_table = _kernels.fill_value_offsets(config.rounds, config.sigma, config.cost)

        def run_block(lo: int, hi: int) -> int:
            return _kernels.value_batch(
                seed, lo, hi, config.sigma, sq1ms2, config.cost, p, jump,
                config.rounds, fresh, g_table, step_cap, grid, probes,
                out_uout[lo:hi], out_umust[lo:hi], out_m[lo:hi],
                out_items[lo:hi], out_probe[lo:hi],
            )

    n_workers = min(_resolve_workers(workers), R)
    if n_workers == 1:
        codes = [run_block(0, R)]
    else:
        bounds = np.linspace(0, R, n_workers + 1).astype(int)
        with concurrent.futures.ThreadPoolExecutor(max_workers=n_workers) as pool:
            futures = [
                pool.submit(run_block, int(lo), int(hi))
                for lo, hi in zip(bounds[:-1], bounds[1:])
                if hi > lo
            ]
            codes = [f.result() for f in futures]
    if any(code == _kernels.ERR_STEP_CAP for code in codes):
        raise StepCapExceeded(f"an agent opened {step_cap} boxes without stopping")

    return SimBatch(
        t_grid=grid,
        utility_outside=out_uout,
        utility_must=out_umust,
        max_quality=out_m,
        items_explored=out_items,
        probe_rounds=probes,
        probe_utility=out_probe,
        discovery_round=out_disc_round,
        discovery_count=out_disc_k,
        discovery_value_sum=out_disc_vsum,
    )


def _mean_se(col: np.ndarray) -> tuple[float, float]:
    mean = float(np.mean(col))
    if col.size < 2:
        return mean, 0.0
    return mean, float(np.std(col, ddof=1) / math.sqrt(col.size))


def estimate_curve(
    config: WorldConfig,
    t_grid: Sequence[int] | None = None,
    workers: int | None = None,
) -> list[CurvePoint]:
    """Estimate A(sigma, T) and M(sigma, T) at each checkpoint."""
    grid = default_t_grid(config.rounds) if t_grid is None else list(t_grid)
    batch = replication_matrix(config, grid, workers=workers)
    if config.utility_convention == UTILITY_OUTSIDE:
        primary, alt = batch.utility_outside, batch.utility_must
    else:
        primary, alt = batch.utility_must, batch.utility_outside
    points = []
    for j, T in enumerate(batch.t_grid):
        mean_u, se_u = _mean_se(primary[:, j])
        mean_m, se_m = _mean_se(batch.max_quality[:, j])
        points.append(
            CurvePoint(
                sigma=config.sigma,
                T=int(T),
                mean_avg_utility=mean_u,
                se_avg_utility=se_u,
                alt_convention_utility=float(np.mean(alt[:, j])),
                mean_max_quality=mean_m,
                se_max_quality=se_m,
                mean_items_explored=float(np.mean(batch.items_explored[:, j])),
                runs=config.runs,
            )
        )
    return points
