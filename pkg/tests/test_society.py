"""The multi-round process: config validation, reference-vs-kernel agreement."""
from __future__ import annotations

import numpy as np
import pytest

from boxsearch import _kernels, _scalar
from boxsearch.beliefs import REVEALED_QUALITY, REVEALED_VALUE, ValueStats
from boxsearch.search import StepCapExceeded
from boxsearch.society import (
    UTILITY_MUST_CHOOSE,
    UTILITY_OUTSIDE,
    ConfigError,
    WorldConfig,
    _stream_seed,
    default_t_grid,
    estimate_curve,
    replication_matrix,
    run_replication,
)


def test_config_validation():
    good = dict(sigma=0.5, cost=0.1, rounds=10)
    WorldConfig(**good)
    with pytest.raises(ConfigError):
        WorldConfig(**{**good, "sigma": -0.1})
    with pytest.raises(ConfigError):
        WorldConfig(**{**good, "sigma": 1.5})
    with pytest.raises(ConfigError):
        WorldConfig(**{**good, "cost": 0.0})
    with pytest.raises(ConfigError):
        WorldConfig(**{**good, "cost": 0.4})
    with pytest.raises(ConfigError):
        WorldConfig(**{**good, "rounds": 0})
    with pytest.raises(ConfigError):
        WorldConfig(**{**good, "runs": 0})
    with pytest.raises(ConfigError):
        WorldConfig(**{**good, "model": "oracle"})
    with pytest.raises(ConfigError):
        WorldConfig(**{**good, "utility_convention": "gross"})
    with pytest.raises(ConfigError):
        WorldConfig(**{**good, "diamond": (0.0, 10.0)})
    with pytest.raises(ConfigError):
        WorldConfig(**{**good, "diamond": (0.01, 100.0)})  # p*D > cost
    with pytest.raises(ConfigError):
        WorldConfig(**{**good, "model": REVEALED_VALUE, "diamond": (0.0005, 100.0)})
    WorldConfig(**{**good, "sigma": 1.0, "model": REVEALED_VALUE,
                   "diamond": (0.0005, 100.0)})


def _running_average(per_round: np.ndarray) -> np.ndarray:
    out = np.empty_like(per_round)
    acc = 0.0
    for t, u in enumerate(per_round, start=1):
        acc += u
        out[t - 1] = acc / t
    return out


LOCKSTEP_CONFIGS = [
    WorldConfig(sigma=0.0, cost=0.1, rounds=60, runs=3),
    WorldConfig(sigma=0.5, cost=0.1, rounds=60, runs=3),
    WorldConfig(sigma=1.0, cost=0.1, rounds=60, runs=3),
    WorldConfig(sigma=0.25, cost=0.2, rounds=60, runs=3, model=REVEALED_VALUE),
    WorldConfig(sigma=1.0, cost=0.1, rounds=60, runs=3, model=REVEALED_VALUE),
    WorldConfig(sigma=0.5, cost=0.3, rounds=60, runs=3, diamond=(0.002, 100.0)),
    WorldConfig(sigma=1.0, cost=0.3, rounds=60, runs=3, model=REVEALED_VALUE,
                diamond=(0.02, 10.0)),
    WorldConfig(sigma=0.0, cost=0.3, rounds=60, runs=3, model=REVEALED_VALUE,
                diamond=(0.02, 10.0)),
]


@pytest.mark.parametrize("config", LOCKSTEP_CONFIGS, ids=lambda c: f"{c.model}-s{c.sigma}-d{bool(c.diamond)}")
def test_kernel_matches_python_reference_bitwise(config):
    grid = list(range(1, config.rounds + 1))
    batch = replication_matrix(config, grid)
    for rep in range(config.runs):
        trace = run_replication(config, rep)
        assert np.array_equal(_running_average(trace.utility), batch.utility_outside[rep])
        assert np.array_equal(_running_average(trace.alt_utility), batch.utility_must[rep])
        assert np.array_equal(trace.max_quality, batch.max_quality[rep])
        assert np.array_equal(trace.items_explored, batch.items_explored[rep])


def test_worker_count_does_not_change_results():
    config = WorldConfig(sigma=0.5, cost=0.1, rounds=80, runs=40)
    grid = [1, 10, 80]
    base = replication_matrix(config, grid, workers=1)
    for workers in (2, 3, 7):
        other = replication_matrix(config, grid, workers=workers)
        assert np.array_equal(base.utility_outside, other.utility_outside)
        assert np.array_equal(base.utility_must, other.utility_must)
        assert np.array_equal(base.max_quality, other.max_quality)
        assert np.array_equal(base.items_explored, other.items_explored)


def test_workers_env_var(monkeypatch):
    config = WorldConfig(sigma=0.5, cost=0.1, rounds=20, runs=10)
    base = replication_matrix(config, [20], workers=1)
    monkeypatch.setenv("BOXSEARCH_WORKERS", "3")
    other = replication_matrix(config, [20])
    assert np.array_equal(base.utility_outside, other.utility_outside)
    monkeypatch.setenv("BOXSEARCH_WORKERS", "zero")
    with pytest.raises(ConfigError):
        replication_matrix(config, [20])


def test_stream_seed_crn_semantics():
    a = WorldConfig(sigma=0.0, cost=0.1, rounds=5, seed=42)
    b = WorldConfig(sigma=0.5, cost=0.1, rounds=5, seed=42)
    assert _stream_seed(a) == _stream_seed(b) == 42
    a_off = WorldConfig(sigma=0.0, cost=0.1, rounds=5, seed=42,
                        common_random_numbers=False)
    b_off = WorldConfig(sigma=0.5, cost=0.1, rounds=5, seed=42,
                        common_random_numbers=False)
    assert _stream_seed(a_off) != _stream_seed(b_off)
    assert _stream_seed(a_off) != 42


def test_crn_couples_runs_across_sigma():
    grid = [20]
    a = replication_matrix(WorldConfig(sigma=0.0, cost=0.1, rounds=20, runs=400), grid)
    b = replication_matrix(WorldConfig(sigma=0.25, cost=0.1, rounds=20, runs=400), grid)
    corr = np.corrcoef(a.utility_outside[:, 0], b.utility_outside[:, 0])[0, 1]
    assert corr > 0.3  # shared quality draws couple the runs


def test_probe_rounds_match_running_average_increments():
    config = WorldConfig(sigma=0.5, cost=0.1, rounds=6, runs=30)
    grid = [1, 2, 3, 4, 5, 6]
    batch = replication_matrix(config, grid, probe_rounds=grid)
    avg = batch.utility_outside
    t = np.arange(1, 7)
    per_round = np.empty_like(avg)
    per_round[:, 0] = avg[:, 0]
    per_round[:, 1:] = avg[:, 1:] * t[1:] - avg[:, :-1] * t[:-1]
    assert np.allclose(per_round, batch.probe_utility, rtol=1e-10, atol=1e-12)


def test_step_cap_propagates():
    config = WorldConfig(sigma=1.0, cost=0.1, rounds=3, runs=50)
    with pytest.raises(StepCapExceeded):
        replication_matrix(config, [3], step_cap=1)


def test_estimate_curve_shape_and_fields():
    config = WorldConfig(sigma=0.5, cost=0.1, rounds=30, runs=25)
    points = estimate_curve(config)
    grid = default_t_grid(30)
    assert [pt.T for pt in points] == grid
    for pt in points:
        assert pt.runs == 25
        assert pt.sigma == 0.5
        assert pt.se_avg_utility >= 0.0
        assert pt.se_max_quality >= 0.0
        assert pt.mean_items_explored >= 1.0


def test_default_t_grid():
    grid = default_t_grid(100)
    assert grid[0] == 1 and grid[-1] == 100
    assert all(a < b for a, b in zip(grid, grid[1:]))
    assert {1, 10, 100}.issubset(grid)
    assert default_t_grid(1) == [1]


def test_grid_validation():
    config = WorldConfig(sigma=0.5, cost=0.1, rounds=10, runs=5)
    with pytest.raises(ConfigError):
        replication_matrix(config, [])
    with pytest.raises(ConfigError):
        replication_matrix(config, [0, 5])
    with pytest.raises(ConfigError):
        replication_matrix(config, [5, 5])
    with pytest.raises(ConfigError):
        replication_matrix(config, [5, 11])


def test_utility_conventions_coincide_when_best_is_positive():
    # the policy stops only once the best value clears the positive fresh
    # index, so the outside option never binds
    config = WorldConfig(sigma=0.5, cost=0.1, rounds=40, runs=60)
    batch = replication_matrix(config, [40])
    assert np.array_equal(batch.utility_outside, batch.utility_must)


def test_max_quality_nondecreasing_under_revealed_quality():
    config = WorldConfig(sigma=0.5, cost=0.1, rounds=50, runs=40)
    batch = replication_matrix(config, list(range(1, 51)))
    diffs = np.diff(batch.max_quality, axis=1)
    assert np.all(diffs >= 0.0)


def test_revealed_value_reopen_accumulates_counts():
    config = WorldConfig(sigma=0.5, cost=0.1, rounds=30, runs=2,
                         model=REVEALED_VALUE)
    from boxsearch.society import RoundSampler, run_round

    seed = _stream_seed(config)
    history, qualities = [], []
    total_opens = 0
    for t in range(1, config.rounds + 1):
        sampler = RoundSampler(seed, 0, t, config.sigma, None, qualities)
        outcome, history = run_round(history, config, sampler)
        total_opens += len(outcome.opened)
    assert sum(rec.count for rec in history) == total_opens
    assert any(rec.count > 1 for rec in history)  # re-opening does happen


def test_diamond_discovery_outputs():
    config = WorldConfig(sigma=1.0, cost=0.3, rounds=200, runs=200,
                         model=REVEALED_VALUE, diamond=(0.02, 10.0))
    batch = replication_matrix(config, [200])
    assert batch.discovery_round is not None
    found = batch.discovery_round > 0
    assert found.any()
    assert np.all(batch.discovery_round[found] <= 200)
    assert np.all(batch.discovery_count[found] >= 1)
    # discovered diamonds keep attracting opens, so their average observed
    # value should sit near D for most runs
    vbar = batch.discovery_value_sum[found] / batch.discovery_count[found]
    assert np.mean((vbar > 5.0) & (vbar < 15.0)) > 0.9
