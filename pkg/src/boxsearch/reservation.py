"""Weitzman reservation values for every belief family the model produces.

The reservation value x* of a box with value distribution F and search cost
c solves E[max(v - x*, 0)] = c. Three families arise: Point (a revealed
quality at sigma = 0), Gaussian, and the two-component DiamondMixture.
Gaussian solves run Newton with a bisection safeguard on the closed-form
call; the mixture runs pure bisection on its strictly decreasing call.
All solves land on |call(x*) - cost| <= 1e-10 (machine residual in
practice) and are shared, compiled once, with the batch simulation kernels.
"""
from __future__ import annotations

import dataclasses
import math
from typing import Union

from . import _scalar
from .gauss import GaussianSpec

MAX_FRESH_COST = 1.0 / math.sqrt(2.0 * math.pi)


class NonConvergenceError(RuntimeError):
    """Bracketing expansion exceeded 64 doublings (should be unreachable)."""


@dataclasses.dataclass(frozen=True)
class Point:
    """A box whose value is known exactly."""

    value: float


@dataclasses.dataclass(frozen=True)
class Gaussian:
    spec: GaussianSpec


@dataclasses.dataclass(frozen=True)
class DiamondMixture:
    """theta * N(base.mean + jump, base.variance) + (1-theta) * N(base.mean, base.variance)."""

    theta: float
    jump: float
    base: GaussianSpec

    def __post_init__(self) -> None:
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError("DiamondMixture requires theta in [0, 1]")
        if not self.jump > 0.0:
            raise ValueError("DiamondMixture requires jump > 0")


ValueBelief = Union[Point, Gaussian, DiamondMixture]


def reservation_value(belief: ValueBelief, cost: float) -> float:
    """Solve E[max(v - x*, 0)] = cost for the given belief.

    Point boxes return value - cost exactly; the others solve the closed
    form to an absolute call residual of 1e-10 or better.
    """
    if not cost > 0.0 or not math.isfinite(cost):
        raise ValueError("reservation_value requires cost > 0")
    try:
        if isinstance(belief, Point):
            return belief.value - cost
        if isinstance(belief, Gaussian):
            return _scalar.resv_gauss_s(belief.spec.mean, belief.spec.sd, cost)
        if isinstance(belief, DiamondMixture):
            return _scalar.resv_mix_s(
                belief.theta, belief.jump, belief.base.mean, belief.base.sd, cost
            )
    except ValueError as exc:  # raised by the njit solvers on bracket failure
        raise NonConvergenceError(str(exc)) from exc
    raise TypeError(f"unknown belief variant: {belief!r}")


def fresh_item_index(
    sigma: float, cost: float, diamond: tuple[float, float] | None = None
) -> float:
    """Index of a never-explored item.

    Total value is N(0,1) by construction at every sigma, so the non-diamond
    answer does not depend on sigma; the diamond answer mixes in the jump
    component at weight p.
    """
    if not 0.0 <= sigma <= 1.0:
        raise ValueError("fresh_item_index requires 0 <= sigma <= 1")
    if not 0.0 < cost < MAX_FRESH_COST:
        raise ValueError(
            f"fresh_item_index requires 0 < cost < 1/sqrt(2*pi) ~= {MAX_FRESH_COST:.6f}"
        )
    if diamond is None:
        return reservation_value(Gaussian(GaussianSpec(0.0, 1.0)), cost)
    p, jump = diamond
    if not 0.0 < p < 1.0:
        raise ValueError("diamond probability must lie in (0, 1)")
    if not jump > 0.0:
        raise ValueError("diamond jump must be positive")
    if cost < p * jump:
        raise ValueError("diamond model requires cost >= p * D")
    return reservation_value(DiamondMixture(p, jump, GaussianSpec(0.0, 1.0)), cost)
