"""Maps society-visible history to an agent's per-item value belief.

Two information models: revealed-quality (exploring an item publishes its
quality q_i) and revealed-value (it publishes only the realized value, so
later agents carry the conjugate-normal posterior from the running count
and sum). The diamond extension replaces the Gaussian quality prior with a
two-point jump mixed into unit noise; its posterior is a single weight
theta updated in log space.
"""
from __future__ import annotations

import dataclasses
import math
from typing import Union

from . import _scalar
from .gauss import GaussianSpec
from .reservation import DiamondMixture, Gaussian, Point, ValueBelief

REVEALED_QUALITY = "revealed-quality"
REVEALED_VALUE = "revealed-value"
MODELS = (REVEALED_QUALITY, REVEALED_VALUE)


class UnsupportedModelError(ValueError):
    """Raised for (model, sigma, diamond) combinations the theory does not define."""


@dataclasses.dataclass(frozen=True)
class Unexplored:
    pass


@dataclasses.dataclass(frozen=True)
class RevealedQuality:
    quality: float


@dataclasses.dataclass(frozen=True)
class ValueStats:
    """Sufficient statistic (count, sum) for the observed values of one item."""

    count: int
    value_sum: float

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ValueError("ValueStats requires count >= 1")

    @property
    def average(self) -> float:
        return self.value_sum / self.count


PublicRecord = Union[Unexplored, RevealedQuality, ValueStats]


@dataclasses.dataclass(frozen=True)
class DiamondPosterior:
    """Posterior weight on the jump component of a diamond-model item."""

    theta: float


QualityPosterior = Union[GaussianSpec, DiamondPosterior]


def posterior_quality_gaussian(k: int, avg_value: float, sigma: float) -> GaussianSpec:
    """Conjugate posterior over q ~ N(0, 1-sigma^2) given k values averaging avg_value.

    N( avg*(1-s^2) / ((1-s^2) + s^2/k),  (1-s^2)*s^2 / (k*(1-s^2) + s^2) ).
    Posterior variance is strictly decreasing in k. Exact degenerate limits
    at both sigma endpoints.
    """
    if k < 1:
        raise ValueError("posterior_quality_gaussian requires k >= 1")
    m, v = _scalar.posterior_mean_var_s(float(k), float(k) * avg_value, sigma)
    return GaussianSpec(m, v)


def posterior_diamond_theta(
    k: int, avg_value: float, p: float, jump: float, sigma: float
) -> float:
    """Posterior probability that an item carries the jump D, from k unit-noise values.

    Defined only at sigma = 1, where observed values are d_i + N(0,1) draws:
    logit(theta) = logit(p) + k*D*(2*avg - D)/2, evaluated in log space so
    that jump-scale exponents never overflow.
    """
    if sigma != 1.0:
        raise UnsupportedModelError("diamond value posterior is defined only at sigma = 1")
    if k < 1:
        raise ValueError("posterior_diamond_theta requires k >= 1")
    if not 0.0 < p < 1.0:
        raise ValueError("posterior_diamond_theta requires p in (0, 1)")
    return _scalar.diamond_theta_s(float(k), float(k) * avg_value, p, jump)


def belief_for_agent(
    record: PublicRecord,
    model: str,
    sigma: float,
    diamond: tuple[float, float] | None = None,
) -> ValueBelief:
    """Assemble the value belief an agent holds about one item.

    The belief is over the agent's own next value draw, so explored items
    re-add the subjective variance sigma^2 on top of the quality posterior.
    """
    if model not in MODELS:
        raise ValueError(f"model must be one of {MODELS}")
    if isinstance(record, Unexplored):
        if diamond is None:
            return Gaussian(GaussianSpec(0.0, 1.0))
        p, jump = diamond
        return DiamondMixture(p, jump, GaussianSpec(0.0, 1.0))

    if isinstance(record, RevealedQuality):
        if model != REVEALED_QUALITY:
            raise ValueError("RevealedQuality record under the revealed-value model")
        if sigma == 0.0:
            return Point(record.quality)
        return Gaussian(GaussianSpec(record.quality, sigma * sigma))

    if isinstance(record, ValueStats):
        if model != REVEALED_VALUE:
            raise ValueError("ValueStats record under the revealed-quality model")
        if diamond is not None:
            if sigma == 1.0:
                theta = _scalar.diamond_theta_s(
                    float(record.count), record.value_sum, diamond[0], diamond[1]
                )
                return DiamondMixture(theta, diamond[1], GaussianSpec(0.0, 1.0))
            if sigma == 0.0:
                # values reveal q exactly; diamondness is subsumed by q itself
                m, _ = _scalar.posterior_mean_var_s(
                    float(record.count), record.value_sum, sigma
                )
                return Point(m)
            raise UnsupportedModelError(
                "diamond + revealed-value is defined only at sigma in {0, 1}"
            )
        m, v = _scalar.posterior_mean_var_s(float(record.count), record.value_sum, sigma)
        total_var = v + sigma * sigma
        if total_var == 0.0:
            return Point(m)
        return Gaussian(GaussianSpec(m, total_var))

    raise TypeError(f"unknown record variant: {record!r}")


def diamond_theta_floor(jump: float) -> float:
    """1 - 1/(exp(D^2/6) + 1), via a stable sigmoid so D = 100 cannot overflow."""
    return _scalar.sigmoid_s(jump * jump / 6.0)
