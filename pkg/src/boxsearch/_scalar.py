"""Scalar numba kernels shared by the reference paths and the fast engine.

Every piece of belief/index arithmetic the simulation needs exists exactly
once, here, as an ``@njit`` scalar function. The public modules (gauss,
reservation, beliefs) call these for scalar work and the replication kernels
in ``_kernels`` call the same compiled code, so the pure-Python engine and
the batch engine agree bitwise, not just to tolerance.

Also houses the counter-based RNG: every random variate is a pure function
of (seed, replication, item, tag), which is what makes common random
numbers coordinate-aligned across configurations.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

SQRT2 = math.sqrt(2.0)
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

# Tag layout for the keyed RNG. Per-round subjective draws start at
# _TAG_ROUND_BASE + (t - 1) for 1-based round t.
TAG_QUALITY = 0
TAG_DIAMOND = 1
TAG_ROUND_BASE = 2

_U64 = np.uint64
_MIX_K1 = _U64(0xBF58476D1CE4E5B9)
_MIX_K2 = _U64(0x94D049BB133111EB)
_GOLDEN = _U64(0x9E3779B97F4A7C15)
_KEY_C1 = _U64(0xD6E8FEB86659FD93)
_KEY_C2 = _U64(0xA5A5A5A5A5A5A5A5)


@njit(cache=True)
def _mix64(z):
    z = (z ^ (z >> _U64(30))) * _MIX_K1
    z = (z ^ (z >> _U64(27))) * _MIX_K2
    return z ^ (z >> _U64(31))


@njit(cache=True)
def _key(seed, rep, item, tag):
    h = _mix64(_U64(seed) + _GOLDEN)
    h = _mix64(h ^ (_U64(rep) + _MIX_K1))
    h = _mix64(h ^ (_U64(item) + _KEY_C1))
    h = _mix64(h ^ (_U64(tag) + _KEY_C2))
    return h


@njit(cache=True)
def key_uniform(seed, rep, item, tag):
    """Deterministic uniform in (0, 1), keyed by the full coordinate."""
    h = _key(seed, rep, item, tag)
    # 53-bit mantissa, offset half a ulp so 0 and 1 are unreachable
    return (np.float64(h >> _U64(11)) + 0.5) * (1.0 / 9007199254740992.0)


@njit(cache=True)
def norm_inv_cdf(p):
    """Inverse standard-normal CDF.

    Wichura's AS 241 rational approximations for p in [1.4e-11, 1-1.4e-11];
    beyond that, an asymptotic start polished by log-space Newton against
    the complementary-error CDF, which keeps full relative accuracy where
    the rational fit would need its far-tail table.
    """
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        num = (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r
                    + 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r
                  + 1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r
                + 1.3314166789178437745e2) * r + 3.3871328727963666080e0)
        den = (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r
                    + 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r
                  + 5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r
                + 4.2313330701600911252e1) * r + 1.0)
        return q * num / den
    if q < 0.0:
        side = p
    else:
        side = 1.0 - p
    lnp = math.log(side)
    r = math.sqrt(-lnp)
    if r <= 5.0:
        r = r - 1.6
        num = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r
                    + 2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r
                  + 3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r
                + 4.63033784615654529590e0) * r + 1.42343711074968357734e0)
        den = (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r
                    + 1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r
                  + 6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r
                + 2.05319162663775882187e0) * r + 1.0)
        val = num / den
    else:
        t = SQRT2 * r  # = sqrt(-2 ln p)
        z = t - (2.0 * math.log(t) + math.log(2.0 * math.pi)) / (2.0 * t)
        for _ in range(4):
            f = 0.5 * math.erfc(z / SQRT2)  # upper-tail mass at -val = lower p
            pdf = INV_SQRT_2PI * math.exp(-0.5 * z * z)
            if f <= 0.0 or pdf <= 0.0:
                break
            z = z + (math.log(f) - lnp) * f / pdf
        val = z
    if q < 0.0:
        return -val
    return val


@njit(cache=True)
def key_normal(seed, rep, item, tag):
    return norm_inv_cdf(key_uniform(seed, rep, item, tag))


@njit(cache=True)
def std_pdf_s(x):
    return INV_SQRT_2PI * math.exp(-0.5 * x * x)


@njit(cache=True)
def std_cdf_s(x):
    # complementary route: keeps relative accuracy in either tail
    return 0.5 * math.erfc(-x / SQRT2)


@njit(cache=True)
def std_sf_s(x):
    return 0.5 * math.erfc(x / SQRT2)


@njit(cache=True)
def call_std_s(x):
    """E[(X - x)+] for X ~ N(0,1)."""
    return std_pdf_s(x) - x * std_sf_s(x)


@njit(cache=True)
def gauss_call_s(mu, sd, strike):
    """E[(V - strike)+] for V ~ N(mu, sd^2); sd = 0 handled exactly."""
    if sd == 0.0:
        diff = mu - strike
        return diff if diff > 0.0 else 0.0
    return sd * call_std_s((strike - mu) / sd)


@njit(cache=True)
def resv_std_s(cost):
    """Solve call_std_s(x) = cost for the standard-normal reservation value.

    Newton with a doubling bracket and bisection safeguard; the derivative
    of the call is -sf(x), so steps are x += (f - cost)/sf. Raises only if
    the bracket fails to form within 64 doublings (unreachable for cost>0).
    """
    if not (cost > 0.0) or not math.isfinite(cost):
        raise ValueError("reservation solve needs finite cost > 0")
    # bracket: f is strictly decreasing with range (0, inf)
    lo = 0.0
    step = 1.0 + cost
    ok = False
    for _ in range(64):
        lo = lo - step
        if call_std_s(lo) >= cost:
            ok = True
            break
        step *= 2.0
    if not ok:
        raise ValueError("reservation bracket expansion failed (low side)")
    hi = 1.0
    ok = False
    for _ in range(64):
        if call_std_s(hi) <= cost:
            ok = True
            break
        hi *= 2.0
    if not ok:
        raise ValueError("reservation bracket expansion failed (high side)")
    x = 0.5 * (lo + hi)
    # relative residual target: tiny costs (cost/sd after rescaling) need it
    tol = 1e-15 + 1e-13 * cost
    for _ in range(200):
        f = call_std_s(x)
        err = f - cost
        if abs(err) <= tol:
            return x
        if err > 0.0:
            lo = x  # f too high -> root is to the right
        else:
            hi = x
        q = std_sf_s(x)
        if q > 0.0:
            x_new = x + err / q
        else:
            x_new = 0.5 * (lo + hi)
        if x_new <= lo or x_new >= hi:
            x_new = 0.5 * (lo + hi)
        if x_new == x:
            return x
        x = x_new
    return x


@njit(cache=True)
def resv_gauss_s(mu, sd, cost):
    """Reservation value of a N(mu, sd^2) box at the given search cost."""
    if sd == 0.0:
        return mu - cost
    return mu + sd * resv_std_s(cost / sd)


@njit(cache=True)
def mix_call_s(theta, jump, mu, sd, strike):
    """Call value of the two-component mixture theta*N(mu+jump,sd^2) + (1-theta)*N(mu,sd^2)."""
    return theta * gauss_call_s(mu + jump, sd, strike) + (1.0 - theta) * gauss_call_s(mu, sd, strike)


@njit(cache=True)
def resv_mix_s(theta, jump, mu, sd, cost):
    """Reservation value for the diamond mixture belief, by pure bisection.

    The mixture call is strictly decreasing in the strike and spans (0, inf),
    so bisection on a doubled bracket always converges.
    """
    if not (cost > 0.0) or not math.isfinite(cost):
        raise ValueError("reservation solve needs finite cost > 0")
    lo = mu - (1.0 + cost)
    ok = False
    step = 1.0 + cost
    for _ in range(64):
        if mix_call_s(theta, jump, mu, sd, lo) >= cost:
            ok = True
            break
        step *= 2.0
        lo -= step
    if not ok:
        raise ValueError("reservation bracket expansion failed (low side)")
    hi = mu + jump + 1.0
    ok = False
    for _ in range(64):
        if mix_call_s(theta, jump, mu, sd, hi) <= cost:
            ok = True
            break
        hi = mu + (hi - mu) * 2.0
    if not ok:
        raise ValueError("reservation bracket expansion failed (high side)")
    for _ in range(220):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if mix_call_s(theta, jump, mu, sd, mid) >= cost:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@njit(cache=True)
def posterior_mean_var_s(k, vsum, sigma):
    """Conjugate posterior (mean, var) of q ~ N(0, 1-s^2) after k values summing to vsum.

    Written over the sum rather than the average: identical algebra, one
    fewer division, and exact at both sigma endpoints.
    """
    s2 = sigma * sigma
    denom = k * (1.0 - s2) + s2
    m = vsum * (1.0 - s2) / denom
    v = (1.0 - s2) * s2 / denom
    return m, v


@njit(cache=True)
def explored_value_sd_s(k, sigma):
    """Predictive sd of the next value of a k-times-explored item (no diamond)."""
    s2 = sigma * sigma
    denom = k * (1.0 - s2) + s2
    return math.sqrt((1.0 - s2) * s2 / denom + s2)


@njit(cache=True)
def value_index_offset_s(k, sigma, cost):
    """g(k): index of a k-times-explored item minus its posterior mean.

    The predictive sd depends on k only, so index(k, vsum) = m(k, vsum) + g(k).
    """
    return resv_gauss_s(0.0, explored_value_sd_s(k, sigma), cost)


@njit(cache=True)
def sigmoid_s(x):
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


@njit(cache=True)
def diamond_theta_s(k, vsum, p, jump):
    """Posterior weight on the jump component after k unit-variance values.

    Log-space Bayes: logit(theta) = logit(p) + jump*(2*vsum - k*jump)/2,
    which never forms the overflowing density ratio directly.
    """
    logit_p = math.log(p) - math.log1p(-p)
    log_ratio = jump * (2.0 * vsum - k * jump) * 0.5
    return sigmoid_s(logit_p + log_ratio)
