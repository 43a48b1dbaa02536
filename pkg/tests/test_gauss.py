"""Gaussian moment helpers: call values and truncated means."""
from __future__ import annotations

import math

import numpy as np
import pytest
import scipy.special
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from boxsearch.gauss import (
    GaussianSpec,
    gaussian_call,
    std_cdf,
    std_pdf,
    std_sf,
    truncated_mean_above,
)

# oracle: mpmath dps=50, npdf(t)/ncdf(-t)
TRUNC_MEAN_ORACLE = {
    1.0: 1.5251352761609812091,
    5.0: 5.1865039671258421156,
    10.0: 10.098093233962511963,
    40.0: 40.024968847207263723,
    200.0: 200.00499975003124422,
}


def test_spec_validation():
    spec = GaussianSpec(0.5, 2.0)
    assert spec.sd == math.sqrt(2.0)
    with pytest.raises(ValueError):
        GaussianSpec(0.0, -1.0)
    with pytest.raises(ValueError):
        GaussianSpec(math.nan, 1.0)


def test_std_functions_match_scipy():
    # tail values amplify one-ulp argument rounding by |x|, hence 1e-12
    xs = np.linspace(-37.0, 37.0, 1481)
    assert np.allclose(std_pdf(xs), scipy.stats.norm.pdf(xs), rtol=1e-12, atol=0.0)
    assert np.allclose(std_cdf(xs), scipy.special.ndtr(xs), rtol=1e-12, atol=0.0)
    assert np.allclose(std_sf(xs), scipy.special.ndtr(-xs), rtol=1e-12, atol=0.0)


def test_call_identity_grid_exact():
    # E[(Z - t)^+] = pdf(t) - t * sf(t), checked on a wide grid; the
    # subtraction cancels ~t^2 ulps at large t, hence 1e-11
    ts = np.arange(-10.0, 10.0001, 0.25)
    got = gaussian_call(0.0, 1.0, ts)
    want = scipy.stats.norm.pdf(ts) - ts * scipy.special.ndtr(-ts)
    assert np.allclose(got, want, rtol=1e-11, atol=0.0)


@given(
    st.floats(min_value=-20.0, max_value=20.0),
    st.floats(min_value=1e-6, max_value=100.0),
    st.floats(min_value=-30.0, max_value=30.0),
)
@settings(max_examples=200, deadline=None)
def test_call_affine_reduction(mu, variance, strike):
    sd = math.sqrt(variance)
    want = sd * float(gaussian_call(0.0, 1.0, (strike - mu) / sd))
    assert float(gaussian_call(mu, variance, strike)) == pytest.approx(
        want, rel=1e-12, abs=1e-300
    )


def test_call_degenerate_variance():
    assert float(gaussian_call(2.0, 0.0, 1.5)) == 0.5
    assert float(gaussian_call(2.0, 0.0, 2.5)) == 0.0
    with pytest.raises(ValueError):
        gaussian_call(0.0, -1e-9, 0.0)


def test_call_monotone_and_convex_in_strike():
    ts = np.linspace(-6.0, 6.0, 241)
    vals = np.asarray(gaussian_call(0.0, 1.0, ts))
    diffs = np.diff(vals)
    assert np.all(diffs < 0)  # strictly decreasing
    assert np.all(np.diff(diffs) >= -1e-12)  # convex


def test_truncated_mean_matches_oracle():
    for t, want in TRUNC_MEAN_ORACLE.items():
        assert float(truncated_mean_above(0.0, 1.0, t)) == pytest.approx(want, rel=1e-12)


def test_truncated_mean_matches_scipy_moderate_range():
    ts = np.linspace(-8.0, 30.0, 400)
    got = np.asarray(truncated_mean_above(0.0, 1.0, ts))
    want = scipy.stats.norm.pdf(ts) / scipy.special.ndtr(-ts)
    assert np.allclose(got, want, rtol=1e-11, atol=0.0)


@given(
    st.floats(min_value=-5.0, max_value=5.0),
    st.floats(min_value=0.01, max_value=9.0),
    st.floats(min_value=-10.0, max_value=10.0),
)
@settings(max_examples=200, deadline=None)
def test_truncated_mean_dominates_mean_and_threshold(mu, variance, threshold):
    got = float(truncated_mean_above(mu, variance, threshold))
    assert got > threshold
    # hazard increment can underflow against mu when threshold << mu
    assert got >= mu


def test_truncated_mean_monotone_in_threshold_far_tail():
    ts = np.linspace(30.0, 2000.0, 500)
    got = np.asarray(truncated_mean_above(0.0, 1.0, ts))
    assert np.all(np.diff(got) > 0)
    assert np.all(got > ts)
    # far tail follows t + 1/t to first order
    assert np.allclose(got, ts + 1.0 / ts, rtol=1e-4)


def test_truncated_mean_rejects_degenerate_variance():
    with pytest.raises(ValueError):
        truncated_mean_above(0.0, 0.0, 1.0)
