import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nvcorr.core import NvSensor, SampleModel
from nvcorr.diffusion import (
    DepthBroadeningPoint,
    UnfittableError,
    broadening,
    combined_linewidth,
    fit_diffusion,
    synthetic_points,
)

DEPTHS = (2, 3, 4, 5, 7, 10)


def test_broadening_values():
    assert broadening(0.0, 5.0) == 0.0
    assert broadening(0.15, 5.0) == pytest.approx(12e3, rel=1e-12)
    assert broadening(0.15, 5.0, "angular") == pytest.approx(12e3 / (2 * math.pi), rel=1e-12)


@given(D=st.floats(0, 10), d=st.floats(0.1, 100))
def test_inverse_square_scaling(D, d):
    assert broadening(D, d) == pytest.approx(4 * broadening(D, 2 * d), rel=1e-12)


def test_broadening_domain():
    for d in (0.0, -1.0):
        with pytest.raises(ValueError):
            broadening(0.1, d)
    with pytest.raises(ValueError):
        broadening(0.1, 5, "radians")


def test_point_validation():
    with pytest.raises(ValueError):
        DepthBroadeningPoint(0.0, 1.0)
    with pytest.raises(ValueError):
        DepthBroadeningPoint(1.0, -1.0)


@pytest.mark.parametrize("convention", ["ordinary", "angular"])
def test_noiseless_round_trip(convention):
    fit = fit_diffusion(synthetic_points(0.15, DEPTHS, convention=convention), convention=convention, n_boot=0)
    assert fit.D == pytest.approx(0.15, rel=1e-6)
    assert fit.convention == convention


def test_weighted_round_trip():
    pts = [DepthBroadeningPoint(p.depth_nm, p.broadening_hz, 100.0) for p in synthetic_points(0.15, DEPTHS)]
    assert fit_diffusion(pts, n_boot=0).D == pytest.approx(0.15, rel=1e-6)


@settings(max_examples=25, deadline=None)
@given(c=st.floats(1e-3, 1e3))
def test_scale_consistency(c):
    rng = np.random.default_rng(0)
    pts = synthetic_points(0.15, DEPTHS, 0.2, rng)
    scaled = [DepthBroadeningPoint(p.depth_nm, c * p.broadening_hz) for p in pts]
    assert fit_diffusion(scaled, n_boot=0).D == pytest.approx(c * fit_diffusion(pts, n_boot=0).D, rel=1e-9)


def test_noisy_fit_within_0_04():
    hits = 0
    for seed in range(200):
        pts = synthetic_points(0.15, DEPTHS, 0.2, np.random.default_rng(seed))
        fit = fit_diffusion(pts, n_boot=0)
        hits += abs(fit.D - 0.15) <= 0.04
    assert hits >= 180


def test_floor_censors_deep_points():
    floor = 5e3
    cut = math.sqrt(2 * 0.15 / floor * 1e6)
    assert cut == pytest.approx(7.746, abs=1e-3)
    pts = synthetic_points(0.15, DEPTHS)
    fit = fit_diffusion(pts, floor_hz=floor, n_boot=0)
    assert fit.n_censored == sum(d >= cut for d in DEPTHS)
    assert fit.D == pytest.approx(0.15, rel=0.10)


@pytest.mark.parametrize("mode", ["upper-bound", "drop"])
def test_censored_noisy_recovery(mode):
    pts = synthetic_points(0.15, DEPTHS, 0.2, np.random.default_rng(7))
    fit = fit_diffusion(pts, floor_hz=5e3, censoring=mode, n_boot=200)
    assert fit.ci_low <= fit.D <= fit.ci_high
    assert abs(fit.D - 0.15) <= 0.04


@pytest.mark.parametrize("mode", ["drop", "upper-bound"])
def test_ci_width_grows_with_floor(mode):
    # A bootstrap interval is itself random, so the width ordering is
    # checked on the average over synthetic data sets.
    floors = (0.0, 7e3, 1.3e4, 2e4)
    widths = np.zeros(len(floors))
    for seed in range(20):
        pts = synthetic_points(0.15, DEPTHS, 0.2, np.random.default_rng(seed))
        widths += [fit_diffusion(pts, floor_hz=f, censoring=mode, n_boot=300, seed=seed).ci_width for f in floors]
    assert np.all(np.diff(widths) >= 0)


def test_parametric_interval_covers_truth():
    hits = 0
    for seed in range(60):
        pts = synthetic_points(0.15, DEPTHS, 0.2, np.random.default_rng(seed))
        fit = fit_diffusion(pts, floor_hz=5e3, n_boot=200, seed=seed)
        hits += fit.ci_low <= 0.15 <= fit.ci_high
    assert hits >= 48


def test_pairs_bootstrap_available():
    pts = synthetic_points(0.15, DEPTHS, 0.2, np.random.default_rng(4))
    fit = fit_diffusion(pts, bootstrap="pairs", n_boot=200)
    assert fit.ci_low <= fit.D <= fit.ci_high
    with pytest.raises(ValueError):
        fit_diffusion(pts, bootstrap="jackknife")


def test_bootstrap_is_seeded():
    pts = synthetic_points(0.15, DEPTHS, 0.2, np.random.default_rng(2))
    assert fit_diffusion(pts, seed=5) == fit_diffusion(pts, seed=5)


def test_all_censored_is_unfittable():
    pts = synthetic_points(0.15, DEPTHS)
    with pytest.raises(UnfittableError):
        fit_diffusion(pts, floor_hz=1e9)
    with pytest.raises(UnfittableError):
        fit_diffusion(pts[:1])


def test_linewidth_budget_no_diffusion():
    b = combined_linewidth(NvSensor(5.0, 2.1, 10.0), SampleModel(intrinsic_linewidth_hz=40.0))
    assert b.lifetime_hz == pytest.approx(151.58, abs=0.01)
    assert b.diffusion_hz == 0.0
    assert b.total_hz == pytest.approx(191.6, abs=0.05)


def test_linewidth_budget_diffusion_dominated():
    b = combined_linewidth(NvSensor(3.9, 2.1, 10.0), SampleModel(diffusion_nm2_per_us=0.15, intrinsic_linewidth_hz=40.0))
    assert b.total_hz == pytest.approx(19.9e3, rel=0.01)
    assert b.diffusion_hz > 0.95 * b.total_hz


def test_linewidth_budget_infinite_depth():
    b = combined_linewidth(NvSensor(math.inf, 2.1, 10.0), SampleModel(diffusion_nm2_per_us=0.15, intrinsic_linewidth_hz=40.0))
    assert b.total_hz == pytest.approx(40 + 1 / (math.pi * 2.1e-3))


@settings(max_examples=50, deadline=None)
@given(d1=st.floats(1, 50), d2=st.floats(1, 50), D1=st.floats(0, 1), D2=st.floats(0, 1))
def test_budget_monotonicity(d1, d2, D1, D2):
    def total(d, D):
        return combined_linewidth(NvSensor(d, 2.1, 10.0), SampleModel(diffusion_nm2_per_us=D)).total_hz

    lo, hi = sorted((d1, d2))
    assert total(hi, D1) <= total(lo, D1) + 1e-9
    a, b = sorted((D1, D2))
    assert total(d1, a) <= total(d1, b) + 1e-9
