"""Diffusion broadening of nanoscale NMR lines and fitting D from depth scans.

The broadening of a line detected from a sensor at depth d is 2 D / d^2.
With D in nm^2/us and d in nm that is a rate in 1/us; it is reported in Hz
as an ordinary frequency.  Whether the rate was meant as angular frequency
is ambiguous; ``convention="angular"`` divides by 2 pi instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .core import NvSensor, SampleModel

CONVENTIONS = ("ordinary", "angular")


class UnfittableError(ValueError):
    pass


def _scale(convention):
    if convention == "ordinary":
        return 1e6
    if convention == "angular":
        return 1e6 / (2 * math.pi)
    raise ValueError(f"convention must be one of {CONVENTIONS}, got {convention!r}")


def broadening(D, depth_nm, convention="ordinary"):
    """Diffusion broadening in Hz for diffusivity ``D`` (nm^2/us) at ``depth_nm``."""
    if not depth_nm > 0:
        raise ValueError(f"depth must be positive, got {depth_nm}")
    if D < 0:
        raise ValueError("D must be non-negative")
    return 2.0 * D / depth_nm**2 * _scale(convention)


def lifetime_linewidth(t1_ms):
    """Lorentzian FWHM (Hz) of a signal decaying as exp(-t/T1)."""
    return 1.0 / (math.pi * t1_ms * 1e-3)


@dataclass(frozen=True)
class DepthBroadeningPoint:
    depth_nm: float
    broadening_hz: float
    broadening_err_hz: float | None = None

    def __post_init__(self):
        if not self.depth_nm > 0:
            raise ValueError("depth_nm must be positive")
        if not self.broadening_hz >= 0:
            raise ValueError("broadening_hz must be non-negative")
        if self.broadening_err_hz is not None and not self.broadening_err_hz > 0:
            raise ValueError("broadening_err_hz must be positive when given")


@dataclass(frozen=True)
class DiffusionFit:
    D: float
    ci_low: float
    ci_high: float
    n_used: int
    n_censored: int
    convention: str
    censoring: str
    confidence: float = 0.95
    bootstrap_samples: int = 0

    @property
    def ci_width(self):
        return self.ci_high - self.ci_low

    def to_dict(self):
        return {
            "D_nm2_per_us": self.D,
            "ci_low_nm2_per_us": self.ci_low,
            "ci_high_nm2_per_us": self.ci_high,
            "confidence": self.confidence,
            "n_used": self.n_used,
            "n_censored": self.n_censored,
            "convention": self.convention,
            "censoring": self.censoring,
            "bootstrap_samples": self.bootstrap_samples,
        }


def _fit_D(depth, y, err, censored, floor_hz, scale):
    """Least-squares estimate of D from arrays; censored points are upper bounds."""
    x = 2.0 / depth**2 * scale  # broadening per unit D
    det = ~censored
    if det.sum() == 0:
        raise UnfittableError("all points are at or below the detection floor")

    have_err = err is not None and np.all(np.isfinite(err))

    def objective(D):
        model = x * D
        if have_err:
            sigma = err
        else:
            # multiplicative noise: residuals relative to the model
            sigma = np.maximum(model, 1e-300)
        r = (y[det] - model[det]) / sigma[det]
        # a censored point only costs something if the model rises above the floor
        over = np.maximum(model[censored] - floor_hz, 0.0) / sigma[censored]
        return np.sum(r * r) + np.sum(over * over)

    # closed-form starting point from the detected points
    D0 = np.sum(x[det] * y[det]) / np.sum(x[det] ** 2)
    if have_err and not censored.any():
        w = 1.0 / err**2
        return float(np.sum(w * x * y) / np.sum(w * x * x))
    if not have_err and not censored.any():
        # minimiser of sum (y/(x D) - 1)^2 over D
        r = y / x
        if np.sum(r) == 0:
            return 0.0
        return float(np.sum(r * r) / np.sum(r))
    res = optimize.minimize_scalar(
        objective, bounds=(D0 * 1e-3, D0 * 1e3 + 1e-12), method="bounded",
        options={"xatol": 1e-12 * max(D0, 1e-12)},
    )
    return float(res.x)


def _relative_scatter(depth, y, censored, D, scale):
    """Sample standard deviation of detected points relative to the model."""
    x = 2.0 / depth**2 * scale
    det = ~censored
    n = int(det.sum())
    if n < 2 or D <= 0:
        return 0.0
    r = y[det] / (x[det] * D) - 1.0
    return float(np.sqrt(np.sum(r * r) / (n - 1)))


def _parametric_draws(depth, y, err, censored, floor_hz, censoring, scale, D, n_boot, rng):
    """Refit D to data simulated from the fitted model, floor included.

    The noise is the stated error bars, or otherwise the relative scatter
    of the detected points.  Without error bars the scatter itself is
    uncertain, so each replicate draws its own scale from the chi-square
    law with n - 1 degrees of freedom; fewer detected points then give
    heavier tails, as they should.
    """
    x = 2.0 / depth**2 * scale
    model = x * D
    n_det = int((~censored).sum())
    s = None if err is not None else _relative_scatter(depth, y, censored, D, scale)
    eps = rng.standard_normal((n_boot, len(depth)))
    chi = rng.chisquare(max(n_det - 1, 1), n_boot)
    draws = []
    for b in range(n_boot):
        if err is not None:
            sigma = err
        else:
            s_b = s * math.sqrt(max(n_det - 1, 1) / chi[b])
            sigma = s_b * model
        yb = np.maximum(model + sigma * eps[b], 0.0)
        cb = yb <= floor_hz if censoring != "none" else np.zeros(len(yb), dtype=bool)
        if (~cb).sum() < 1:
            continue
        if censoring == "drop":
            keep = ~cb
            draws.append(_fit_D(depth[keep], yb[keep], None if err is None else err[keep],
                                cb[keep], floor_hz, scale))
        else:
            draws.append(_fit_D(depth, yb, err, cb, floor_hz, scale))
    return draws


def _pairs_draws(depth, y, err, censored, floor_hz, scale, n_boot, rng):
    draws = []
    n = len(depth)
    for _ in range(n_boot):
        idx = rng.integers(0, n, n)
        if (~censored[idx]).sum() == 0:
            continue
        e = err[idx] if err is not None else None
        draws.append(_fit_D(depth[idx], y[idx], e, censored[idx], floor_hz, scale))
    return draws


def fit_diffusion(
    points,
    floor_hz=0.0,
    censoring="upper-bound",
    convention="ordinary",
    n_boot=1000,
    confidence=0.95,
    seed=0,
    bootstrap="parametric",
):
    """Fit D (nm^2/us) to broadening-vs-depth data.

    Points with broadening at or below ``floor_hz`` are censored.  With
    ``censoring="upper-bound"`` they only constrain the fit by requiring the
    model not to exceed the floor; ``"drop"`` ignores them; ``"none"`` fits
    every point as measured.  Without error bars, residuals are taken
    relative to the model (multiplicative noise).

    The confidence interval is a percentile bootstrap.  ``"parametric"``
    resimulates the data, noise and floor from the fit; ``"pairs"``
    resamples points with replacement, which is unreliable for the few
    points a depth scan usually has.
    """
    if censoring not in ("upper-bound", "drop", "none"):
        raise ValueError(f"unknown censoring mode {censoring!r}")
    if bootstrap not in ("parametric", "pairs"):
        raise ValueError(f"unknown bootstrap {bootstrap!r}")
    scale = _scale(convention)
    pts = list(points)
    depth = np.array([p.depth_nm for p in pts], dtype=float)
    y = np.array([p.broadening_hz for p in pts], dtype=float)
    errs = [p.broadening_err_hz for p in pts]
    err = None if any(e is None for e in errs) else np.array(errs, dtype=float)

    if censoring == "none":
        censored = np.zeros(len(pts), dtype=bool)
    else:
        censored = y <= floor_hz
    n_det = int((~censored).sum())
    if n_det < 2:
        raise UnfittableError(f"need at least 2 points above the floor, have {n_det}")

    if censoring == "drop":
        keep = ~censored
        depth, y = depth[keep], y[keep]
        err = err[keep] if err is not None else None
        censored = censored[keep]

    D = _fit_D(depth, y, err, censored, floor_hz, scale)

    lo = hi = D
    n_ok = 0
    if n_boot > 0:
        rng = np.random.default_rng(seed)
        if bootstrap == "parametric":
            draws = _parametric_draws(depth, y, err, censored, floor_hz, censoring, scale, D, n_boot, rng)
        else:
            draws = _pairs_draws(depth, y, err, censored, floor_hz, scale, n_boot, rng)
        if draws:
            alpha = (1 - confidence) / 2
            lo, hi = np.quantile(draws, [alpha, 1 - alpha])
            n_ok = len(draws)
    return DiffusionFit(
        D=D, ci_low=float(min(lo, D)), ci_high=float(max(hi, D)),
        n_used=n_det, n_censored=len(pts) - n_det,
        convention=convention, censoring=censoring,
        confidence=confidence, bootstrap_samples=n_ok,
    )


def synthetic_points(D, depths_nm, rel_noise=0.0, rng=None, convention="ordinary", with_errors=False):
    """Broadening data from the pure diffusion model with multiplicative Gaussian noise."""
    pts = []
    for d in depths_nm:
        b = broadening(D, d, convention)
        if rel_noise and rng is not None:
            b = max(b * (1 + rel_noise * rng.standard_normal()), 0.0)
        err = rel_noise * b if with_errors and rel_noise else None
        pts.append(DepthBroadeningPoint(float(d), float(b), err if err else None))
    return pts


@dataclass(frozen=True)
class LinewidthBudget:
    intrinsic_hz: float
    diffusion_hz: float
    lifetime_hz: float
    total_hz: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "total_hz", self.intrinsic_hz + self.diffusion_hz + self.lifetime_hz)

    def to_dict(self):
        return {
            "intrinsic_hz": self.intrinsic_hz,
            "diffusion_hz": self.diffusion_hz,
            "lifetime_hz": self.lifetime_hz,
            "total_hz": self.total_hz,
        }


def combined_linewidth(sensor: NvSensor, sample: SampleModel, convention="ordinary"):
    """Sum of intrinsic, diffusion and T1-lifetime widths (Hz), with the breakdown.

    Widths of independent exponential decays add linearly for Lorentzians.
    """
    if math.isinf(sensor.depth_nm):
        diff = 0.0
    else:
        diff = broadening(sample.diffusion_nm2_per_us, sensor.depth_nm, convention)
    return LinewidthBudget(
        intrinsic_hz=sample.intrinsic_linewidth_hz,
        diffusion_hz=diff,
        lifetime_hz=lifetime_linewidth(sensor.t1_ms),
    )
