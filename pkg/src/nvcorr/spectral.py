"""Spectrum estimation, lineshape fitting and decay-envelope fitting."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, signal

UNIFORM_RTOL = 1e-9
MAX_ITER = 500
PARAM_TOL = 1e-10
DOMINANCE = 5.0
# FWHM of sinc^2, in units of 1/T
RECT_WINDOW_FWHM = 0.885892941378904


class FitError(RuntimeError):
    """Fit could not be performed or did not converge.

    ``last`` holds the final iterate when the optimizer gave up.
    """

    def __init__(self, msg, last=None):
        super().__init__(msg)
        self.last = last


class FitRejected(FitError):
    """Input does not satisfy the fit's preconditions."""


@dataclass(frozen=True)
class TimeSeries:
    t_us: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t_us, dtype=float)
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "t_us", t)
        object.__setattr__(self, "values", v)
        if t.ndim != 1 or t.shape != v.shape:
            raise ValueError("t_us and values must be 1-D arrays of equal length")
        if len(t) < 4:
            raise ValueError("a time series needs at least 4 samples")
        dt = np.diff(t)
        if np.any(dt <= 0):
            raise ValueError("t_us must be strictly increasing")
        step = (t[-1] - t[0]) / (len(t) - 1)
        if np.max(np.abs(dt - step)) > UNIFORM_RTOL * max(abs(t[-1]), step) + UNIFORM_RTOL * step * len(t):
            raise ValueError("t_us must be uniformly spaced")

    @property
    def dt_us(self):
        return (self.t_us[-1] - self.t_us[0]) / (len(self.t_us) - 1)

    @property
    def fs_hz(self):
        return 1e6 / self.dt_us

    @property
    def duration_us(self):
        return self.t_us[-1] - self.t_us[0] + self.dt_us

    def __len__(self):
        return len(self.t_us)


@dataclass(frozen=True)
class Spectrum:
    f_hz: np.ndarray
    power: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.f_hz, dtype=float)
        p = np.asarray(self.power, dtype=float)
        object.__setattr__(self, "f_hz", f)
        object.__setattr__(self, "power", p)
        if f.shape != p.shape or f.ndim != 1:
            raise ValueError("f_hz and power must be 1-D arrays of equal length")
        if np.any(p < 0):
            raise ValueError("power must be non-negative")
        if np.any(np.diff(f) <= 0):
            raise ValueError("frequency grid must be ascending")

    @property
    def df_hz(self):
        return self.f_hz[1] - self.f_hz[0]

    def peak(self):
        i = int(np.argmax(self.power))
        return self.f_hz[i], self.power[i]


@dataclass(frozen=True)
class LineFit:
    f0_hz: float
    fwhm_hz: float
    amplitude: float
    residual_norm: float
    model: str = "lorentzian"

    def __post_init__(self):
        if not self.fwhm_hz > 0:
            raise ValueError("fwhm_hz must be positive")
        if not self.residual_norm >= 0:
            raise ValueError("residual_norm must be non-negative")

    def to_dict(self):
        return {
            "f0_hz": self.f0_hz,
            "fwhm_hz": self.fwhm_hz,
            "amplitude": self.amplitude,
            "residual_norm": self.residual_norm,
            "model": self.model,
        }


def periodogram(ts: TimeSeries, zero_pad_factor=1):
    """One-sided power spectrum of the mean-removed series.

    Power is normalised so that ``power.sum()`` equals the energy
    ``sum((x - mean)**2)`` of the series, for any padding factor.
    """
    if zero_pad_factor < 1:
        raise ValueError("zero_pad_factor must be >= 1")
    x = ts.values - ts.values.mean()
    n = len(x)
    m = int(round(n * zero_pad_factor))
    X = np.fft.rfft(x, m)
    p = np.abs(X) ** 2 / m
    # fold negative frequencies onto positive ones
    if m % 2 == 0:
        p[1:-1] *= 2
    else:
        p[1:] *= 2
    f = np.fft.rfftfreq(m, d=ts.dt_us * 1e-6)
    return Spectrum(f, p)


def window_fwhm_hz(duration_us):
    """FWHM contributed by a rectangular acquisition window alone."""
    return RECT_WINDOW_FWHM / (duration_us * 1e-6)


def lorentzian(f, f0, fwhm, amplitude):
    x = 2.0 * (f - f0) / fwhm
    return amplitude / (1.0 + x * x)


def gaussian(f, f0, fwhm, amplitude):
    x = (f - f0) / fwhm
    return amplitude * np.exp(-4.0 * math.log(2.0) * x * x)


_MODELS = {"lorentzian": lorentzian, "gaussian": gaussian}


def _half_power_width(f, p, i):
    half = p[i] / 2.0
    lo = i
    while lo > 0 and p[lo] > half:
        lo -= 1
    hi = i
    while hi < len(p) - 1 and p[hi] > half:
        hi += 1
    w = f[hi] - f[lo]
    return max(w, 2 * (f[1] - f[0]))


def fit_line(spec: Spectrum, model="lorentzian", span_fwhm=5.0):
    """Least-squares lineshape fit of the dominant spectral peak.

    The fit uses points within ``span_fwhm`` half-power widths of the
    peak.  Returns a :class:`LineFit`; the amplitude is in the units of
    ``spec.power``.
    """
    try:
        shape = _MODELS[model]
    except KeyError:
        raise ValueError(f"unknown lineshape {model!r}") from None
    f, p = spec.f_hz, spec.power
    i = int(np.argmax(p))
    peak = p[i]
    med = np.median(p)
    if peak <= 0 or peak < DOMINANCE * med:
        raise FitRejected(f"no dominant peak (peak {peak:.3g} vs median {med:.3g})")

    w0 = _half_power_width(f, p, i)
    sel = np.abs(f - f[i]) <= span_fwhm * w0
    if sel.sum() < 4:
        lo, hi = max(i - 3, 0), min(i + 4, len(f))
        sel = np.zeros_like(sel)
        sel[lo:hi] = True
    # fit in scaled units so all parameters are O(1)
    x = (f[sel] - f[i]) / w0
    y = p[sel] / peak

    def resid(q):
        return shape(x, q[0], q[1], q[2]) - y

    q0 = np.array([0.0, 1.0, 1.0])
    res = optimize.least_squares(
        resid, q0,
        bounds=([-span_fwhm, 1e-6, 0.0], [span_fwhm, 10 * span_fwhm, np.inf]),
        xtol=PARAM_TOL, ftol=PARAM_TOL, gtol=PARAM_TOL, max_nfev=MAX_ITER,
    )
    f0 = f[i] + res.x[0] * w0
    fwhm = res.x[1] * w0
    amp = res.x[2] * peak
    if res.status == 0:
        raise FitError(
            f"line fit did not converge in {MAX_ITER} evaluations",
            last=dict(f0_hz=f0, fwhm_hz=fwhm, amplitude=amp),
        )
    resid_norm = float(np.linalg.norm(res.fun) * peak)
    return LineFit(float(f0), float(fwhm), float(amp), resid_norm, model)


def envelope(ts: TimeSeries):
    """Magnitude of the analytic signal of the mean-removed series."""
    x = ts.values - ts.values.mean()
    return np.abs(signal.hilbert(x))


def fit_exp_envelope(ts: TimeSeries, trim=0.05, min_extrema=10):
    """Decay time (ms) of a single-exponential envelope on an oscillating carrier.

    The envelope is the analytic-signal magnitude.  A fraction ``trim``
    is dropped at each end to avoid Hilbert-transform edge ringing.  The
    fitted model adds a noise floor in quadrature,
    sqrt(A^2 exp(-2t/tau) + c^2), so records that decay into noise are not
    read as slower decays.
    """
    x = ts.values - ts.values.mean()
    n_ext = len(signal.argrelextrema(x, np.greater)[0]) + len(signal.argrelextrema(x, np.less)[0])
    if n_ext < min_extrema:
        raise FitRejected(f"only {n_ext} envelope extrema; need {min_extrema}")
    env = np.abs(signal.hilbert(x))
    k = int(len(x) * trim)
    t = ts.t_us[k:len(x) - k] - ts.t_us[0]
    e = env[k:len(x) - k]
    span = t[-1] - t[0]

    # log-linear seed over the part of the envelope well above its floor
    good = e > 0.05 * e.max()
    if good.sum() < 3:
        good = e > 0
    slope, icpt = np.polyfit(t[good], np.log(e[good]), 1)
    if slope >= 0 or -1.0 / slope > 10 * span:
        raise FitRejected("envelope is not decaying")
    tau0 = -1.0 / slope

    def resid(q):
        return np.hypot(q[0] * np.exp(-t / q[1]), q[2]) - e

    res = optimize.least_squares(
        resid, [math.exp(icpt), tau0, e.min()],
        bounds=([0, 1e-3 * tau0, 0], [np.inf, 1e3 * tau0, np.inf]),
        xtol=PARAM_TOL, ftol=PARAM_TOL, max_nfev=MAX_ITER,
    )
    if res.status == 0:
        raise FitError("envelope fit did not converge", last=dict(tau_ms=res.x[1] / 1e3))
    tau = res.x[1]
    if tau > 10 * span:
        raise FitRejected("envelope is not decaying")
    return float(tau / 1e3)
