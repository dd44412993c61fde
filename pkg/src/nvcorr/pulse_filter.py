"""XY8 filter functions, coherent-phase linewidth and depth calibration."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .core import NvSensor, SampleModel, dipole_prefactor_gauss_nm3

# Integral of (1 + 3 cos^2 theta) / r^6 over the half-space z > 1 (unit depth).
# Computed numerically by scripts/derive_halfspace_constant.py; equals pi/2.
HALFSPACE_KERNEL_INTEGRAL = 1.5707963267948966

# <I_a I_b> = delta_ab / 4 for an unpolarised spin-1/2
SPIN_HALF_VARIANCE = 0.25


@dataclass(frozen=True)
class PulseSequence:
    """XY8-N: ``8 * repeats`` equally spaced pi pulses with spacing ``tau_us``.

    Pulses sit at (j - 1/2) * tau for j = 1..8N, so the sequence lasts
    8 N tau and the toggling function starts and ends with half intervals.
    """

    repeats: int
    tau_us: float

    def __post_init__(self):
        if self.repeats < 1 or int(self.repeats) != self.repeats:
            raise ValueError("repeats must be a positive integer")
        if not self.tau_us > 0:
            raise ValueError("tau_us must be positive")

    @property
    def n_pulses(self):
        return 8 * self.repeats

    @property
    def duration_us(self):
        return 8 * self.repeats * self.tau_us

    @property
    def center_frequency_hz(self):
        return 1e6 / (2 * self.tau_us)

    def pulse_times_us(self):
        return (np.arange(self.n_pulses) + 0.5) * self.tau_us

    def segment_edges_us(self):
        return np.concatenate([[0.0], self.pulse_times_us(), [self.duration_us]])

    @classmethod
    def resonant(cls, repeats, f_hz):
        """Sequence whose first filter harmonic sits at ``f_hz``."""
        return cls(repeats, 1e6 / (2 * f_hz))


# 1/(2 * 1.7 MHz): the pulse spacing resonant with
# protons at 400 G.
DEFAULT_TAU_US = 1e6 / (2 * 1.7e6)


def toggling_function(seq: PulseSequence, t_us):
    """Sign (+1/-1) of the sensor's field response at times ``t_us``; 0 outside."""
    t = np.asarray(t_us, dtype=float)
    k = np.searchsorted(seq.pulse_times_us(), t, side="right")
    y = np.where(k % 2 == 0, 1.0, -1.0)
    return np.where((t >= 0) & (t <= seq.duration_us), y, 0.0)


def _transform(seq, f_hz, t2_us=None):
    """Fourier transform of the (optionally T2-windowed) toggling function.

    Each constant segment is integrated exactly, so any pulse count works.
    Time in us, so the result is in us.
    """
    f = np.atleast_1d(np.asarray(f_hz, dtype=float)) * 1e-6  # cycles per us
    edges = seq.segment_edges_us()
    signs = np.where(np.arange(len(edges) - 1) % 2 == 0, 1.0, -1.0)
    rate = 1.0 / t2_us if t2_us else 0.0
    s = rate + 2j * np.pi * f  # shape (nf,)
    e = np.exp(-np.outer(s, edges))  # (nf, nedges)
    seg = e[:, :-1] - e[:, 1:]
    small = np.abs(s) < 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        W = (seg @ signs) / s
    if np.any(small):
        W[small] = np.sum(signs * np.diff(edges))
    return W


def filter_function(seq: PulseSequence, f_hz, t2_us=None):
    """|W(f)|^2 / T^2 for the toggling function of ``seq``.

    Non-negative, zero at f = 0, peaked near 1/(2 tau).  With ``t2_us``
    the toggling function is weighted by exp(-t/T2) before transforming.
    """
    W = _transform(seq, f_hz, t2_us)
    out = np.abs(W) ** 2 / seq.duration_us**2
    return out if np.ndim(f_hz) else float(out[0])


def _peak_fwhm(fun, f_center, f_guess_width):
    """Locate the peak of ``fun`` near ``f_center`` and return (f_peak, FWHM)."""
    grid = np.linspace(f_center - 2 * f_guess_width, f_center + 2 * f_guess_width, 4001)
    vals = fun(grid)
    i = int(np.argmax(vals))
    res = optimize.minimize_scalar(
        lambda x: -fun(np.array([x]))[0],
        bracket=(grid[max(i - 1, 0)], grid[i], grid[min(i + 1, len(grid) - 1)]),
        tol=1e-12,
    )
    f_pk = float(res.x)
    half = fun(np.array([f_pk]))[0] / 2

    def edge(direction):
        step = f_guess_width / 8
        a = f_pk
        b = f_pk + direction * step
        while fun(np.array([b]))[0] > half:
            a, b = b, b + direction * step
        return optimize.brentq(lambda x: fun(np.array([x]))[0] - half, min(a, b), max(a, b), xtol=1e-6)

    return f_pk, edge(+1) - edge(-1)


def filter_peak(seq: PulseSequence, t2_us=None):
    """Peak frequency (Hz) and FWHM (Hz) of the first filter harmonic."""
    width = 1e6 / seq.duration_us
    return _peak_fwhm(lambda f: filter_function(seq, f, t2_us), seq.center_frequency_hz, width)


def effective_linewidth(seq: PulseSequence, sensor: NvSensor):
    """FWHM in Hz of the filter peak with the sensor's T2 decay folded in."""
    return filter_peak(seq, sensor.t2_us)[1]


def brms_at_depth(sample: SampleModel, depth_nm):
    """RMS field (Gauss) along the sensor axis from an unpolarised half-space of spins.

    B_rms^2 = K rho / d^3 with K = (mu0 hbar gamma / 4 pi)^2 * 1/4 * pi/2 for the
    axis normal to the surface.
    """
    if not depth_nm > 0:
        raise ValueError(f"depth must be positive, got {depth_nm}")
    return math.sqrt(_calibration_constant(sample) * sample.density_per_nm3 / depth_nm**3)


def depth_from_brms(sample: SampleModel, brms_gauss):
    """Depth (nm) at which the half-space produces ``brms_gauss``."""
    if not brms_gauss > 0:
        raise ValueError(f"brms must be positive, got {brms_gauss}")
    return (_calibration_constant(sample) * sample.density_per_nm3 / brms_gauss**2) ** (1.0 / 3.0)


def _calibration_constant(sample):
    pref = dipole_prefactor_gauss_nm3(sample.nucleus)
    return pref**2 * SPIN_HALF_VARIANCE * HALFSPACE_KERNEL_INTEGRAL
