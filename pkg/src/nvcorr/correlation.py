"""Correlation-spectroscopy signal model.

Two XY8 blocks separated by a free delay t map the nuclear phase at the
start and end of the delay onto the sensor population.  The population
oscillates at the signal frequency, damped by the sensor's T1 (the phase
is stored in population) and by decorrelation of the signal source.  The
phase-to-population mapping of the blocks is folded into ``amplitude``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import NvSensor
from .sampling import SamplingPlan
from .spectral import TimeSeries


@dataclass(frozen=True)
class CorrelationConfig:
    sensor: NvSensor
    signal_freq_hz: float
    bath_decay_us: float = math.inf
    amplitude: float = 1.0
    noise_sigma: float = 0.0
    seed: int = 0
    # optional tabulated bath envelope (t_us, C) used instead of the exponential
    bath_envelope: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        if not 0.0 <= self.amplitude <= 1.0:
            raise ValueError("amplitude must be in [0, 1]")
        if not self.noise_sigma >= 0:
            raise ValueError("noise_sigma must be non-negative")
        if not self.signal_freq_hz > 0:
            raise ValueError("signal_freq_hz must be positive")
        if not self.bath_decay_us > 0:
            raise ValueError("bath_decay_us must be positive (inf allowed)")
        if self.bath_envelope is not None:
            t, c = (np.asarray(a, dtype=float) for a in self.bath_envelope)
            if t.shape != c.shape or t.ndim != 1 or len(t) < 2 or np.any(np.diff(t) <= 0):
                raise ValueError("bath_envelope must be two equal-length arrays with increasing times")
            if np.any(np.abs(c) > 1 + 1e-12):
                raise ValueError("bath_envelope values must lie in [-1, 1]")
            object.__setattr__(self, "bath_envelope", (t, c))


def bath_factor(cfg: CorrelationConfig, t_us):
    t = np.asarray(t_us, dtype=float)
    if cfg.bath_envelope is not None:
        tt, cc = cfg.bath_envelope
        return np.interp(t, tt, cc, right=cc[-1])
    if math.isinf(cfg.bath_decay_us):
        return np.ones_like(t)
    return np.exp(-t / cfg.bath_decay_us)


def envelope(cfg: CorrelationConfig, t_us):
    """Damping envelope amplitude * exp(-t/T1) * C_bath(t)."""
    t = np.asarray(t_us, dtype=float)
    return cfg.amplitude * np.exp(-t / (cfg.sensor.t1_ms * 1e3)) * bath_factor(cfg, t)


def correlation_signal(cfg: CorrelationConfig, t_us):
    """Noise-free population signal at delay ``t_us`` (scalar or array)."""
    t = np.asarray(t_us, dtype=float)
    if np.any(t < 0):
        raise ValueError("delay must be non-negative")
    out = np.cos(2 * np.pi * cfg.signal_freq_hz * t * 1e-6) * envelope(cfg, t)
    return out if out.ndim else float(out)


def synthesize_timeseries(cfg: CorrelationConfig, plan: SamplingPlan):
    """Sample the signal at the plan's delays and add seeded Gaussian noise."""
    t = plan.times_us()
    x = np.asarray(correlation_signal(cfg, t), dtype=float)
    if cfg.noise_sigma > 0:
        rng = np.random.default_rng(cfg.seed)
        x = x + rng.normal(0.0, cfg.noise_sigma, len(t))
    return TimeSeries(t, x)
