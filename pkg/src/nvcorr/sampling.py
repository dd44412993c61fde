"""Bandpass under-sampling: admissible rates, folding and unfolding.

A narrow band [f_low, f_high] sampled at ``fs`` is recoverable when the whole
band sits inside one Nyquist zone, i.e. when

    2 f_high / n <= fs <= 2 f_low / (n - 1)

for an integer fold index ``n``.  ``n = 1`` is ordinary Nyquist sampling.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

FREQ_TOL_HZ = 1e-3


class SamplingError(ValueError):
    pass


class InfeasibleFoldError(SamplingError):
    def __init__(self, f_low, f_high, n, max_n):
        self.max_fold_index = max_n
        super().__init__(
            f"fold index n={n} is infeasible for band [{f_low}, {f_high}] Hz; "
            f"largest feasible n is {max_n}"
        )


class AmbiguousAliasError(SamplingError):
    def __init__(self, f_folded, candidates):
        self.candidates = list(candidates)
        if not self.candidates:
            msg = f"no frequency in band folds to {f_folded} Hz"
        else:
            msg = f"{len(self.candidates)} in-band pre-images of {f_folded} Hz: {self.candidates}"
        super().__init__(msg)


def _check_band(f_low, f_high):
    if not 0 < f_low < f_high:
        raise SamplingError(f"need 0 < f_low < f_high, got [{f_low}, {f_high}]")


def max_fold_index(f_low, f_high):
    """Largest feasible fold index, floor(f_high / (f_high - f_low)).

    Returns ``math.inf`` for a zero-width band, which folds cleanly at any n.
    """
    if not 0 < f_low <= f_high:
        raise SamplingError(f"need 0 < f_low <= f_high, got [{f_low}, {f_high}]")
    if f_low == f_high:
        return math.inf
    ratio = f_high / (f_high - f_low)
    n = math.floor(ratio)
    # guard against ratio landing a hair under an integer
    if math.isclose(ratio, n + 1, rel_tol=1e-12):
        n += 1
    return max(n, 1)


def valid_rate_interval(f_low, f_high, n):
    """Closed interval ``(lo, hi)`` of admissible sampling rates in Hz."""
    _check_band(f_low, f_high)
    if n < 1 or int(n) != n:
        raise SamplingError(f"fold index must be a positive integer, got {n}")
    n = int(n)
    lo = 2.0 * f_high / n
    hi = math.inf if n == 1 else 2.0 * f_low / (n - 1)
    if lo > hi:
        raise InfeasibleFoldError(f_low, f_high, n, max_fold_index(f_low, f_high))
    return lo, hi


def choose_rate(f_low, f_high, n):
    """Pick the upper edge of the admissible interval (most samples per unit time)."""
    lo, hi = valid_rate_interval(f_low, f_high, n)
    if math.isinf(hi):
        return lo
    return hi


def alias_frequency(f_true, fs):
    """Frequency in [0, fs/2] at which a cosine at ``f_true`` appears after sampling."""
    if f_true < 0 or fs <= 0:
        raise SamplingError("need f_true >= 0 and fs > 0")
    r = math.fmod(f_true, fs)
    if r > fs / 2:
        r = fs - r
    return r


def unalias(f_folded, fs, band):
    """Unique frequency in ``band`` whose alias is ``f_folded``."""
    f_low, f_high = band
    _check_band(f_low, f_high)
    tol = FREQ_TOL_HZ
    k_lo = max(math.floor((f_low - fs / 2) / fs), 0)
    k_hi = math.ceil((f_high + fs / 2) / fs)
    candidates = []
    for k in range(k_lo, k_hi + 1):
        for f in (k * fs - f_folded, k * fs + f_folded):
            if f_low - tol <= f <= f_high + tol and f >= 0:
                if not any(abs(f - c) <= tol for c in candidates):
                    candidates.append(f)
    if len(candidates) != 1:
        raise AmbiguousAliasError(f_folded, sorted(candidates))
    return candidates[0]


def is_injective(band, fs, n_probe=2001):
    """Check numerically that folding restricted to ``band`` is one-to-one."""
    f = np.linspace(band[0], band[1], n_probe)
    a = np.array([alias_frequency(x, fs) for x in f])
    d = np.diff(a)
    return bool(np.all(d > 0) or np.all(d < 0))


@dataclass(frozen=True)
class SamplingPlan:
    """Uniform sampling schedule for a known narrow band."""

    f_low_hz: float
    f_high_hz: float
    fold_index: int
    fs_hz: float
    n_samples: int
    t0_us: float = 0.0
    rate_tol_hz: float = field(default=FREQ_TOL_HZ, repr=False)

    def __post_init__(self):
        lo, hi = valid_rate_interval(self.f_low_hz, self.f_high_hz, self.fold_index)
        if not lo - self.rate_tol_hz <= self.fs_hz <= hi + self.rate_tol_hz:
            raise SamplingError(
                f"fs={self.fs_hz} Hz outside the valid interval [{lo}, {hi}] Hz "
                f"for n={self.fold_index}"
            )
        if self.n_samples < 1:
            raise SamplingError("n_samples must be >= 1")
        if self.t0_us < 0:
            raise SamplingError("t0_us must be >= 0")

    @classmethod
    def auto(cls, f_low_hz, f_high_hz, fold_index, n_samples, t0_us=0.0):
        fs = choose_rate(f_low_hz, f_high_hz, fold_index)
        return cls(f_low_hz, f_high_hz, fold_index, fs, n_samples, t0_us)

    @classmethod
    def for_duration(cls, f_low_hz, f_high_hz, fold_index, duration_us, fs_hz=None, t0_us=0.0):
        fs = fs_hz if fs_hz is not None else choose_rate(f_low_hz, f_high_hz, fold_index)
        n = int(math.floor(duration_us * 1e-6 * fs)) + 1
        return cls(f_low_hz, f_high_hz, fold_index, fs, n, t0_us)

    @property
    def period_us(self):
        return 1e6 / self.fs_hz

    @property
    def band(self):
        return (self.f_low_hz, self.f_high_hz)

    def times_us(self):
        return self.t0_us + np.arange(self.n_samples) * self.period_us

    def to_dict(self):
        return {
            "f_low_hz": self.f_low_hz,
            "f_high_hz": self.f_high_hz,
            "fold_index": self.fold_index,
            "fs_hz": self.fs_hz,
            "n_samples": self.n_samples,
            "t0_us": self.t0_us,
        }

    @classmethod
    def from_dict(cls, d):
        if "fs_hz" in d and d["fs_hz"] is not None:
            return cls(
                float(d["f_low_hz"]), float(d["f_high_hz"]), int(d["fold_index"]),
                float(d["fs_hz"]), int(d["n_samples"]), float(d.get("t0_us", 0.0)),
            )
        return cls.auto(
            float(d["f_low_hz"]), float(d["f_high_hz"]), int(d["fold_index"]),
            int(d["n_samples"]), float(d.get("t0_us", 0.0)),
        )


# Reference schedules: a narrow generator band and the proton band.
GENERATOR_PLAN = dict(f_low_hz=1.699e6, f_high_hz=1.704e6, fold_index=201)
PROTON_PLAN = dict(f_low_hz=1.65e6, f_high_hz=1.75e6, fold_index=5, fs_hz=0.81e6)
