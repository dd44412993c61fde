"""Monte Carlo field of a diffusing, statistically polarised nuclear spin bath.

Spins live in a box above the diamond surface: laterally periodic with
half-width ``box_nm``, height ``2 * box_nm``, reflecting at the surface and
at the top.  The sensor sits at the origin, ``sensor_depth_nm`` below the
surface plane.  Each pair holds two spins with opposite moments along a
random direction, so the net polarisation is exactly zero.

The field is the sum of point-dipole fields projected on the surface
normal.  Spin weights are rescaled so the expected field variance equals
the analytic half-space value for the physical density, which removes the
bias from truncating the half-space to a box and from simulating fewer
spins than the real density holds.

Reflected and wrapped Brownian motion are obtained by folding the free
Brownian path, which is exact in distribution, so whole blocks of steps
are propagated with one cumulative sum.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import fft as sfft
from scipy import integrate

from .core import SampleModel, dipole_prefactor_gauss_nm3
from .pulse_filter import HALFSPACE_KERNEL_INTEGRAL, SPIN_HALF_VARIANCE
from .spectral import TimeSeries

CHUNK = 250  # particles per RNG stream; fixed so results do not depend on workers
BLOCK_STEPS = 200
FFT_COLUMNS = 150
_POLARISATION_STREAM = 2**32 - 1


class BathConfigError(ValueError):
    pass


class DegenerateTraceError(ValueError):
    pass


@dataclass(frozen=True)
class BathConfig:
    sample: SampleModel
    sensor_depth_nm: float = 5.0
    n_pairs: int = 3000
    dt_us: float = 0.1
    t_max_us: float = 2000.0
    box_nm: float | None = None
    seed: int = 0
    n_polarizations: int = 16
    acov_stride: int = 5

    def __post_init__(self):
        if self.box_nm is None:
            object.__setattr__(self, "box_nm", 4.0 * self.sensor_depth_nm)
        errors = self.errors()
        if errors:
            raise BathConfigError("; ".join(errors))

    def errors(self):
        e = []
        if not self.sensor_depth_nm > 0:
            e.append("BathConfig.sensor_depth_nm must be positive")
        if self.n_pairs < 1:
            e.append("BathConfig.n_pairs must be >= 1")
        if not self.dt_us > 0:
            e.append("BathConfig.dt_us must be positive")
        if not self.t_max_us >= self.dt_us:
            e.append("BathConfig.t_max_us must be >= dt_us")
        if self.sensor_depth_nm > 0 and not self.box_nm >= 4 * self.sensor_depth_nm:
            e.append(f"BathConfig.box_nm must be >= 4 * sensor_depth_nm = {4 * self.sensor_depth_nm}")
        if self.n_polarizations < 1:
            e.append("BathConfig.n_polarizations must be >= 1")
        if self.acov_stride < 1:
            e.append("BathConfig.acov_stride must be >= 1")
        return e

    @property
    def n_spins(self):
        return 2 * self.n_pairs

    @property
    def n_steps(self):
        return int(math.floor(self.t_max_us / self.dt_us + 1e-9)) + 1

    @property
    def box_height_nm(self):
        return 2.0 * self.box_nm


@dataclass(frozen=True)
class FieldTrace:
    """Field at the sensor (Gauss) sampled every ``dt_us``.

    ``values`` is one polarisation draw.  ``realizations`` holds every draw
    (column 0 is ``values``); all draws share the same trajectories.
    ``ensemble_acov`` is the autocovariance (Gauss^2) averaged exactly over
    polarisations for the simulated trajectories, at lags that are
    multiples of ``acov_dt_us``.
    """

    dt_us: float
    values: np.ndarray
    realizations: np.ndarray | None = field(default=None, repr=False)
    ensemble_acov: np.ndarray | None = field(default=None, repr=False)
    acov_dt_us: float | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if self.realizations is None:
            object.__setattr__(self, "realizations", v[:, None])
        if not np.all(np.isfinite(self.realizations)):
            raise ValueError("trace contains non-finite values")

    @property
    def t_us(self):
        return np.arange(len(self.values)) * self.dt_us

    def __len__(self):
        return len(self.values)

    def mean_square(self):
        """Field variance estimate pooled over draws (the mean is zero by construction)."""
        return float(np.mean(self.realizations**2))

    def rms(self):
        return math.sqrt(self.mean_square())

    def ensemble_variance(self):
        """Polarisation-averaged variance, or the pooled estimate if unavailable."""
        if self.ensemble_acov is None:
            return self.mean_square()
        return float(self.ensemble_acov[0])


@lru_cache(maxsize=64)
def box_kernel_integral(depth_nm, half_width_nm, height_nm):
    """Integral of (1 + 3 cos^2 theta)/r^6 over the simulation box."""
    # scale to unit depth: I(d, L, H) = I(1, L/d, H/d) / d^3
    L = half_width_nm / depth_nm
    H = height_nm / depth_nm

    def f(z, y, x):
        r2 = x * x + y * y + z * z
        return (x * x + y * y + 4 * z * z) / (r2 * r2 * r2 * r2)

    v, _ = integrate.tplquad(f, 0, L, 0, L, 1.0, 1.0 + H, epsabs=0, epsrel=1e-10)
    return 4.0 * v / depth_nm**3


def spin_weight(cfg: BathConfig):
    """Per-spin amplitude in Gauss so the expected variance equals the half-space B_rms^2."""
    L, H, d = cfg.box_nm, cfg.box_height_nm, cfg.sensor_depth_nm
    rho_sim = cfg.n_spins / (4 * L * L * H)
    target = cfg.sample.density_per_nm3 * HALFSPACE_KERNEL_INTEGRAL / d**3
    box = rho_sim * box_kernel_integral(d, L, H)
    return dipole_prefactor_gauss_nm3(cfg.sample.nucleus) * math.sqrt(target / box)


def _stream(seed, key):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(key,))))


def _moments(cfg):
    """Unit-variance-per-axis moment directions, shape (n_polarizations, n_spins, 3)."""
    rng = _stream(cfg.seed, _POLARISATION_STREAM)
    u = rng.standard_normal((cfg.n_polarizations, cfg.n_pairs, 3))
    u /= np.linalg.norm(u, axis=2, keepdims=True)
    # spin-1/2: <I_a I_b> = delta_ab / 4, a unit vector gives delta_ab / 3
    u *= math.sqrt(3.0 * SPIN_HALF_VARIANCE)
    return np.concatenate([u, -u], axis=1)


def _fold(free, cfg):
    """Map free Brownian coordinates into the box (periodic x, y; reflecting z)."""
    L, H = cfg.box_nm, cfg.box_height_nm
    x = np.mod(free[..., 0] + L, 2 * L) - L
    y = np.mod(free[..., 1] + L, 2 * L) - L
    z = np.mod(free[..., 2], 2 * H)
    z = np.where(z > H, 2 * H - z, z)
    return x, y, z


def _chunk_paths(cfg, chunk):
    """Yield (start_step, free_positions[nb, c, 3]) blocks for one particle chunk."""
    lo = chunk * CHUNK
    c = min(CHUNK, cfg.n_spins - lo)
    rng = _stream(cfg.seed, chunk)
    L, H = cfg.box_nm, cfg.box_height_nm
    pos = np.empty((c, 3))
    pos[:, 0] = rng.uniform(-L, L, c)
    pos[:, 1] = rng.uniform(-L, L, c)
    pos[:, 2] = rng.uniform(0.0, H, c)
    sigma = math.sqrt(2.0 * cfg.sample.diffusion_nm2_per_us * cfg.dt_us)
    n = cfg.n_steps
    k = 0
    while k < n:
        nb = min(BLOCK_STEPS, n - k)
        steps = rng.standard_normal((nb, c, 3))
        steps *= sigma
        if k == 0:
            steps[0] = 0.0
        path = np.cumsum(steps, axis=0)
        path += pos
        pos = path[-1].copy()
        yield k, path
        k += nb


def _chunk_field(cfg, chunk, moments):
    """Field (n_steps, n_polarizations) and summed kernel autocovariance of one chunk.

    Both are for unit spin weight.  The autocovariance is the lag sum
    sum_t sum_i g_i(t) . g_i(t + lag), not yet divided by the overlap count.
    """
    lo = chunk * CHUNK
    m = moments[:, lo:lo + CHUNK, :]  # (K, c, 3)
    c = m.shape[1]
    n = cfg.n_steps
    stride = cfg.acov_stride
    out = np.empty((n, cfg.n_polarizations))
    G = np.empty((-(-n // stride), c, 3), dtype=np.float32)
    d = cfg.sensor_depth_nm
    for k, path in _chunk_paths(cfg, chunk):
        x, y, z = _fold(path, cfg)
        z += d
        r2 = x * x + y * y + z * z
        inv5 = 1.0 / (r2 * r2 * np.sqrt(r2))
        # B_z from moment m: (3 (m.r) z - m_z r^2) / r^5
        gx = 3.0 * x * z * inv5
        gy = 3.0 * y * z * inv5
        gz = (3.0 * z * z - r2) * inv5
        nb = len(x)
        out[k:k + nb] = gx @ m[:, :, 0].T + gy @ m[:, :, 1].T + gz @ m[:, :, 2].T
        # keep every stride-th step, aligned to the global step index
        first = (-k) % stride
        sel = slice(first, nb, stride)
        j0 = (k + first) // stride
        j1 = j0 + len(range(first, nb, stride))
        G[j0:j1, :, 0] = gx[sel]
        G[j0:j1, :, 1] = gy[sel]
        G[j0:j1, :, 2] = gz[sel]
    n = G.shape[0]
    G = G.reshape(n, -1)
    nfft = sfft.next_fast_len(2 * n - 1, real=True)
    power = np.zeros(nfft // 2 + 1)
    for j in range(0, G.shape[1], FFT_COLUMNS):
        F = sfft.rfft(G[:, j:j + FFT_COLUMNS].astype(float), nfft, axis=0)
        power += np.sum(F.real**2 + F.imag**2, axis=1)
    acov = sfft.irfft(power, nfft)[:n]
    return out, acov


def simulate_bath(cfg: BathConfig, workers=1):
    """Simulate the bath and return the field trace at the sensor.

    Deterministic for a given ``cfg`` (including seed); ``workers`` only
    changes the wall time, never the result.
    """
    moments = _moments(cfg)
    n_chunks = -(-cfg.n_spins // CHUNK)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(lambda c: _chunk_field(cfg, c, moments), range(n_chunks)))
    else:
        parts = [_chunk_field(cfg, c, moments) for c in range(n_chunks)]
    total = np.zeros((cfg.n_steps, cfg.n_polarizations))
    acov = np.zeros_like(parts[0][1])
    for f, a in parts:  # fixed order
        total += f
        acov += a
    w = spin_weight(cfg)
    total *= w
    acov *= w * w * SPIN_HALF_VARIANCE / np.arange(len(acov), 0, -1)
    return FieldTrace(cfg.dt_us, total[:, 0].copy(), total, acov, cfg.dt_us * cfg.acov_stride)


def track_particles(cfg: BathConfig, n_track=100):
    """Positions (n_steps, n_track, 3) of the first ``n_track`` spins.

    Lateral coordinates are unwrapped; z is the reflected height above the
    surface.  Uses the same random streams as :func:`simulate_bath`.
    """
    n_track = min(n_track, CHUNK, cfg.n_spins)
    out = np.empty((cfg.n_steps, n_track, 3))
    for k, path in _chunk_paths(cfg, 0):
        _, _, z = _fold(path[:, :n_track], cfg)
        out[k:k + len(path), :, 0] = path[:, :n_track, 0]
        out[k:k + len(path), :, 1] = path[:, :n_track, 1]
        out[k:k + len(path), :, 2] = z
    return out


def autocorrelation(trace, max_lag_us=None, demean=False, ensemble=True):
    """Unbiased normalised autocorrelation C(t), C(0) = 1, as a TimeSeries.

    Accepts a :class:`FieldTrace` or a 1-D array sampled at unit spacing.
    For a trace with a polarisation-averaged autocovariance that is used
    (``ensemble=True``); otherwise the autocorrelation is pooled over the
    trace's polarisation draws.  Bath traces have zero mean by
    construction, so the mean is not removed unless ``demean`` is set.

    Raises :class:`DegenerateTraceError` for constant sample series.  A
    static bath (D = 0) still has a well-defined ensemble autocovariance,
    so it yields C(t) = 1 through the ensemble path.
    """
    if isinstance(trace, FieldTrace):
        X = trace.realizations
        dt = trace.dt_us
        acov = None
        if ensemble and not demean and trace.ensemble_acov is not None:
            acov = trace.ensemble_acov
            dt = trace.acov_dt_us
    else:
        X = np.asarray(trace, dtype=float)[:, None]
        dt = 1.0
        acov = None
    n = X.shape[0]
    if n < 2:
        raise DegenerateTraceError("trace needs at least 2 samples")
    if acov is not None:
        n = len(acov)
    if acov is None:
        # a constant series carries no correlation information on its own
        if np.all(np.ptp(X, axis=0) == 0):
            raise DegenerateTraceError("trace is constant")
        if demean:
            X = X - X.mean(axis=0)
        nfft = sfft.next_fast_len(2 * n - 1, real=True)
        F = sfft.rfft(X, nfft, axis=0)
        acov = sfft.irfft(np.sum(np.abs(F) ** 2, axis=1), nfft)[:n]
        acov /= np.arange(n, 0, -1)
    if not acov[0] > 0:
        raise DegenerateTraceError("trace has zero power")
    acf = acov / acov[0]
    if max_lag_us is not None:
        m = min(n, int(max_lag_us / dt) + 1)
        acf = acf[:m]
    if len(acf) < 4:
        acf = np.pad(acf, (0, 4 - len(acf)), constant_values=acf[-1])
    return TimeSeries(np.arange(len(acf)) * dt, acf)


def decay_time(acf: TimeSeries, level=math.exp(-1)):
    """First time (linearly interpolated) at which C(t) drops below ``level``.

    Returns ``math.inf`` if it never does within the trace.
    """
    c = acf.values
    below = np.nonzero(c < level)[0]
    if len(below) == 0:
        return math.inf
    i = below[0]
    t0, t1 = acf.t_us[i - 1], acf.t_us[i]
    c0, c1 = c[i - 1], c[i]
    return float(t0 + (c0 - level) * (t1 - t0) / (c0 - c1))


def msd_decay_time(D, length_nm):
    """Time (us) to diffuse ``length_nm`` in one dimension, L^2 / (2 D).

    ``D == 0`` gives ``math.inf`` (the bath never decorrelates).
    """
    if D < 0 or not length_nm > 0:
        raise ValueError("need D >= 0 and length > 0")
    if D == 0:
        return math.inf
    return length_nm**2 / (2.0 * D)
