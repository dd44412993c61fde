import math

import numpy as np
import pytest

from nvcorr.core import NvSensor
from nvcorr.correlation import CorrelationConfig, correlation_signal, envelope, synthesize_timeseries
from nvcorr.sampling import SamplingPlan, alias_frequency
from nvcorr.spectral import fit_exp_envelope, fit_line, periodogram

SENSOR = NvSensor(5.0, 1.7, 10.0)


def test_zero_delay_gives_amplitude():
    cfg = CorrelationConfig(SENSOR, 1.7e6, amplitude=0.3)
    assert correlation_signal(cfg, 0.0) == pytest.approx(0.3)


def test_t1_envelope():
    cfg = CorrelationConfig(SENSOR, 1.7e6, amplitude=0.4)
    assert envelope(cfg, 1700.0) == pytest.approx(0.4 * math.exp(-1), rel=1e-12)
    # 1700 us is a whole number of 1.7 MHz periods
    assert abs(correlation_signal(cfg, 1700.0)) == pytest.approx(0.4 * math.exp(-1), rel=1e-9)


def test_bath_dominated_envelope():
    cfg = CorrelationConfig(NvSensor(5.0, 2.1, 10.0), 1.7e6, bath_decay_us=65.0, amplitude=1.0)
    assert envelope(cfg, 65.0) == pytest.approx(math.exp(-65 / 2100) * math.exp(-1), rel=1e-12)


def test_tabulated_bath_envelope():
    t = np.linspace(0, 500, 51)
    c = np.exp(-t / 65.0)
    cfg = CorrelationConfig(NvSensor(5.0, 2.1, 10.0), 1.7e6, bath_envelope=(t, c))
    ref = CorrelationConfig(NvSensor(5.0, 2.1, 10.0), 1.7e6, bath_decay_us=65.0)
    assert envelope(cfg, 130.0) == pytest.approx(envelope(ref, 130.0), rel=1e-2)


def test_bounded_by_amplitude():
    cfg = CorrelationConfig(SENSOR, 1.234e6, bath_decay_us=80.0, amplitude=0.7)
    t = np.linspace(0, 5000, 100001)
    assert np.all(np.abs(correlation_signal(cfg, t)) <= 0.7 + 1e-15)


def test_invalid_config():
    with pytest.raises(ValueError):
        CorrelationConfig(SENSOR, 1.7e6, amplitude=1.5)
    with pytest.raises(ValueError):
        CorrelationConfig(SENSOR, 0.0)
    with pytest.raises(ValueError):
        CorrelationConfig(SENSOR, 1e6, noise_sigma=-1)
    with pytest.raises(ValueError):
        correlation_signal(CorrelationConfig(SENSOR, 1e6), -1.0)


def generator_plan(duration_us=20000.0):
    return SamplingPlan.for_duration(1.699e6, 1.704e6, 201, duration_us)


def test_noise_free_synthesis_matches_signal():
    cfg = CorrelationConfig(SENSOR, 1.7e6)
    plan = generator_plan(2000)
    ts = synthesize_timeseries(cfg, plan)
    assert np.array_equal(ts.values, correlation_signal(cfg, plan.times_us()))


def test_seeded_noise_is_reproducible():
    cfg = CorrelationConfig(SENSOR, 1.7e6, noise_sigma=0.05, seed=11)
    a = synthesize_timeseries(cfg, generator_plan(2000))
    b = synthesize_timeseries(cfg, generator_plan(2000))
    assert a.values.tobytes() == b.values.tobytes()
    c = synthesize_timeseries(CorrelationConfig(SENSOR, 1.7e6, noise_sigma=0.05, seed=12), generator_plan(2000))
    assert not np.array_equal(a.values, c.values)


def test_aliased_oscillation_at_1khz():
    plan = generator_plan()
    assert alias_frequency(1.7e6, plan.fs_hz) == pytest.approx(1000.0, abs=1e-6)
    ts = synthesize_timeseries(CorrelationConfig(SENSOR, 1.7e6), plan)
    spec = periodogram(ts)
    assert abs(spec.peak()[0] - 1000.0) <= spec.df_hz
    assert abs(fit_line(periodogram(ts, 8)).f0_hz - 1000.0) <= spec.df_hz


def test_envelope_fit_recovers_t1():
    ts = synthesize_timeseries(CorrelationConfig(SENSOR, 1.7e6), generator_plan())
    assert fit_exp_envelope(ts) == pytest.approx(1.7, rel=0.05)
