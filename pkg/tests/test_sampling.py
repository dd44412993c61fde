import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from nvcorr.sampling import (
    AmbiguousAliasError,
    InfeasibleFoldError,
    SamplingError,
    SamplingPlan,
    alias_frequency,
    choose_rate,
    is_injective,
    max_fold_index,
    unalias,
    valid_rate_interval,
)


def fft_alias_oracle(f_true, fs, n=20000):
    """Peak of the periodogram of a sampled cosine, refined by parabolic interpolation."""
    k = np.arange(n)
    x = np.cos(2 * np.pi * f_true * k / fs)
    p = np.abs(np.fft.rfft(x * np.hanning(n))) ** 2
    i = int(np.argmax(p))
    if 0 < i < len(p) - 1:
        a, b, c = np.log(p[i - 1]), np.log(p[i]), np.log(p[i + 1])
        i = i + 0.5 * (a - c) / (a - 2 * b + c)
    return i * fs / n


def test_generator_plan_interval():
    lo, hi = valid_rate_interval(1.699e6, 1.704e6, 201)
    assert lo == pytest.approx(16955.22, abs=0.01)
    assert hi == pytest.approx(16990.0, abs=1e-6)
    fs_ref = 1 / 58.859e-6
    assert lo <= fs_ref <= hi
    assert abs(fs_ref - hi) < 1.0


def test_proton_plan_interval():
    lo, hi = valid_rate_interval(1.65e6, 1.75e6, 5)
    assert lo == pytest.approx(700e3)
    assert hi == pytest.approx(825e3)
    assert lo <= 0.81e6 <= hi


def test_nyquist_case():
    assert valid_rate_interval(1.0, 2.0, 1) == (4.0, math.inf)


def test_infeasible_reports_max_n():
    with pytest.raises(InfeasibleFoldError) as exc:
        valid_rate_interval(1.65e6, 1.75e6, 18)
    assert exc.value.max_fold_index == 17


def test_max_fold_index():
    assert max_fold_index(1.699e6, 1.704e6) == 340
    assert max_fold_index(1.65e6, 1.75e6) == 17
    assert max_fold_index(1e6, 1e6) == math.inf
    # the bound itself is feasible and the next one is not
    valid_rate_interval(1.699e6, 1.704e6, 340)
    with pytest.raises(InfeasibleFoldError):
        valid_rate_interval(1.699e6, 1.704e6, 341)


def test_alias_examples():
    assert alias_frequency(1.7e6, 16990.0) == pytest.approx(1000.0, abs=1e-6)
    assert alias_frequency(1.7e6, 16990.0) == pytest.approx(fft_alias_oracle(1.7e6, 16990.0), abs=1.0)
    assert alias_frequency(500.0, 1000.0) == 500.0
    for k in range(5):
        assert alias_frequency(k * 1234.5, 1234.5) == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("f, fs", [(1.7e6, 16990.0), (1.72e6, 810e3), (12345.0, 1000.0), (3.3e3, 7e3)])
def test_alias_matches_fft_oracle(f, fs):
    assert alias_frequency(f, fs) == pytest.approx(fft_alias_oracle(f, fs), abs=fs / 20000 * 2)


def test_unalias_example():
    assert unalias(1000.0, 16990.0, (1.699e6, 1.704e6)) == pytest.approx(1.7e6, abs=1e-3)


def test_unalias_round_trip_reference_plans():
    rng = np.random.default_rng(42)
    for band, fs in [((1.699e6, 1.704e6), 16990.0), ((1.65e6, 1.75e6), 0.81e6)]:
        for f in rng.uniform(*band, 100):
            assert unalias(alias_frequency(f, fs), fs, band) == pytest.approx(f, abs=1e-3)


def test_unalias_ambiguous():
    # band [1000, 3000] at fs = 2000 spans more than one Nyquist zone
    with pytest.raises(AmbiguousAliasError) as exc:
        unalias(500.0, 2000.0, (1000.0, 3000.0))
    assert len(exc.value.candidates) >= 2


@settings(max_examples=200, deadline=None)
@given(
    f_low=st.floats(1e3, 1e7),
    rel_bw=st.floats(1e-3, 0.9),
    frac_n=st.floats(0, 1),
    frac_fs=st.floats(0, 1),
)
def test_folding_injective_on_valid_plans(f_low, rel_bw, frac_n, frac_fs):
    f_high = f_low * (1 + rel_bw)
    n_max = max_fold_index(f_low, f_high)
    n = 1 + int(frac_n * (n_max - 1))
    lo, hi = valid_rate_interval(f_low, f_high, n)
    if math.isinf(hi):
        hi = 2 * lo
    assume(hi - lo > 1e-6 * lo)
    fs = lo + frac_fs * (hi - lo)
    assert is_injective((f_low, f_high), fs)


def test_plan_validation():
    SamplingPlan(1.699e6, 1.704e6, 201, 1 / 58.859e-6, 100)
    SamplingPlan(1.65e6, 1.75e6, 5, 0.81e6, 100)
    with pytest.raises(SamplingError):
        SamplingPlan(1.699e6, 1.704e6, 201, 17500.0, 100)
    plan = SamplingPlan.auto(1.699e6, 1.704e6, 201, 10)
    assert plan.fs_hz == choose_rate(1.699e6, 1.704e6, 201) == pytest.approx(16990.0)
    assert plan.period_us == pytest.approx(58.8582, abs=1e-3)
    assert np.allclose(np.diff(plan.times_us()), plan.period_us)
    assert SamplingPlan.from_dict(plan.to_dict()) == plan
