import pytest

from nvcorr.core import SampleModel
from nvcorr.spin_bath import BathConfig, autocorrelation, decay_time, simulate_bath


class _BathRuns:
    """Full-size bath simulations, computed once per session on demand."""

    def __init__(self):
        self._cache = {}

    def __call__(self, D, seed=0):
        key = (D, seed)
        if key not in self._cache:
            cfg = BathConfig(SampleModel(density_per_nm3=50.0, diffusion_nm2_per_us=D), sensor_depth_nm=5.0, seed=seed)
            trace = simulate_bath(cfg)
            self._cache[key] = (trace, decay_time(autocorrelation(trace)))
        return self._cache[key]


@pytest.fixture(scope="session")
def bath_runs():
    return _BathRuns()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(wrapper=True, tryfirst=True)
def pytest_runtest_makereport(item, call):
    rep = yield
    setattr(item, f"rep_{rep.when}", rep)
    return rep


def pytest_terminal_summary(terminalreporter):
    from importlib import import_module

    try:
        acc = import_module("test_acceptance")
    except ImportError:
        return
    if not acc.results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(acc.CRITERIA):
        if n in acc.results:
            status = "PASS" if acc.results[n] else "FAIL"
        else:
            status = "NOT RUN"
        terminalreporter.write_line(f"criterion {n}: {status}  {acc.CRITERIA[n]}")
