"""Nanoscale NMR with NV centers: filters, correlation spectroscopy and spin-bath simulation."""
from .core import (
    C13,
    H1,
    FieldConfig,
    NucleusSpec,
    NvSensor,
    SampleModel,
    larmor_frequency,
    nucleus,
)
from .sampling import SamplingPlan, alias_frequency, unalias, valid_rate_interval
from .pulse_filter import PulseSequence, brms_at_depth, effective_linewidth, filter_function
from .correlation import CorrelationConfig, correlation_signal, synthesize_timeseries
from .spectral import Spectrum, TimeSeries, fit_exp_envelope, fit_line, periodogram
from .spin_bath import BathConfig, autocorrelation, decay_time, simulate_bath
from .chemshift import MoleculeSpec, molecule, resolvable, synth_spectrum
from .diffusion import broadening, combined_linewidth, fit_diffusion

__version__ = "0.1.0"
