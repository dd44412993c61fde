# %% [markdown]
# XY8 filter functions
#
# An XY8-N block of 8N pi-pulses spaced by tau responds to fields near
# f = 1/(2 tau).  Longer blocks give narrower pass bands until the sensor's
# T2 caps the usable sequence length.

# %%
import numpy as np

from nvcorr import NvSensor, PulseSequence, filter_function
from nvcorr.pulse_filter import brms_at_depth, effective_linewidth, filter_peak
from nvcorr import SampleModel

tau_us = 1e6 / (2 * 1.7e6)  # tuned to 1.7 MHz protons
sensor = NvSensor(depth_nm=5.0, t1_ms=1.7, t2_us=10.0)

# %%
for n in (1, 2, 4, 8, 16):
    seq = PulseSequence(n, tau_us)
    f_pk, fwhm = filter_peak(seq)
    print(f"XY8-{n:<2d}  {seq.n_pulses:4d} pulses  peak {f_pk / 1e6:.4f} MHz  "
          f"FWHM {fwhm / 1e3:6.1f} kHz  with T2 {effective_linewidth(seq, sensor) / 1e3:6.1f} kHz")

# %% [markdown]
# The pass band sits slightly above 1/(2 tau) for short blocks; the offset
# falls off as 1/N^2.  Sample the response itself on a grid:

# %%
seq = PulseSequence(4, tau_us)
f = np.linspace(1.4e6, 2.0e6, 13)
for fi, F in zip(f, filter_function(seq, f, t2_us=sensor.t2_us)):
    print(f"{fi / 1e6:.2f} MHz  {F:.4f}")

# %% [markdown]
# Signal size: the RMS field from statistically polarised protons falls as
# d^-3/2 with sensor depth.

# %%
water = SampleModel(density_per_nm3=66.0)
for d in (2.0, 5.0, 10.0):
    print(f"d = {d:4.1f} nm  B_rms = {brms_at_depth(water, d) * 1e3:.2f} mG")
