# %% [markdown]
# Monte Carlo of a diffusing proton bath
#
# Protons diffuse above a sensor 5 nm below the diamond surface.  The
# field they produce decorrelates on roughly the time a molecule needs to
# diffuse one depth, d^2/(2D).
#
# Run with ``--full`` for the 3000-pair, 2 ms traces (about half a minute
# each); the default is a quick reduced run.

# %%
import sys

from nvcorr import BathConfig, SampleModel, autocorrelation, decay_time, simulate_bath
from nvcorr.pulse_filter import brms_at_depth
from nvcorr.spin_bath import msd_decay_time

full = "--full" in sys.argv
size = dict(n_pairs=3000, t_max_us=2000.0) if full else dict(n_pairs=600, t_max_us=600.0)

# %%
for D in (0.1, 0.19, 0.5):
    sample = SampleModel(density_per_nm3=50.0, diffusion_nm2_per_us=D)
    trace = simulate_bath(BathConfig(sample, sensor_depth_nm=5.0, seed=1, **size))
    tau = decay_time(autocorrelation(trace))
    ratio = trace.ensemble_variance() / brms_at_depth(sample, 5.0) ** 2
    print(f"D = {D:4.2f} nm^2/us  1/e time {tau:6.1f} us  d^2/2D {msd_decay_time(D, 5.0):6.1f} us  "
          f"variance / analytic {ratio:.3f}")

# %% [markdown]
# The decay time scales as 1/D, and the simulated variance reproduces the
# analytic half-space B_rms^2 that calibrates the sensor depth.
