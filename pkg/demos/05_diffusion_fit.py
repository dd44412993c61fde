# %% [markdown]
# Diffusion broadening from a depth scan
#
# Shallower sensors see broader lines because molecules leave the
# detection volume faster: the broadening is 2D/d^2.  Below a 5 kHz floor
# the broadening cannot be measured, and those points only bound the fit.

# %%
import numpy as np

from nvcorr import NvSensor, SampleModel, broadening, combined_linewidth, fit_diffusion
from nvcorr.diffusion import synthetic_points

rng = np.random.default_rng(4)
pts = synthetic_points(0.15, (2, 3, 4, 5, 7, 10), rel_noise=0.2, rng=rng)
for p in pts:
    print(f"d = {p.depth_nm:4.1f} nm  broadening {p.broadening_hz / 1e3:7.2f} kHz")

# %%
for mode in ("upper-bound", "drop"):
    fit = fit_diffusion(pts, floor_hz=5e3, censoring=mode, seed=0)
    print(f"{mode:12s} D = {fit.D:.3f} nm^2/us  95% CI [{fit.ci_low:.3f}, {fit.ci_high:.3f}]  "
          f"censored {fit.n_censored}")

# %% [markdown]
# Line-width budget for a proton line: the intrinsic width, diffusion and
# the sensor's T1 lifetime add.

# %%
for d in (3.9, 10.0, float("inf")):
    b = combined_linewidth(NvSensor(d, 2.1, 10.0), SampleModel(diffusion_nm2_per_us=0.15, intrinsic_linewidth_hz=40.0))
    print(f"d = {d:5} nm  " + "  ".join(f"{k} {v:.1f}" for k, v in b.to_dict().items()))
print(f"broadening at 5 nm: {broadening(0.15, 5.0) / 1e3:.1f} kHz")
