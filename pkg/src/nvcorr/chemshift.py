"""Chemical-shift stick spectra, instrument broadening and resolvability."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import C13, H1, FieldConfig, NucleusSpec, larmor_frequency, nucleus
from .spectral import Spectrum

DIP_FRACTION = 0.10


@dataclass(frozen=True)
class MoleculeSpec:
    """A molecule's resonances for one nucleus: (shift in ppm, equivalent nuclei)."""

    name: str
    nucleus: NucleusSpec
    lines: tuple

    def __post_init__(self):
        lines = tuple((float(s), float(w)) for s, w in self.lines)
        object.__setattr__(self, "lines", lines)
        if not lines:
            raise ValueError("a molecule needs at least one line")
        for s, w in lines:
            if not math.isfinite(s):
                raise ValueError("chemical shifts must be finite")
            if not w > 0:
                raise ValueError("line weights must be positive")

    @classmethod
    def from_dict(cls, d):
        nuc = d["nucleus"]
        if isinstance(nuc, str):
            nuc = nucleus(nuc)
        else:
            nuc = NucleusSpec(nuc["name"], float(nuc["gamma"]))
        return cls(d["name"], nuc, tuple((l[0], l[1]) for l in d["lines"]))

    def to_dict(self):
        return {
            "name": self.name,
            "nucleus": self.nucleus.name,
            "lines": [list(l) for l in self.lines],
        }


# Reference shifts (ppm vs TMS) from public NMR shift databases (SDBS / NMRShiftDB).
# Weights count equivalent nuclei in the group.
SHIFT_TABLE_VERSION = "2024.1"
SHIFT_TABLE = {
    ("acetic acid", "1H"): ((2.10, 3), (11.4, 1)),  # CH3, COOH
    ("acetic acid", "13C"): ((20.8, 1), (178.1, 1)),  # CH3, C=O
    ("methyl formate", "1H"): ((3.77, 3), (8.08, 1)),  # OCH3, HC(=O)
    ("methyl formate", "13C"): ((50.5, 1), (161.8, 1)),  # OCH3, C=O
}


def molecule(name, nucleus_name):
    try:
        lines = SHIFT_TABLE[(name, nucleus_name)]
    except KeyError:
        raise KeyError(f"no shift table for {name!r} / {nucleus_name!r}") from None
    return MoleculeSpec(name, nucleus(nucleus_name), lines)


def line_frequencies(mol: MoleculeSpec, field: FieldConfig):
    """Absolute line positions in Hz, with their weights."""
    if not field.b_gauss > 0:
        raise ValueError("field must be positive")
    f_ref = larmor_frequency(mol.nucleus, field)
    return [(f_ref * (1.0 + s * 1e-6), w) for s, w in mol.lines]


def _lorentz(f, f0, fwhm):
    x = 2.0 * (f - f0) / fwhm
    return 1.0 / (1.0 + x * x)


def _gauss(f, f0, fwhm):
    x = (f - f0) / fwhm
    return np.exp(-4.0 * math.log(2.0) * x * x)


_SHAPES = {"lorentzian": _lorentz, "gaussian": _gauss}


def frequency_grid(lines, fwhm, span_fwhm=50.0, points_per_fwhm=20):
    f = [x for x, _ in lines]
    lo = min(f) - span_fwhm * fwhm
    hi = max(f) + span_fwhm * fwhm
    n = int(math.ceil((hi - lo) / fwhm * points_per_fwhm)) + 1
    return np.linspace(lo, hi, n)


def render(lines, fwhm, grid, lineshape="lorentzian"):
    """Sum of unit-area lineshapes scaled by weight, on ``grid``.

    Each line is normalised to its own trapezoidal area on the grid, so the
    total area equals the total weight whatever the truncation.
    """
    shape = _SHAPES[lineshape]
    y = np.zeros_like(grid)
    for f0, w in lines:
        g = shape(grid, f0, fwhm)
        y += w * g / np.trapezoid(g, grid)
    return y


def synth_spectrum(mol, field, resolution_fwhm_hz, lineshape="lorentzian", grid=None,
                   span_fwhm=50.0, points_per_fwhm=20):
    """Instrument-broadened spectrum of ``mol`` at ``field``.

    Only the instrument resolution sets the width; sample relaxation and
    diffusion are not included.
    """
    if not resolution_fwhm_hz > 0:
        raise ValueError("resolution must be positive")
    if lineshape not in _SHAPES:
        raise ValueError(f"unknown lineshape {lineshape!r}")
    lines = line_frequencies(mol, field)
    if grid is None:
        grid = frequency_grid(lines, resolution_fwhm_hz, span_fwhm, points_per_fwhm)
    return Spectrum(grid, render(lines, resolution_fwhm_hz, grid, lineshape))


def local_maxima(y):
    """Indices of strict-or-plateau local maxima in the interior of ``y``."""
    d = np.diff(y)
    idx = []
    for i in range(1, len(y) - 1):
        if d[i - 1] > 0 and d[i] <= 0:
            # skip plateaus until a descent confirms the maximum
            j = i
            while j < len(d) and d[j] == 0:
                j += 1
            if j == len(d) or d[j] < 0:
                idx.append(i)
    return idx


def pair_resolved(f1, w1, f2, w2, fwhm, lineshape="lorentzian", n=4001):
    """Two lines are resolved if they show two maxima with a >= 10% dip between."""
    if f1 == f2:
        return False
    a, b = min(f1, f2), max(f1, f2)
    grid = np.linspace(a - 3 * fwhm, b + 3 * fwhm, n)
    y = render([(f1, w1), (f2, w2)], fwhm, grid, lineshape)
    peaks = local_maxima(y)
    if len(peaks) < 2:
        return False
    top = sorted(sorted(peaks, key=lambda i: y[i])[-2:])
    dip = y[top[0]:top[1] + 1].min()
    return bool(dip <= (1.0 - DIP_FRACTION) * min(y[top[0]], y[top[1]]))


def resolvable(mol, field, resolution_fwhm_hz, lineshape="lorentzian"):
    """Resolvability of each line pair ``{(i, j): bool}`` at the given resolution."""
    if not resolution_fwhm_hz > 0:
        raise ValueError("resolution must be positive")
    lines = line_frequencies(mol, field)
    out = {}
    for i, j in itertools.combinations(range(len(lines)), 2):
        (f1, w1), (f2, w2) = lines[i], lines[j]
        out[(i, j)] = pair_resolved(f1, w1, f2, w2, resolution_fwhm_hz, lineshape)
    return out


def fully_resolved(mol, field, resolution_fwhm_hz, lineshape="lorentzian"):
    r = resolvable(mol, field, resolution_fwhm_hz, lineshape)
    return all(r.values()) if r else False


def count_maxima(spec: Spectrum):
    return len(local_maxima(spec.power))


__all__ = [
    "MoleculeSpec", "SHIFT_TABLE", "molecule", "line_frequencies", "synth_spectrum",
    "resolvable", "fully_resolved", "pair_resolved", "count_maxima", "H1", "C13",
]
