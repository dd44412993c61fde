"""Physical constants, unit conventions and shared domain types.

Canonical internal units are nm, us, kHz and Gauss.  Every frequency in the
package is an ordinary frequency in Hz; angular frequencies never cross a
public function boundary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

# unit conversions
NM = 1e-9  # m
US = 1e-6  # s
MS = 1e-3  # s
GAUSS = 1e-4  # T
KHZ = 1e3  # Hz

HBAR = 1.054571817e-34  # J s
MU0_OVER_4PI = 1e-7  # T m / A


def nm_to_m(x):
    return x * NM


def m_to_nm(x):
    return x / NM


def ms_to_s(x):
    return x * MS


def s_to_ms(x):
    return x / MS


def us_to_s(x):
    return x * US


def s_to_us(x):
    return x / US


def gauss_to_tesla(x):
    return x * GAUSS


def tesla_to_gauss(x):
    return x / GAUSS


@dataclass(frozen=True)
class NucleusSpec:
    """A nuclear species.

    ``gamma`` is the gyromagnetic ratio in kHz/Gauss (ordinary frequency).
    """

    name: str
    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")


H1 = NucleusSpec("1H", 4.25)
C13 = NucleusSpec("13C", 1.0705)

NUCLEI = {n.name: n for n in (H1, C13)}


def nucleus(name):
    try:
        return NUCLEI[name]
    except KeyError:
        raise KeyError(f"unknown nucleus {name!r}; known: {sorted(NUCLEI)}") from None


@dataclass(frozen=True)
class NvSensor:
    depth_nm: float
    t1_ms: float
    t2_us: float

    def __post_init__(self):
        if not self.depth_nm > 0:
            raise ValueError("depth_nm must be positive")
        if not self.t1_ms > 0:
            raise ValueError("t1_ms must be positive")
        if not self.t2_us > 0:
            raise ValueError("t2_us must be positive")
        if self.t2_us > 1000.0 * self.t1_ms:
            raise ValueError("t2_us cannot exceed T1")


@dataclass(frozen=True)
class SampleModel:
    """Nuclear spin sample filling the half-space above the diamond."""

    nucleus: NucleusSpec = H1
    density_per_nm3: float = 50.0
    diffusion_nm2_per_us: float = 0.0
    intrinsic_linewidth_hz: float = 0.0

    def __post_init__(self):
        if not self.density_per_nm3 > 0:
            raise ValueError("density_per_nm3 must be positive")
        if not self.diffusion_nm2_per_us >= 0:
            raise ValueError("diffusion_nm2_per_us must be non-negative")
        if not self.intrinsic_linewidth_hz >= 0:
            raise ValueError("intrinsic_linewidth_hz must be non-negative")


@dataclass(frozen=True)
class FieldConfig:
    b_gauss: float

    def __post_init__(self):
        if not self.b_gauss >= 0:
            raise ValueError("b_gauss must be non-negative")

    @classmethod
    def from_tesla(cls, b_tesla):
        return cls(tesla_to_gauss(b_tesla))


def larmor_frequency(nucleus: NucleusSpec, field: FieldConfig) -> float:
    """Larmor frequency in Hz (not rad/s)."""
    return nucleus.gamma * KHZ * field.b_gauss


def dipole_prefactor_gauss_nm3(nucleus: NucleusSpec) -> float:
    """mu0/(4 pi) * hbar * gamma expressed in Gauss nm^3.

    This is the field magnitude at 1 nm from a moment of hbar*gamma.
    """
    gamma_rad_per_s_per_tesla = 2 * math.pi * nucleus.gamma * KHZ / GAUSS
    b_tesla = MU0_OVER_4PI * HBAR * gamma_rad_per_s_per_tesla / NM**3
    return tesla_to_gauss(b_tesla)
