"""Derive HALFSPACE_KERNEL_INTEGRAL used by nvcorr.pulse_filter.

The variance of the field component along the surface normal, produced at
unit depth by an unpolarised half-space of spin-1/2 moments at unit density,
is (mu0 hbar gamma / 4 pi)^2 * 1/4 * I with

    I = integral over z > 1 of (1 + 3 cos^2 theta) / r^6 dV.

Cylindrical symmetry reduces this to a 2-D integral, done here with quadpack.
"""
import math

from scipy import integrate


def integrand(rho, z):
    r2 = rho * rho + z * z
    return 2 * math.pi * rho * (r2 + 3 * z * z) / r2**4


def main():
    val, err = integrate.dblquad(integrand, 1.0, math.inf, 0.0, math.inf, epsabs=0, epsrel=1e-13)
    print(f"HALFSPACE_KERNEL_INTEGRAL = {val!r}  (quadrature error {err:.1e})")
    print(f"pi / 2                    = {math.pi / 2!r}")


if __name__ == "__main__":
    main()
