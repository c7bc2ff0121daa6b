"""Bessel functions and the resonant response kernels built from them."""

import numpy as np
from scipy import special

from ..errors import PhysicsDomainError

# below this argument sigma1 uses its two-term series
_SMALL_Z = 1e-4


def _scalar_or_array(values, like):
    return values if np.ndim(like) else float(values)


def bessel_j0(x):
    return _scalar_or_array(special.j0(np.asarray(x, dtype=float)), x)


def bessel_j1(x):
    return _scalar_or_array(special.j1(np.asarray(x, dtype=float)), x)


def bessel_i0(x):
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < 0):
        raise PhysicsDomainError("bessel_i0 is only used for x >= 0")
    return _scalar_or_array(special.i0(x_arr), x)


def _check_domain(x_arr: np.ndarray, name: str) -> None:
    if np.any(x_arr < 0):
        raise PhysicsDomainError(f"{name} is defined for x >= 0, got min {x_arr.min():g}")


def sigma0(x, b: float):
    """sigma0(x) = J0(2*sqrt(b*x)); the transmitted fraction of a step input."""
    x_arr = np.asarray(x, dtype=float)
    _check_domain(x_arr, "sigma0")
    return _scalar_or_array(special.j0(2.0 * np.sqrt(b * x_arr)), x)


def sigma1(x, b: float):
    """sigma1(x) = b*J1(z)/sqrt(b*x) with z = 2*sqrt(b*x), and sigma1(0) = b.

    This is -d(sigma0)/dx, so the integral of sigma1 over [0, x] equals 1 - sigma0(x).
    """
    x_arr = np.asarray(x, dtype=float)
    _check_domain(x_arr, "sigma1")
    z = 2.0 * np.sqrt(b * x_arr)
    small = z < _SMALL_Z
    safe_z = np.where(small, 1.0, z)
    out = np.where(small, b * (1.0 - z * z / 8.0), 2.0 * b * special.j1(safe_z) / safe_z)
    return _scalar_or_array(out, x)


def baseline_nb(T: float) -> float:
    """Transmission baseline exp(-T/2)*I0(T/2) of an unmodulated absorber."""
    if T < 0:
        raise PhysicsDomainError(f"optical thickness must be >= 0, got {T}")
    # i0e(x) = exp(-x) * I0(x), stable for thick absorbers
    return float(special.i0e(T / 2.0))
