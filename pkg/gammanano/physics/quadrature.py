"""Thin, tolerance-checked wrappers around scipy quadrature."""

from functools import lru_cache
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from ..config import DEFAULT_QUAD_LIMIT, DEFAULT_QAWF_LIMLST
from ..errors import QuadratureError
from .params import QuadratureSpec


def _accept(out, quad: QuadratureSpec, what: str) -> float:
    value, abserr = float(out[0]), float(out[1])
    # scipy appends a message only when QUADPACK reports a problem
    if len(out) > 3 and abserr > quad.rel_tol * max(1.0, abs(value)):
        raise QuadratureError(f"{what} did not converge: {out[3]}", residual=abserr)
    if not np.isfinite(value):
        raise QuadratureError(f"{what} is not finite", residual=abserr)
    return value


def integrate_real(func: Callable[[float], float], a: float, b: float, quad: QuadratureSpec,
                   points: Optional[Sequence[float]] = None, what: str = "integral") -> float:
    """Adaptive integral of a real function on a finite interval."""
    if b <= a:
        return 0.0
    inner = None
    if points is not None:
        inner = sorted(p for p in points if a < p < b) or None
    try:
        out = integrate.quad(func, a, b, points=inner, epsrel=quad.rel_tol,
                             epsabs=quad.rel_tol * 1e-2, limit=DEFAULT_QUAD_LIMIT, full_output=1)
    except ValueError as e:
        raise QuadratureError(f"{what}: {e}") from e
    return _accept(out, quad, what)


def integrate_complex(func: Callable[[float], complex], a: float, b: float, quad: QuadratureSpec,
                      points: Optional[Sequence[float]] = None, what: str = "integral") -> complex:
    re = integrate_real(lambda x: func(x).real, a, b, quad, points, what=f"Re {what}")
    im = integrate_real(lambda x: func(x).imag, a, b, quad, points, what=f"Im {what}")
    return complex(re, im)


def integrate_infinite(func: Callable[[float], float], a: float, b: float, quad: QuadratureSpec,
                       what: str = "integral") -> float:
    """Integral with one or both limits infinite."""
    try:
        out = integrate.quad(func, a, b, epsrel=quad.rel_tol, epsabs=quad.rel_tol * 1e-2,
                             limit=DEFAULT_QUAD_LIMIT, full_output=1)
    except ValueError as e:
        raise QuadratureError(f"{what}: {e}") from e
    return _accept(out, quad, what)


def integrate_fourier(func: Callable[[float], float], omega: float, weight: str,
                      quad: QuadratureSpec, what: str = "Fourier integral") -> float:
    """int_0^inf func(nu) * cos(omega*nu) (or sin) dnu via QUADPACK's QAWF.

    QAWF only honours the absolute tolerance.
    """
    try:
        out = integrate.quad(func, 0.0, np.inf, weight=weight, wvar=omega,
                             epsabs=quad.rel_tol * 1e-2, limit=DEFAULT_QUAD_LIMIT,
                             limlst=DEFAULT_QAWF_LIMLST, full_output=1)
    except ValueError as e:
        raise QuadratureError(f"{what}: {e}") from e
    return _accept(out, quad, what)


@lru_cache(maxsize=16)
def _leggauss(order: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_legendre_panels(breaks: np.ndarray, order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of composite Gauss-Legendre quadrature over consecutive breaks.

    Returns flat arrays; sum(weights * f(nodes)) integrates f from breaks[0] to breaks[-1].
    """
    xi, wi = _leggauss(order)
    lo = breaks[:-1]
    width = np.diff(breaks)
    keep = width > 0
    lo, width = lo[keep], width[keep]
    nodes = lo[:, None] + 0.5 * width[:, None] * (xi[None, :] + 1.0)
    weights = 0.5 * width[:, None] * wi[None, :]
    return nodes.ravel(), weights.ravel()


def unit_breaks(start: float, stop: float, extra: Sequence[float] = (), width: float = 1.0) -> np.ndarray:
    """Panel boundaries of at most `width` from start to stop, split at every extra point inside."""
    n = max(1, int(np.ceil((stop - start) / width)))
    base = np.linspace(start, stop, n + 1)
    inner = [p for p in extra if start < p < stop]
    if not inner:
        return base
    return np.unique(np.concatenate([base, inner]))
