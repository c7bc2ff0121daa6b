"""Single-photon field amplitudes in the frame rotating at the source frequency."""

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from ..errors import PhysicsDomainError, QuadratureError
from .params import AbsorberParams, QuadratureSpec, GAMMA, coupling
from .phase import PhaseProfile
from .quadrature import integrate_complex, integrate_real, integrate_fourier, integrate_infinite
from .special import sigma0, sigma1


@dataclass(frozen=True)
class ComplexEnvelope:
    """Causal complex amplitude: zero before `onset`, `func(t)` from `onset` on.

    `breakpoints` lists times where func is discontinuous, so integrators can split there.
    """

    func: Callable[[np.ndarray], np.ndarray]
    onset: float = 0.0
    breakpoints: Tuple[float, ...] = ()

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        out = np.zeros(t_arr.shape, dtype=complex)
        live = t_arr >= self.onset
        if np.any(live):
            out[live] = self.func(t_arr[live])
        return out if t_arr.ndim else out[()]

    @classmethod
    def from_samples(cls, times, values, onset: Optional[float] = None) -> "ComplexEnvelope":
        """Linear interpolation through tabulated samples."""
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=complex)

        def func(t):
            return (np.interp(t, times, values.real) + 1j * np.interp(t, times, values.imag))

        return cls(func=func, onset=times[0] if onset is None else onset)


# =============================================================================
# SOURCE FIELDS
# =============================================================================

def source_envelope(t, t0: float = 0.0):
    """theta(t - t0) * exp(-gamma (t - t0))."""
    u = np.asarray(t, dtype=float) - t0
    out = np.where(u >= 0, np.exp(-GAMMA * np.clip(u, 0.0, None)), 0.0)
    return out if np.ndim(t) else float(out)


def source_field(t0: float = 0.0) -> ComplexEnvelope:
    return ComplexEnvelope(func=lambda t: np.exp(-GAMMA * (t - t0)) + 0j, onset=t0)


def pi_step_field(t0: float, u1: float) -> ComplexEnvelope:
    """Source field whose phase flips by pi at t0 + u1."""
    flip = t0 + u1

    def func(t):
        return np.exp(-GAMMA * (t - t0)) * np.where(t >= flip, -1.0, 1.0) + 0j

    return ComplexEnvelope(func=func, onset=t0, breakpoints=(flip,))


def modulated_field(t0: float, phase: PhaseProfile, span: float) -> ComplexEnvelope:
    """Source field multiplied by exp(i*phi(t)); ideal edges within `span` become breakpoints."""
    breaks: Sequence[float] = ()
    if phase.mode == "ideal" and phase.pulses:
        times, _ = phase.transitions()
        first = math.floor(t0 / phase.period)
        candidates = np.concatenate([times + k * phase.period
                                     for k in range(first, first + int(span / phase.period) + 2)])
        breaks = tuple(float(x) for x in np.sort(candidates) if t0 < x < t0 + span)

    def func(t):
        return np.exp(-GAMMA * (t - t0)) * phase.factor(t)

    return ComplexEnvelope(func=func, onset=t0, breakpoints=breaks)


# =============================================================================
# CLOSED FORMS AT RESONANCE
# =============================================================================

def resonant_envelope(u, T: float):
    """Transmitted amplitude exp(-gamma u) * J0(2 sqrt(b u)) for an unmodulated photon."""
    b = coupling(T)
    u_arr = np.asarray(u, dtype=float)
    safe = np.clip(u_arr, 0.0, None)
    out = np.where(u_arr >= 0, np.exp(-GAMMA * safe) * sigma0(safe, b), 0.0)
    return out if np.ndim(u) else float(out)


def pi_shift_envelope(u, u1: float, T: float):
    """Transmitted amplitude when the phase flips by pi at u1 after emission."""
    if not u1 > 0:
        raise PhysicsDomainError(f"phase flip must follow emission (u1 > 0), got {u1}")
    b = coupling(T)
    u_arr = np.asarray(u, dtype=float)
    safe = np.clip(u_arr, 0.0, None)
    lag = np.clip(u_arr - u1, 0.0, None)
    bracket = sigma0(safe, b) - 2.0 * np.where(u_arr >= u1, sigma0(lag, b), 0.0)
    out = np.where(u_arr >= 0, np.exp(-GAMMA * safe) * bracket, 0.0)
    return out if np.ndim(u) else float(out)


# =============================================================================
# RESPONSE-FUNCTION CONVOLUTION
# =============================================================================

def response_kernel(x, absorber: AbsorberParams):
    """exp((i*Delta - gamma_A) x) * sigma1(x): the absorber's reply to a delta input."""
    x_arr = np.asarray(x, dtype=float)
    return np.exp((1j * absorber.delta - absorber.gamma_a) * x_arr) * sigma1(x_arr, absorber.coupling)


def convolve_response(field: ComplexEnvelope, absorber: AbsorberParams, quad: QuadratureSpec,
                      times=None) -> ComplexEnvelope:
    """Transmitted field a(t) = field(t) - int_0^H K(x) field(t - x) dx on a time grid.

    `times` defaults to the quadrature grid over one horizon after the onset. When a grid time
    lies more than a horizon past the onset, the neglected tail is estimated and a
    QuadratureError is raised if it exceeds quad.rel_tol.
    """
    if times is None:
        times = field.onset + np.arange(quad.steps + 1) * quad.grid_step
    times = np.asarray(times, dtype=float)
    horizon = quad.horizon
    values = np.zeros(times.shape, dtype=complex)

    for i, t in enumerate(times):
        if t < field.onset:
            continue
        reach = t - field.onset
        upper = min(reach, horizon)
        kinks = [t - bp for bp in field.breakpoints]

        def integrand(x, t=t):
            return complex(response_kernel(x, absorber) * field(t - x))

        scattered = integrate_complex(integrand, 0.0, upper, quad, points=kinks,
                                      what=f"response convolution at t={t:g}")
        if reach > horizon:
            tail = integrate_real(lambda x, t=t: abs(response_kernel(x, absorber)) * abs(field(t - x)),
                                  horizon, reach, quad, points=kinks, what="convolution tail")
            if tail > quad.rel_tol:
                raise QuadratureError(
                    f"horizon {horizon:g} too short for t - onset = {reach:g}", residual=tail)
        values[i] = field(t) - scattered

    return ComplexEnvelope.from_samples(times, values, onset=field.onset)


# =============================================================================
# FREQUENCY-DOMAIN INVERSION
# =============================================================================

def _scattered_spectrum(nu, absorber: AbsorberParams):
    """A0(nu) * (H(nu) - 1) with A0 = i/(nu + i gamma), H = exp(-i b/(nu + Delta + i gamma_A))."""
    a0 = 1j / (nu + 1j * GAMMA)
    return a0 * np.expm1(-1j * absorber.coupling / (nu + absorber.delta + 1j * absorber.gamma_a))


def frequency_domain_envelope(u: float, absorber: AbsorberParams, quad: QuadratureSpec) -> complex:
    """Transmitted amplitude by numerical inversion of the transmission spectrum.

    Valid for any detuning and gamma_A. The source part exp(-gamma u) is inverted analytically;
    the scattered part decays like 1/nu^2 and is folded onto nu > 0 so each piece is a
    QAWF Fourier integral.
    """
    if u < 0:
        return 0j
    source = math.exp(-GAMMA * u)
    if u == 0 or absorber.optical_thickness == 0:
        # the scattered field is continuous and vanishes at the onset
        return complex(source)

    def even(nu):
        return _scattered_spectrum(nu, absorber) + _scattered_spectrum(-nu, absorber)

    def odd(nu):
        return _scattered_spectrum(nu, absorber) - _scattered_spectrum(-nu, absorber)

    what = f"spectrum inversion at u={u:g}"
    re = (integrate_fourier(lambda nu: even(nu).real, u, "cos", quad, what)
          + integrate_fourier(lambda nu: odd(nu).imag, u, "sin", quad, what))
    im = (integrate_fourier(lambda nu: even(nu).imag, u, "cos", quad, what)
          - integrate_fourier(lambda nu: odd(nu).real, u, "sin", quad, what))
    return complex(source + re / (2 * math.pi), im / (2 * math.pi))


def transmitted_norm(absorber: AbsorberParams, quad: QuadratureSpec) -> float:
    """Per-photon detection probability int |a|^2 du (2*gamma = 1), by Parseval.

    |A0|^2 |H|^2 with |H|^2 = exp(-2 b gamma_A / |nu + Delta + i gamma_A|^2).
    """
    b = absorber.coupling
    shift, g_a = absorber.delta, absorber.gamma_a

    def power(nu):
        return math.exp(-2.0 * b * g_a / ((nu + shift) ** 2 + g_a ** 2)) / (nu * nu + GAMMA * GAMMA)

    split = -shift
    total = (_half_line(power, split, -1, quad) + _half_line(power, split, 1, quad))
    return total / (2 * math.pi)


def _half_line(func, start: float, direction: int, quad: QuadratureSpec) -> float:
    if direction > 0:
        return integrate_infinite(func, start, np.inf, quad, what="norm spectrum")
    return integrate_infinite(func, -np.inf, start, quad, what="norm spectrum")
