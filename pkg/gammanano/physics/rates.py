"""Detector count rates integrated over emission times, and per-photon transmission.

Rates are normalized to N0, the rate without absorber. For a phase factor c(t) = exp(i*phi(t))
the emission-averaged rate is

    N/N0(t) = int_0^H exp(-s) |c(t) - G_t(s)|^2 ds / (1 - exp(-H)),
    G_t(s)  = int_0^s sigma1(x) c(t - x) dx,

which for constant phase collapses to the baseline n_B and for a single pi step reproduces the
closed-form step response. Ideal (step) profiles are integrated exactly piecewise with
Gauss-Legendre panels split at every edge; realistic profiles use a product-midpoint rule
on the quadrature grid.
"""

import math
from typing import Tuple

import numpy as np
from scipy import integrate, signal

from .params import AbsorberParams, QuadratureSpec, GAMMA, coupling
from .phase import PhaseProfile
from .quadrature import gauss_legendre_panels, integrate_real, unit_breaks
from .special import baseline_nb, sigma0

# edges are tabulated on both sides so table interpolation keeps the jump
_EDGE_EPS = 1e-9
_RATE_CHUNK = 256
_ROW_CHUNK = 512


def _scalar_or_array(out: np.ndarray, like):
    return out if np.ndim(like) else float(out)


def _effective_horizon(quad: QuadratureSpec) -> Tuple[int, float]:
    steps = quad.steps
    return steps, steps * quad.grid_step


# =============================================================================
# SINGLE PI STEP (closed form)
# =============================================================================

def _step_envelope(tau: float, b: float, quad: QuadratureSpec) -> float:
    """F_T(tau) = exp(-tau) sigma0(tau) - exp(-b) + int_0^tau exp(-x) sigma0(x) dx."""
    accumulated = integrate_real(lambda x: math.exp(-x) * sigma0(x, b), 0.0, tau, quad,
                                 what="step-response integral")
    return math.exp(-tau) * sigma0(tau, b) - math.exp(-b) + accumulated


def integrated_rate_step(t, t1: float, T: float, quad: QuadratureSpec):
    """N_pi/N0 for one ideal pi step at t1: n_B + 4 theta(t - t1) sigma0 F_T."""
    b = coupling(T)
    nb = baseline_nb(T)
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.full(t_arr.shape, nb)
    for i, ti in enumerate(t_arr):
        if ti < t1:
            continue
        tau = ti - t1
        out[i] = nb + 4.0 * sigma0(tau, b) * _step_envelope(tau, b, quad)
    return out if np.ndim(t) else float(out[0])


# =============================================================================
# GENERAL PHASE
# =============================================================================

def _past_edges(t: float, phase: PhaseProfile, horizon: float) -> Tuple[np.ndarray, np.ndarray]:
    """Lags x_k = t - edge in [0, horizon) and jumps D_k = c_before - c_after."""
    times, jumps = phase.transitions()
    if times.size == 0:
        return times, jumps
    base = (t % phase.period) - times
    images = 1 + int(math.ceil(horizon / phase.period))
    lags = np.concatenate([base + m * phase.period for m in range(images + 1)])
    d = np.tile(-jumps, images + 1)
    keep = (lags >= 0.0) & (lags < horizon)
    return lags[keep], d[keep]


def _ideal_rate_point(t: float, phase: PhaseProfile, b: float, quad: QuadratureSpec,
                      horizon: float) -> float:
    lags, d = _past_edges(t, phase, horizon)
    s, w = gauss_legendre_panels(unit_breaks(0.0, horizon, lags), quad.gl_order)
    s0 = sigma0(s, b)
    amp = phase.factor(t).real * s0
    for xk, dk in zip(lags, d):
        amp = amp - dk * np.where(s > xk, sigma0(xk, b) - s0, 0.0)
    return float(np.sum(w * np.exp(-s) * amp * amp))


def _realistic_rates(t_arr: np.ndarray, phase: PhaseProfile, b: float, quad: QuadratureSpec) -> np.ndarray:
    steps, horizon = _effective_horizon(quad)
    h = quad.grid_step
    s = np.arange(steps + 1) * h
    s0 = sigma0(s, b)
    weights = s0[:-1] - s0[1:]
    mids = (np.arange(steps) + 0.5) * h
    decay = np.exp(-s)
    out = np.empty(t_arr.shape)
    for start in range(0, t_arr.size, _RATE_CHUNK):
        tt = t_arr[start:start + _RATE_CHUNK]
        c_mid = phase.interpolated_factor(tt[:, None] - mids[None, :], h / 2)
        g = np.zeros((tt.size, steps + 1), dtype=complex)
        g[:, 1:] = np.cumsum(c_mid * weights[None, :], axis=1)
        c_t = phase.interpolated_factor(tt, h / 2)
        integrand = decay[None, :] * np.abs(c_t[:, None] - g) ** 2
        out[start:start + tt.size] = integrate.simpson(integrand, dx=h, axis=1)
    return out


def rate_general_phase(t, phase: PhaseProfile, T: float, quad: QuadratureSpec):
    """Emission-averaged N_pi/N0 at time(s) t for an arbitrary periodic phase profile."""
    b = coupling(T)
    steps, horizon = _effective_horizon(quad)
    norm = -math.expm1(-horizon)
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if phase.mode == "ideal":
        out = np.array([_ideal_rate_point(ti, phase, b, quad, horizon) for ti in t_arr])
    else:
        out = _realistic_rates(t_arr, phase, b, quad)
    out = out / norm
    return out if np.ndim(t) else float(out[0])


def observed_rate(t, phase: PhaseProfile, absorber: AbsorberParams, quad: QuadratureSpec):
    """N/N0 = [(1 - f) + f N_pi/N0] exp(-beta): recoil photons bypass the resonance."""
    absorber.require_resonance("observed_rate")
    f = absorber.recoilless_fraction
    resonant = np.asarray(rate_general_phase(t, phase, absorber.optical_thickness, quad))
    out = ((1.0 - f) + f * resonant) * math.exp(-absorber.nonresonant_depth)
    return _scalar_or_array(out, t)


def rate_table(phase: PhaseProfile, T: float, quad: QuadratureSpec) -> Tuple[np.ndarray, np.ndarray]:
    """N_pi/N0 over one period on the quadrature grid.

    Ideal tables also carry a node just before and at every edge, so periodic linear
    interpolation reproduces the jumps.
    """
    n = int(math.ceil(phase.period / quad.grid_step))
    times = np.arange(n) * (phase.period / n)
    if phase.mode == "ideal" and phase.pulses:
        edges, _ = phase.transitions()
        before = np.mod(edges - _EDGE_EPS, phase.period)
        times = np.unique(np.concatenate([times, edges, before]))
    values = np.asarray(rate_general_phase(times, phase, T, quad))
    times.setflags(write=False)
    values.setflags(write=False)
    return times, values


def period_mean_rate(phase: PhaseProfile, T: float, quad: QuadratureSpec) -> float:
    """(1/period) * int_0^period N_pi/N0 dt."""
    if phase.mode == "ideal":
        edges, _ = phase.transitions()
        _, horizon = _effective_horizon(quad)
        kinks = np.concatenate([edges, np.mod(edges + horizon, phase.period)])
        t, w = gauss_legendre_panels(unit_breaks(0.0, phase.period, kinks, width=0.5), quad.gl_order)
        return float(np.sum(w * np.asarray(rate_general_phase(t, phase, T, quad)))) / phase.period
    _, values = rate_table(phase, T, quad)
    return float(np.mean(values))


# =============================================================================
# PER-PHOTON TRANSMISSION
# =============================================================================

def _future_edges(t0: float, phase: PhaseProfile, horizon: float) -> Tuple[np.ndarray, np.ndarray]:
    """Delays y_k = edge - t0 in (0, horizon) and jumps c_after - c_before."""
    times, jumps = phase.transitions()
    if times.size == 0:
        return times, jumps
    base = np.mod(times - t0, phase.period)
    images = 1 + int(math.ceil(horizon / phase.period))
    delays = np.concatenate([base + m * phase.period for m in range(images + 1)])
    dc = np.tile(jumps, images + 1)
    keep = (delays > 0.0) & (delays < horizon)
    return delays[keep], dc[keep]


def _ideal_amplitude(u: np.ndarray, c0: float, delays: np.ndarray, dc: np.ndarray, b: float) -> np.ndarray:
    safe = np.clip(u, 0.0, None)
    amp = c0 * sigma0(safe, b)
    for yk, dk in zip(delays, dc):
        lag = u - yk
        amp = amp + dk * np.where(lag >= 0, sigma0(np.clip(lag, 0.0, None), b), 0.0)
    return np.where(u >= 0, np.exp(-GAMMA * safe) * amp, 0.0)


def _ideal_cells(t0: float, phase: PhaseProfile, b: float, quad: QuadratureSpec) -> np.ndarray:
    steps, horizon = _effective_horizon(quad)
    h = quad.grid_step
    c0 = phase.factor(t0).real
    delays, dc = _future_edges(t0, phase, horizon)

    def density(u):
        return _ideal_amplitude(u, c0, delays, dc, b) ** 2

    cells = h * density((np.arange(steps) + 0.5) * h)
    # midpoint rule split at every jump
    for yk in delays:
        j = int(yk // h)
        if j >= steps:
            continue
        lo, hi = j * h, (j + 1) * h
        left, right = density(np.array([0.5 * (lo + yk), 0.5 * (yk + hi)]))
        cells[j] = (yk - lo) * left + (hi - yk) * right
    return cells


def _realistic_cells(t0s: np.ndarray, phase: PhaseProfile, b: float, quad: QuadratureSpec) -> np.ndarray:
    steps, _ = _effective_horizon(quad)
    h = quad.grid_step
    u = np.arange(steps + 1) * h
    mids = (np.arange(steps) + 0.5) * h
    s0 = sigma0(u, b)
    weights = s0[:-1] - s0[1:]
    decay = np.exp(-GAMMA * u)
    cells = np.empty((t0s.size, steps))
    for start in range(0, t0s.size, _ROW_CHUNK):
        rows = t0s[start:start + _ROW_CHUNK]
        c_u = phase.interpolated_factor(rows[:, None] + u[None, :], h / 2)
        c_mid = phase.interpolated_factor(rows[:, None] + mids[None, :], h / 2)
        scattered = np.zeros_like(c_u)
        scattered[:, 1:] = signal.fftconvolve(c_mid, weights[None, :], axes=1)[:, :steps]
        dens = np.abs(decay[None, :] * (c_u - scattered)) ** 2
        cells[start:start + rows.size] = 0.5 * h * (dens[:, :-1] + dens[:, 1:])
    return cells


def emission_cells(t0s, phase: PhaseProfile, T: float, quad: QuadratureSpec) -> np.ndarray:
    """int |a(u)|^2 du over each delay cell [j h, (j+1) h) for photons emitted at t0s.

    Returns an array of shape (len(t0s), steps). Rows sum to the resonant transmission
    times (1 - exp(-H)).
    """
    b = coupling(T)
    t0s = np.atleast_1d(np.asarray(t0s, dtype=float))
    if phase.mode == "ideal":
        return np.vstack([_ideal_cells(t0, phase, b, quad) for t0 in t0s])
    return _realistic_cells(t0s, phase, b, quad)


def photon_amplitude(u, t0: float, phase: PhaseProfile, T: float, quad: QuadratureSpec):
    """Transmitted amplitude u after emission at t0 (delta-function normalization 2*gamma = 1)."""
    b = coupling(T)
    u_arr = np.atleast_1d(np.asarray(u, dtype=float))
    steps, horizon = _effective_horizon(quad)
    if phase.mode == "ideal":
        delays, dc = _future_edges(t0, phase, max(horizon, float(u_arr.max(initial=0.0))))
        out = _ideal_amplitude(u_arr, phase.factor(t0).real, delays, dc, b).astype(complex)
    else:
        h = quad.grid_step
        grid = np.arange(steps + 1) * h
        mids = (np.arange(steps) + 0.5) * h
        s0 = sigma0(grid, b)
        c_u = phase.interpolated_factor(t0 + grid, h / 2)
        c_mid = phase.interpolated_factor(t0 + mids, h / 2)
        scattered = np.zeros_like(c_u)
        scattered[1:] = signal.fftconvolve(c_mid, s0[:-1] - s0[1:])[:steps]
        amp = np.exp(-GAMMA * grid) * (c_u - scattered)
        out = (np.interp(u_arr, grid, amp.real, right=0.0)
               + 1j * np.interp(u_arr, grid, amp.imag, right=0.0))
        out = np.where(u_arr >= 0, out, 0.0)
    return out if np.ndim(u) else complex(out[0])


def photon_transmission(t0: float, phase: PhaseProfile, T: float, quad: QuadratureSpec) -> float:
    """Resonant detection probability int_0^H |a|^2 du / (1 - exp(-H)) of one photon."""
    _, horizon = _effective_horizon(quad)
    cells = emission_cells([t0], phase, T, quad)[0]
    return float(cells.sum() / -math.expm1(-horizon))
