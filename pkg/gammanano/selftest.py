#!/usr/bin/env python3
"""
Headless acceptance checks at reduced statistics.

Each check compares an implementation path with an independent oracle (closed form, series,
second simulation route) and reports observed against expected.
"""

import asyncio
import logging
import math
from typing import Callable, List, NamedTuple

import numpy as np

from .analysis import compensated_absorber, observed_mean, stealth_report
from .core import build_phase_profile, encode_message
from .codec import (
    TimingConfig, add_framing, bits_to_pulse_train, bits_to_text, edges_to_bits, realign_cyclic,
    text_to_bits,
)
from .errors import GammaNanoError
from .experiment import ExperimentConfig
from .montecarlo import StreamParams, build_tables, run_macro, run_macro_async, run_micro
from .physics import (
    AbsorberParams, PhaseProfile, QuadratureSpec, baseline_nb, convolve_response,
    frequency_domain_envelope, integrated_rate_step, period_mean_rate, photon_transmission,
    pi_shift_envelope, pi_step_field, rate_general_phase, resonant_envelope,
)
from .sync import accumulate, decode_histogram, detect_peaks, flatness_metric

ORACLE_TOL = 1e-4
RATE_REL_TOL = 1e-3
SPECTRAL_THICKNESSES = (0.0, 1.0, 5.0, 10.0)


class CheckResult(NamedTuple):
    name: str
    passed: bool
    observed: str
    expected: str


def _series_baseline(T: float) -> float:
    x = T / 4.0
    terms = [(x ** k / math.factorial(k)) ** 2 for k in range(60)]
    return math.exp(-T / 2.0) * math.fsum(terms)


def _tolerance_gate(quad: QuadratureSpec, tol: float):
    """A quadrature tolerance looser than the oracle tolerance cannot certify anything."""
    if quad.rel_tol > tol:
        return CheckResult("", False, f"rel_tol {quad.rel_tol:g}", f"rel_tol <= {tol:g}")
    return None


# =============================================================================
# PHYSICS
# =============================================================================

def check_baseline(quad: QuadratureSpec) -> CheckResult:
    nb, oracle = baseline_nb(5.0), _series_baseline(5.0)
    ok = abs(nb - 0.270) <= 1e-3 and abs(nb - oracle) <= 1e-12
    return CheckResult("baseline n_B(T=5)", ok, f"{nb:.6f} (series {oracle:.6f})", "0.270 +- 0.001")


def check_echo_peak(quad: QuadratureSpec) -> CheckResult:
    gate = _tolerance_gate(quad, ORACLE_TOL)
    if gate:
        return gate._replace(name="echo peak")
    excess = integrated_rate_step(1.0, 1.0, 5.0, quad) - baseline_nb(5.0)
    return CheckResult("echo peak", abs(excess - 2.854) <= 0.01, f"{excess:.4f}", "2.854 +- 0.01")


def check_spectral_inversion(quad: QuadratureSpec, points: int = 41) -> CheckResult:
    gate = _tolerance_gate(quad, ORACLE_TOL)
    if gate:
        return gate._replace(name="spectral inversion vs closed form")
    grid = np.linspace(0.0, 10.0, points)
    worst = 0.0
    for T in SPECTRAL_THICKNESSES:
        absorber = AbsorberParams(optical_thickness=T)
        closed = resonant_envelope(grid, T)
        numeric = np.array([frequency_domain_envelope(u, absorber, quad) for u in grid])
        worst = max(worst, float(np.max(np.abs(numeric - closed))))
    return CheckResult("spectral inversion vs closed form", worst < ORACLE_TOL,
                       f"{worst:.2e} over T in {SPECTRAL_THICKNESSES}, {points} points on [0, 10]",
                       f"< {ORACLE_TOL:g}")


def check_convolution(quad: QuadratureSpec) -> CheckResult:
    gate = _tolerance_gate(quad, ORACLE_TOL)
    if gate:
        return gate._replace(name="convolution vs pi-step closed form")
    times = np.array([0.5, 1.5, 3.0, 6.0])
    field = convolve_response(pi_step_field(0.0, 1.0), AbsorberParams(optical_thickness=5.0), quad, times)
    worst = float(np.max(np.abs(field(times) - pi_shift_envelope(times, 1.0, 5.0))))
    return CheckResult("convolution vs pi-step closed form", worst < ORACLE_TOL, f"{worst:.2e}",
                       f"< {ORACLE_TOL:g}")


def check_step_rate(quad: QuadratureSpec) -> CheckResult:
    gate = _tolerance_gate(quad, RATE_REL_TOL)
    if gate:
        return gate._replace(name="general-phase rate vs single step")
    profile = PhaseProfile(period=80.0, pulses=((1.0, 50.0),))
    t = np.array([1.2, 2.0, 4.0, 10.0])
    general = np.asarray(rate_general_phase(t, profile, 5.0, quad))
    step = np.asarray(integrated_rate_step(t, 1.0, 5.0, quad))
    worst = float(np.max(np.abs(general / step - 1.0)))
    return CheckResult("general-phase rate vs single step", worst < RATE_REL_TOL, f"{worst:.2e}",
                       f"< {RATE_REL_TOL:g}")


def check_constant_phase(quad: QuadratureSpec) -> CheckResult:
    gate = _tolerance_gate(quad, RATE_REL_TOL)
    if gate:
        return gate._replace(name="constant phase vs n_B")
    rate = rate_general_phase(0.3, PhaseProfile.constant(10.0), 5.0, quad)
    rel = abs(rate / baseline_nb(5.0) - 1.0)
    return CheckResult("constant phase vs n_B", rel < RATE_REL_TOL, f"{rel:.2e}", f"< {RATE_REL_TOL:g}")


def check_passivity(cfg: ExperimentConfig) -> CheckResult:
    phase = build_phase_profile(cfg, encode_message(cfg).train)
    t0s = np.linspace(0.0, phase.period, 17)[:-1]
    worst = max(photon_transmission(t0, phase, cfg.absorber.optical_thickness, cfg.quadrature) for t0 in t0s)
    return CheckResult("passivity", worst <= 1.0 + 1e-9, f"max {worst:.6f}", "<= 1")


def check_period_bounds(cfg: ExperimentConfig) -> CheckResult:
    """Period-averaged rate of the message lies between n_B and 1."""
    phase = build_phase_profile(cfg, encode_message(cfg).train)
    T = cfg.absorber.optical_thickness
    mean, nb = period_mean_rate(phase, T, cfg.quadrature), baseline_nb(T)
    ok = nb - RATE_REL_TOL <= mean <= 1.0 + RATE_REL_TOL
    return CheckResult("period-averaged rate bounds", ok, f"{mean:.6f}", f"[{nb:.6f}, 1] +- {RATE_REL_TOL:g}")


# =============================================================================
# CODEC
# =============================================================================

def check_codec_round_trip(cfg: ExperimentConfig, messages: int) -> CheckResult:
    rng = np.random.default_rng(cfg.seed)
    failures = 0
    for _ in range(messages):
        payload = bytes(rng.integers(0, 256, int(rng.integers(0, 8))).tolist())
        timing = TimingConfig(bit_count=8 * len(payload), period_ns=cfg.timing.period_ns,
                              bin_width_ns=cfg.timing.bin_width_ns)
        train = bits_to_pulse_train(text_to_bits(payload), timing)
        if bits_to_text(edges_to_bits(train, timing)) != payload:
            failures += 1
    return CheckResult("codec round trip", failures == 0, f"{failures} failures", f"0 of {messages}")


def check_cyclic_rotations(cfg: ExperimentConfig) -> CheckResult:
    timing = cfg.timing.model_copy(update={"framing": "code-signal"})
    train = add_framing(bits_to_pulse_train(text_to_bits(cfg.message_bytes), timing), timing)
    tau = timing.bin_width_ns
    rotations = int(timing.period_ns // tau)
    failures = 0
    for k in range(rotations):
        try:
            realigned = realign_cyclic(train.rotated_times(k * tau), timing)
            if bits_to_text(edges_to_bits(realigned, timing)) != cfg.message_bytes:
                failures += 1
        except GammaNanoError:
            failures += 1
    return CheckResult("framed decode under rotation", failures == 0, f"{failures} failures",
                       f"0 of {rotations}")


# =============================================================================
# MONTE CARLO AND SYNC
# =============================================================================

def _quick_stream(cfg: ExperimentConfig, mode: str, duration_s: float) -> StreamParams:
    return cfg.stream.model_copy(update={"mode": mode, "mean_rate_hz": 3e5, "duration_s": duration_s,
                                         "chunk_s": 0.25})


def peaks_match(a: np.ndarray, b: np.ndarray, width_ns: float, span_ns: float) -> bool:
    """Same number of peaks, pairwise within one channel (circular distance)."""
    if a.size != b.size:
        return False
    if a.size == 0:
        return True
    gap = np.abs(np.mod(a - b + 0.5 * span_ns, span_ns) - 0.5 * span_ns)
    return bool(np.max(gap) <= width_ns)


def check_micro_macro(cfg: ExperimentConfig, phase: PhaseProfile, macro_tables, rows: int) -> CheckResult:
    micro_tables = build_tables(phase, cfg.absorber, cfg.quadrature, "micro", cfg.units.t1_source_ns, rows)
    tac = cfg.tac.model_copy(update={"frequency_offset_hz": 0.0, "start_phase_ns": 0.0})
    micro = _quick_stream(cfg, "micro", 4.0)
    macro = _quick_stream(cfg, "macro", 4.0).model_copy(update={"seed": cfg.seed + 1})
    ha = accumulate(run_micro(micro, micro_tables), tac, micro.duration_ns)
    hb = accumulate(run_macro(macro, macro_tables), tac, macro.duration_ns)
    a, b = ha.counts, hb.counts
    sigma = np.sqrt(np.maximum(a + b, 1))
    within = float(np.mean(np.abs(a - b) <= 3.0 * sigma))
    pa, pb = detect_peaks(ha, cfg.peaks), detect_peaks(hb, cfg.peaks)
    same = peaks_match(pa, pb, ha.channel_width_ns, ha.span_ns)
    return CheckResult("micro vs macro histograms", within >= 0.95 and same,
                       f"{within:.1%} channels within 3 sigma, peaks {pa.size} vs {pb.size}",
                       ">= 95%, same peaks within one channel")


def check_end_to_end(cfg: ExperimentConfig, macro_tables) -> CheckResult:
    """Encoded message -> macro stream -> synchronized TAC -> decoded message."""
    update = {"frequency_offset_hz": 0.0}
    if cfg.timing.framing != "code-signal":
        update["start_phase_ns"] = 0.0
    tac = cfg.tac.model_copy(update=update)
    stream = _quick_stream(cfg, "macro", 4.0)
    h = accumulate(run_macro(stream, macro_tables), tac, stream.duration_ns)
    text = decode_histogram(h, cfg.timing, tac, cfg.peaks)
    return CheckResult("end-to-end decode", text == cfg.message_bytes, repr(text), repr(cfg.message_bytes))


def check_mismatch(cfg: ExperimentConfig, macro_tables) -> CheckResult:
    duration = 2.0
    stream = _quick_stream(cfg, "macro", duration)
    records = run_macro(stream, macro_tables)
    synced = accumulate(records, cfg.tac.model_copy(update={"frequency_offset_hz": 0.0}))
    slid = accumulate(records, cfg.tac.model_copy(update={"frequency_offset_hz": 2.0 / duration}))
    p_slid = flatness_metric(slid).p_value
    p_synced = flatness_metric(synced).log10_p
    timing = cfg.timing
    try:
        decode_histogram(slid, timing, policy=cfg.peaks)
        slid_decodes = True
    except GammaNanoError:
        slid_decodes = False
    ok = p_slid > 1e-3 and p_synced < -300 and not slid_decodes
    return CheckResult("frequency mismatch smears the message", ok,
                       f"p(mismatched) {p_slid:.3g}, log10 p(synced) {p_synced:.0f}, "
                       f"mismatched decodes: {slid_decodes}",
                       "p > 1e-3, log10 p < -300, no decode")


def check_thread_determinism(cfg: ExperimentConfig, macro_tables) -> CheckResult:
    stream = _quick_stream(cfg, "macro", 1.0)
    serial = run_macro(stream, macro_tables)
    threaded = asyncio.run(run_macro_async(stream, macro_tables, threads=3))
    same = serial.shape == threaded.shape and bool(np.array_equal(serial, threaded))
    return CheckResult("thread-count determinism", same, f"{serial.size} vs {threaded.size} records",
                       "identical streams")


def check_stealth(cfg: ExperimentConfig) -> CheckResult:
    report = stealth_report(cfg.message_bytes, cfg.timing, cfg.absorber, cfg.quadrature,
                            t1_ns=cfg.units.t1_source_ns)
    phase = PhaseProfile.from_pulse_train(encode_message(cfg).train, cfg.units.t1_source_ns)
    hidden = observed_mean(phase, compensated_absorber(cfg.absorber, report), cfg.quadrature)
    closure = abs(hidden / report.mean_rate_without - 1.0)
    ok = report.relative_increase > 0 and closure < 1e-6
    return CheckResult("stealth filter closure", ok,
                       f"increase {report.relative_increase:.4%}, closure {closure:.1e}",
                       "increase > 0, closure < 1e-6")


# =============================================================================
# RUNNER
# =============================================================================

def _guarded(name: str, check: Callable[[], CheckResult]) -> CheckResult:
    try:
        result = check()
    except GammaNanoError as e:
        result = CheckResult(name, False, f"{type(e).__name__}: {e}", "no error")
    mark = "✓" if result.passed else "✗"
    log = logging.info if result.passed else logging.warning
    log(f"  {mark} {result.name}: {result.observed} (expected {result.expected})")
    return result


def run_selftest(cfg: ExperimentConfig, quick: bool = True) -> List[CheckResult]:
    """Run every check; failures are collected, never raised."""
    quad = cfg.quadrature
    rows = 1024 if quick else 4096
    messages = 200 if quick else 1000
    logging.info(f"Running self-test ({'quick' if quick else 'full'})...")

    results = [
        _guarded("baseline n_B(T=5)", lambda: check_baseline(quad)),
        _guarded("echo peak", lambda: check_echo_peak(quad)),
        _guarded("spectral inversion vs closed form", lambda: check_spectral_inversion(quad)),
        _guarded("convolution vs pi-step closed form", lambda: check_convolution(quad)),
        _guarded("general-phase rate vs single step", lambda: check_step_rate(quad)),
        _guarded("constant phase vs n_B", lambda: check_constant_phase(quad)),
        _guarded("passivity", lambda: check_passivity(cfg)),
        _guarded("period-averaged rate bounds", lambda: check_period_bounds(cfg)),
        _guarded("codec round trip", lambda: check_codec_round_trip(cfg, messages)),
        _guarded("framed decode under rotation", lambda: check_cyclic_rotations(cfg)),
        _guarded("stealth filter closure", lambda: check_stealth(cfg)),
    ]

    try:
        phase = build_phase_profile(cfg, encode_message(cfg).train)
        macro_tables = build_tables(phase, cfg.absorber, quad, "macro", cfg.units.t1_source_ns)
    except GammaNanoError as e:
        results.append(CheckResult("sampling tables", False, str(e), "tables build"))
        return results
    results += [
        _guarded("end-to-end decode", lambda: check_end_to_end(cfg, macro_tables)),
        _guarded("micro vs macro histograms", lambda: check_micro_macro(cfg, phase, macro_tables, rows)),
        _guarded("frequency mismatch smears the message", lambda: check_mismatch(cfg, macro_tables)),
        _guarded("thread-count determinism", lambda: check_thread_determinism(cfg, macro_tables)),
    ]
    return results
