#!/usr/bin/env python3
"""
gammanano pipeline: message -> voltage pulses -> phase profile -> detector stream -> TAC
histogram -> recovered message.

Usage:
    python -m gammanano simulate --config nature.json --out run/

Or in code:
    import asyncio
    import gammanano
    cfg = gammanano.load_config('nature.json')
    result = asyncio.run(gammanano.simulate_async(cfg))
    print(gammanano.decode(result.histogram, cfg).text)
"""

import logging
import time
from pathlib import Path
from typing import Dict, NamedTuple, Optional, Union

import numpy as np

from .analysis import StealthReport, stealth_report
from .codec import BitSequence, PulseTrain, add_framing, bits_to_pulse_train, text_to_bits
from .config import (
    RECORDS_FILE, HISTOGRAM_FILE, SUMMARY_FILE, PULSE_TRAIN_FILE, CURVES_FILE, REPORT_FILE,
)
from .experiment import ExperimentConfig, config_digest
from .montecarlo import SamplingTables, build_tables, run, run_async
from .physics import (
    PhaseProfile, baseline_nb, displacement_profile, integrated_rate_step, pi_shift_envelope,
    rate_general_phase, resonant_envelope,
)
from .sync import FlatnessReport, Histogram, accumulate, decode_histogram, detect_peaks, flatness_metric
from .utils import print_stats, read_histogram, write_csv, write_histogram, write_json, write_records

# Configure logging
logging.basicConfig(level=logging.INFO, format='%(message)s')


class EncodedMessage(NamedTuple):
    bits: BitSequence
    payload: PulseTrain
    train: PulseTrain


class SimulationResult(NamedTuple):
    records: np.ndarray
    histogram: Histogram
    tables: SamplingTables
    stats: Dict[str, object]


class DecodeResult(NamedTuple):
    text: bytes
    peaks: np.ndarray
    flatness: FlatnessReport


# =============================================================================
# BUILDING BLOCKS
# =============================================================================

def encode_message(cfg: ExperimentConfig) -> EncodedMessage:
    bits = text_to_bits(cfg.message_bytes)
    payload = bits_to_pulse_train(bits, cfg.timing)
    return EncodedMessage(bits, payload, add_framing(payload, cfg.timing))


def build_phase_profile(cfg: ExperimentConfig, train: PulseTrain) -> PhaseProfile:
    t1 = cfg.units.t1_source_ns
    return PhaseProfile.from_pulse_train(
        train, t1,
        mode=cfg.phase.mode,
        rise_time=cfg.phase.rise_time_ns / t1,
        convention=cfg.phase.convention,
        displacement_wavelengths=cfg.phase.displacement_wavelengths,
    )


def build_sampling_tables(cfg: ExperimentConfig, phase: Optional[PhaseProfile] = None) -> SamplingTables:
    if phase is None:
        phase = build_phase_profile(cfg, encode_message(cfg).train)
    return build_tables(phase, cfg.absorber, cfg.quadrature, cfg.stream.mode,
                        t1_ns=cfg.units.t1_source_ns)


# =============================================================================
# ENCODE
# =============================================================================

def encode(cfg: ExperimentConfig) -> Dict[str, object]:
    """Write the pulse train and report bit, pulse and edge counts."""
    encoded = encode_message(cfg)
    train = encoded.train
    digest = config_digest(cfg)
    rows = [(i, e.time_ns, int(e.rising), int(e.marker)) for i, e in enumerate(train.edges)]
    path = write_csv(Path(cfg.output_dir) / PULSE_TRAIN_FILE, ["edge", "time_ns", "rising", "marker"],
                     np.array(rows, dtype=float).reshape(-1, 4), digest, cfg.seed)
    logging.info(f"✓ Pulse train written to {path}")

    stats = {
        "bits": len(encoded.bits),
        "bit_string": str(encoded.bits) or "-",
        "pulses": encoded.payload.pulse_count,
        "edges": encoded.payload.edge_count,
        "framing": cfg.timing.framing,
        "framing_edges": len(train.marker_edges()),
        "frame_span_ns": cfg.timing.frame_span_ns,
    }
    if cfg.timing.framing == "stx-etx":
        stats["framing_edges"] = train.edge_count
    print_stats(stats, "ENCODED MESSAGE")
    return stats


# =============================================================================
# CURVES
# =============================================================================

CURVE_COLUMNS = ["t", "t_ns", "a0_sq", "api_sq", "rate_step", "displacement", "phase_realistic",
                 "rate_ideal", "rate_realistic"]


def analytic_curves(cfg: ExperimentConfig) -> np.ndarray:
    """Rows of CURVE_COLUMNS on the curve grid (times in units of T1)."""
    c, quad = cfg.curves, cfg.quadrature
    T = cfg.absorber.optical_thickness
    t = np.arange(0.0, c.t_max + 0.5 * c.step, c.step)
    period = c.t_max + quad.horizon + (c.t2 - c.t1)
    pulse = ((c.t1, c.t2),)
    ideal = PhaseProfile(period=period, pulses=pulse)
    realistic = PhaseProfile(period=period, pulses=pulse, mode="realistic", rise_time=c.rise_time)

    a0 = np.asarray(resonant_envelope(t, T)) ** 2
    api = np.asarray(pi_shift_envelope(t, c.t1, T)) ** 2 if c.t1 > 0 else a0
    columns = [
        t,
        cfg.units.to_ns(t),
        a0,
        api,
        integrated_rate_step(t, c.t1, T, quad),
        displacement_profile(t, c.t1, c.t2, c.rise_time),
        realistic.phase(t),
        rate_general_phase(t, ideal, T, quad),
        rate_general_phase(t, realistic, T, quad),
    ]
    return np.column_stack([np.asarray(col, dtype=float) for col in columns])


def curves(cfg: ExperimentConfig) -> Dict[str, object]:
    rows = analytic_curves(cfg)
    path = write_csv(Path(cfg.output_dir) / CURVES_FILE, CURVE_COLUMNS, rows, config_digest(cfg), cfg.seed)
    logging.info(f"✓ Curves written to {path}")
    T = cfg.absorber.optical_thickness
    stats = {
        "points": rows.shape[0],
        "optical_thickness": T,
        "baseline_nb": baseline_nb(T),
        "peak_rate_step": float(rows[:, 4].max()),
        "peak_rate_realistic": float(rows[:, 8].max()),
    }
    print_stats(stats, "ANALYTIC CURVES")
    return stats


# =============================================================================
# SIMULATE
# =============================================================================

def _prepare_simulation(cfg: ExperimentConfig) -> SamplingTables:
    encoded = encode_message(cfg)
    phase = build_phase_profile(cfg, encoded.train)
    logging.info(f"Building {cfg.stream.mode} tables: {encoded.train.pulse_count} pulses, "
                 f"period {cfg.timing.period_ns:g} ns, {cfg.phase.mode} edges")
    return build_tables(phase, cfg.absorber, cfg.quadrature, cfg.stream.mode, t1_ns=cfg.units.t1_source_ns)


def _finish_simulation(cfg: ExperimentConfig, tables: SamplingTables, records: np.ndarray,
                       elapsed: float, save_records: bool) -> SimulationResult:
    stream = cfg.stream
    histogram = accumulate(records, cfg.tac, duration_ns=stream.duration_ns)
    logging.info(f"✓ {records.size} detections in {elapsed:.1f} s, "
                 f"{histogram.total_starts} start signals")

    out = Path(cfg.output_dir)
    digest = config_digest(cfg)
    write_histogram(out / HISTOGRAM_FILE, histogram, cfg.tac, digest, cfg.seed)
    if save_records:
        write_records(out / RECORDS_FILE, records, digest, cfg.seed)
        logging.info(f"✓ Records written to {out / RECORDS_FILE}")
    else:
        logging.info("⊘ Records not saved")

    expected = stream.mean_rate_hz * stream.duration_s * stream.detector_efficiency \
        * tables.mean_detection_fraction()
    stats = {
        "mode": stream.mode,
        "duration_s": stream.duration_s,
        "detections": int(records.size),
        "expected_detections": expected,
        "detected_rate_hz": records.size / stream.duration_s if stream.duration_s else 0.0,
        "frequency_offset_hz": cfg.tac.frequency_offset_hz,
        "total_starts": histogram.total_starts,
        "runtime_s": elapsed,
    }
    if histogram.total_counts:
        flat = flatness_metric(histogram)
        stats.update(max_deviation=flat.max_deviation, chi2=flat.chi2, chi2_log10_p=flat.log10_p)
    write_json(out / SUMMARY_FILE, {k: v for k, v in stats.items() if k != "runtime_s"}
               | {"runtime_s": round(elapsed, 3)}, digest, cfg.seed)
    print_stats(stats, "SIMULATION")
    return SimulationResult(records, histogram, tables, stats)


def simulate(cfg: ExperimentConfig, save_records: bool = False) -> SimulationResult:
    """Single-threaded simulation. Writes histogram, sidecar, summary and optionally records."""
    start = time.perf_counter()
    tables = _prepare_simulation(cfg)
    records = run(cfg.stream, tables)
    return _finish_simulation(cfg, tables, records, time.perf_counter() - start, save_records)


async def simulate_async(cfg: ExperimentConfig, save_records: bool = False,
                         threads: Optional[int] = None) -> SimulationResult:
    """Chunks run on up to `threads` worker threads; output equals simulate()."""
    start = time.perf_counter()
    tables = _prepare_simulation(cfg)
    records = await run_async(cfg.stream, tables, threads or cfg.threads)
    return _finish_simulation(cfg, tables, records, time.perf_counter() - start, save_records)


# =============================================================================
# DECODE
# =============================================================================

def decode(source: Union[Histogram, str, Path], cfg: ExperimentConfig) -> DecodeResult:
    """Recover the message from a histogram (or a histogram CSV file).

    Raises DecodeError with the failing stage; flatness and peaks are logged first.
    """
    histogram = source if isinstance(source, Histogram) else read_histogram(source)
    flatness = flatness_metric(histogram)
    logging.info(f"Histogram: {histogram.total_counts} counts, max deviation "
                 f"{flatness.max_deviation:.1f} sigma, chi2 log10 p {flatness.log10_p:.1f}")
    peaks = detect_peaks(histogram, cfg.peaks)
    text = decode_histogram(histogram, cfg.timing, cfg.tac, cfg.peaks, peaks=peaks)
    logging.info(f"✓ Decoded {len(text)} bytes")
    return DecodeResult(text, peaks, flatness)


# =============================================================================
# ANALYZE
# =============================================================================

def analyze(cfg: ExperimentConfig) -> StealthReport:
    """Stealth report for the configured message, written as JSON."""
    phase = None
    if cfg.phase.mode == "realistic":
        phase = build_phase_profile(cfg, encode_message(cfg).train)
    report = stealth_report(cfg.message_bytes, cfg.timing, cfg.absorber, cfg.quadrature,
                            t1_ns=cfg.units.t1_source_ns, phase=phase)
    path = write_json(Path(cfg.output_dir) / REPORT_FILE,
                      report.model_dump() | {"compensating_depth": report.compensating_depth},
                      config_digest(cfg), cfg.seed)
    logging.info(f"✓ Report written to {path}")
    print_stats({
        "with_message": report.mean_rate_with_message,
        "without_message": report.mean_rate_without,
        "relative_increase": report.relative_increase,
        "pulses": report.pulse_count,
        "per_pulse_contribution": report.per_pulse_contribution,
        "filter_transmission": report.filter_transmission,
        "compensating_depth": report.compensating_depth,
        "reference_increase": report.reference_relative_increase,
        "reference_per_pulse": report.reference_per_pulse,
    }, "STEALTH REPORT")
    return report
