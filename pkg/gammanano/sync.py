#!/usr/bin/env python3
"""
Start-stop time-to-amplitude conversion, histogram statistics and peak-based decoding.
"""

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import stats

from .codec import TimingConfig, bits_to_text, edges_to_bits, realign_cyclic
from .config import (
    DEFAULT_PERIOD_NS, DEFAULT_FREQUENCY_OFFSET_HZ, DEFAULT_CHANNEL_COUNT, DEFAULT_START_PHASE_NS,
    DEFAULT_PEAK_K_SIGMA, DEFAULT_MIN_TOTAL_COUNTS, DEFAULT_MIN_PEAK_CHANNELS,
)
from .errors import CodecError, DecodeError, FramingError, InsufficientStatisticsError

NS_PER_S = 1e9


class TacConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    start_period_ns: float = Field(DEFAULT_PERIOD_NS, gt=0)
    frequency_offset_hz: float = DEFAULT_FREQUENCY_OFFSET_HZ
    channel_count: int = Field(DEFAULT_CHANNEL_COUNT, ge=1)
    start_phase_ns: float = DEFAULT_START_PHASE_NS

    @model_validator(mode="after")
    def _positive_start_rate(self):
        if NS_PER_S / self.start_period_ns + self.frequency_offset_hz <= 0:
            raise ValueError("start rate (1/start_period + frequency_offset) must be positive")
        return self

    @property
    def channel_width_ns(self) -> float:
        return self.start_period_ns / self.channel_count

    @property
    def effective_period_ns(self) -> float:
        """Actual spacing of start signals, 1/(Omega_S + delta)."""
        return NS_PER_S / (NS_PER_S / self.start_period_ns + self.frequency_offset_hz)


@dataclass(frozen=True)
class Histogram:
    counts: np.ndarray
    channel_width_ns: float
    total_starts: int = 0

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64)
        if counts.ndim != 1 or np.any(counts < 0):
            raise ValueError("counts must be a 1-D array of non-negative integers")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def channel_count(self) -> int:
        return self.counts.size

    @property
    def total_counts(self) -> int:
        return int(self.counts.sum())

    @property
    def span_ns(self) -> float:
        return self.channel_count * self.channel_width_ns

    def channel_times(self) -> np.ndarray:
        """Centre of every channel in ns."""
        return (np.arange(self.channel_count) + 0.5) * self.channel_width_ns

    def __add__(self, other: "Histogram") -> "Histogram":
        if other.channel_count != self.channel_count or not math.isclose(
                other.channel_width_ns, self.channel_width_ns):
            raise ValueError("histograms have different channel layouts")
        return Histogram(self.counts + other.counts, self.channel_width_ns,
                         self.total_starts + other.total_starts)


class FlatnessReport(NamedTuple):
    max_deviation: float
    chi2: float
    dof: int
    p_value: float
    log10_p: float


class PeakPolicy(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    k_sigma: float = Field(DEFAULT_PEAK_K_SIGMA, gt=0)
    min_total_counts: int = Field(DEFAULT_MIN_TOTAL_COUNTS, ge=0)
    min_peak_channels: int = Field(DEFAULT_MIN_PEAK_CHANNELS, ge=1)


# =============================================================================
# TAC
# =============================================================================

def accumulate(records, tac: TacConfig, duration_ns: Optional[float] = None) -> Histogram:
    """Histogram of record delays after the latest start signal.

    Starts fire at start_phase + k/(Omega_S + delta). Records before the first start are
    dropped; delays longer than the histogram span wrap around it.
    """
    t = np.asarray(records, dtype=float)
    rel = t - tac.start_phase_ns
    rel = rel[rel >= 0]
    period = tac.effective_period_ns
    delay = rel - np.floor(rel / period) * period
    channel = np.floor(delay / tac.channel_width_ns).astype(np.int64) % tac.channel_count
    counts = np.bincount(channel, minlength=tac.channel_count)

    if duration_ns is not None:
        span = duration_ns - tac.start_phase_ns
        starts = int(math.floor(span / period)) + 1 if span > 0 else 0
    else:
        starts = int(math.floor(rel.max() / period)) + 1 if rel.size else 0
    return Histogram(counts=counts, channel_width_ns=tac.channel_width_ns, total_starts=starts)


def flatness_metric(h: Histogram) -> FlatnessReport:
    """Largest normalized deviation from the mean and the chi-square test against uniform."""
    if h.total_counts <= 0:
        raise InsufficientStatisticsError("empty histogram")
    counts = h.counts.astype(float)
    mean = counts.mean()
    deviation = float(np.max(np.abs(counts - mean)) / math.sqrt(mean))
    chi2 = float(np.sum((counts - mean) ** 2) / mean)
    dof = h.channel_count - 1
    if dof == 0:
        return FlatnessReport(deviation, chi2, dof, 1.0, 0.0)
    p_value = float(stats.chi2.sf(chi2, dof))
    log10_p = float(stats.chi2.logsf(chi2, dof) / math.log(10))
    return FlatnessReport(deviation, chi2, dof, p_value, log10_p)


# =============================================================================
# PEAKS
# =============================================================================

def _supra_threshold_runs(above: np.ndarray):
    """Index runs of True, merging a run that wraps from the last channel to the first."""
    n = above.size
    if not above.any():
        return []
    if above.all():
        return [np.arange(n)]
    start = int(np.argmin(above))  # a below-threshold channel
    order = (np.arange(n) + start) % n
    runs, current = [], []
    for pos, idx in enumerate(order):
        if above[idx]:
            # keep indices increasing across the wrap so centroids stay contiguous
            current.append(start + pos)
        elif current:
            runs.append(np.array(current))
            current = []
    if current:
        runs.append(np.array(current))
    return runs


def detect_peaks(h: Histogram, policy: Optional[PeakPolicy] = None) -> np.ndarray:
    """Count-weighted centroids (ns within the span) of supra-threshold channel runs."""
    policy = policy or PeakPolicy()
    if h.total_counts < policy.min_total_counts:
        raise InsufficientStatisticsError(
            f"insufficient statistics: {h.total_counts} counts < {policy.min_total_counts}")
    counts = h.counts.astype(float)
    baseline = float(np.median(counts))
    threshold = baseline + policy.k_sigma * max(math.sqrt(baseline), 1.0)
    above = counts > threshold

    peaks = []
    for run in _supra_threshold_runs(above):
        if run.size < policy.min_peak_channels:
            continue
        weights = counts[run % h.channel_count]
        centre = float(np.sum(weights * (run + 0.5)) / weights.sum()) * h.channel_width_ns
        peaks.append(centre % h.span_ns)
    return np.sort(np.array(peaks, dtype=float))


def decode_histogram(h: Histogram, cfg: TimingConfig, tac: Optional[TacConfig] = None,
                     policy: Optional[PeakPolicy] = None, peaks: Optional[np.ndarray] = None) -> bytes:
    """detect_peaks -> realign_cyclic (code-signal) -> edges_to_bits -> bits_to_text.

    Pass peaks already found by detect_peaks to skip the detection step.
    """
    if tac is not None and not math.isclose(tac.start_period_ns, cfg.period_ns):
        logging.warning(f"  ✗ TAC period {tac.start_period_ns} ns differs from message period "
                        f"{cfg.period_ns} ns")
    if peaks is None:
        peaks = detect_peaks(h, policy)
    logging.info(f"  ✓ {peaks.size} peaks above threshold")
    if peaks.size == 0 and cfg.framed_bit_count > 0:
        raise DecodeError("insufficient peaks", stage="detect")

    edges = peaks
    if cfg.framing == "code-signal":
        try:
            edges = realign_cyclic(peaks, cfg)
        except FramingError as e:
            raise DecodeError(str(e), stage="frame", cause=e) from e
    try:
        bits = edges_to_bits(edges, cfg, bit_count=cfg.framed_bit_count)
    except CodecError as e:
        raise DecodeError(str(e), stage="bits", cause=e) from e
    try:
        return bits_to_text(bits, cfg.framing if cfg.framing == "stx-etx" else "none")
    except CodecError as e:
        stage = "frame" if isinstance(e, FramingError) else "text"
        raise DecodeError(str(e), stage=stage, cause=e) from e
