#!/usr/bin/env python3
"""
Stealth analysis: how much more transparent the absorber gets while a message is sent, and the
filter that hides it from an eavesdropper counting totals.
"""

import math
from typing import Optional, Union

from pydantic import BaseModel, ConfigDict
from scipy import stats

from .codec import TimingConfig, add_framing, bits_to_pulse_train, text_to_bits
from .config import (
    DEFAULT_T1_NS, REFERENCE_COUNTS_WITH, REFERENCE_COUNTS_WITHOUT,
    REFERENCE_RELATIVE_INCREASE, REFERENCE_PER_PULSE,
)
from .physics import AbsorberParams, PhaseProfile, QuadratureSpec, period_mean_rate


class StealthReport(BaseModel):
    """Period-averaged observed rates N/N0 with and without the message."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    mean_rate_with_message: float
    mean_rate_without: float
    relative_increase: float
    pulse_count: int
    per_pulse_contribution: float
    filter_transmission: float
    reference_relative_increase: float = REFERENCE_RELATIVE_INCREASE
    reference_per_pulse: float = REFERENCE_PER_PULSE
    reference_counts_with: int = REFERENCE_COUNTS_WITH
    reference_counts_without: int = REFERENCE_COUNTS_WITHOUT

    @classmethod
    def from_rates(cls, with_message: float, without: float, pulse_count: int) -> "StealthReport":
        increase = with_message / without - 1.0
        return cls(
            mean_rate_with_message=with_message,
            mean_rate_without=without,
            relative_increase=increase,
            pulse_count=pulse_count,
            per_pulse_contribution=increase / pulse_count if pulse_count else 0.0,
            filter_transmission=min(without / with_message, 1.0) if pulse_count else 1.0,
        )

    @property
    def compensating_depth(self) -> float:
        """Extra nonresonant depth equivalent to the filter."""
        return -math.log(self.filter_transmission)


def observed_mean(phase: PhaseProfile, absorber: AbsorberParams, quad: QuadratureSpec) -> float:
    """Period average of [(1 - f) + f N_pi/N0] exp(-beta)."""
    absorber.require_resonance("stealth analysis")
    f = absorber.recoilless_fraction
    resonant = period_mean_rate(phase, absorber.optical_thickness, quad)
    return ((1.0 - f) + f * resonant) * math.exp(-absorber.nonresonant_depth)


def stealth_report(message: Union[bytes, str], cfg: TimingConfig, absorber: AbsorberParams,
                   quad: QuadratureSpec, t1_ns: float = DEFAULT_T1_NS,
                   phase: Optional[PhaseProfile] = None) -> StealthReport:
    """Compare the message-modulated and unmodulated period-averaged count rates.

    `phase` overrides the ideal profile built from the message (for realistic edges).
    """
    train = add_framing(bits_to_pulse_train(text_to_bits(message), cfg), cfg)
    if phase is None:
        phase = PhaseProfile.from_pulse_train(train, t1_ns)
    plain = PhaseProfile.constant(phase.period)

    return StealthReport.from_rates(observed_mean(phase, absorber, quad), observed_mean(plain, absorber, quad),
                                    train.pulse_count)


def filter_compensation(report: StealthReport) -> float:
    """Transmission of the filter that equalizes total counts with and without the message."""
    return report.filter_transmission


def compensated_absorber(absorber: AbsorberParams, report: StealthReport) -> AbsorberParams:
    """The absorber as seen through the compensating filter."""
    return absorber.model_copy(
        update={"nonresonant_depth": absorber.nonresonant_depth + report.compensating_depth})


def poisson_two_sample_test(counts_a: int, counts_b: int, exposure_a: float = 1.0,
                            exposure_b: float = 1.0) -> float:
    """Two-sided p-value that two Poisson counts share one rate (conditional binomial test)."""
    total = counts_a + counts_b
    if total == 0:
        return 1.0
    share = exposure_a / (exposure_a + exposure_b)
    return float(stats.binomtest(counts_a, total, share).pvalue)
