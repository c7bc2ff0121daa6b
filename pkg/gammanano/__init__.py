"""
gammanano - gamma-photon messaging by phase modulation of a resonant absorber

Simulates the whole link: a text message becomes rectangular voltage pulses, the pulses
shift the phase of an absorber in the photon beam, the detector stream is histogrammed by a
start-stop TAC locked to the message period, and the message is read back from the echo peaks.

Dependencies: numpy, scipy, pydantic
"""

from gammanano.core import (
    encode_message,
    build_phase_profile,
    build_sampling_tables,
    encode,
    curves,
    analytic_curves,
    simulate,
    simulate_async,
    decode,
    analyze,
)
from gammanano.codec import (
    TimingConfig,
    BitSequence,
    PulseTrain,
    text_to_bits,
    bits_to_text,
    bits_to_pulse_train,
    add_framing,
    edges_to_bits,
    realign_cyclic,
)
from gammanano.montecarlo import (
    StreamParams,
    SamplingTables,
    sample_emissions,
    build_tables,
    run_micro,
    run_micro_async,
    run_macro,
    run_macro_async,
)
from gammanano.sync import (
    TacConfig,
    Histogram,
    PeakPolicy,
    accumulate,
    flatness_metric,
    detect_peaks,
    decode_histogram,
)
from gammanano.analysis import StealthReport, stealth_report, filter_compensation, poisson_two_sample_test
from gammanano.experiment import ExperimentConfig, load_config, config_digest
from gammanano.selftest import run_selftest

__version__ = "0.1.0"
__all__ = [
    "encode_message",
    "build_phase_profile",
    "build_sampling_tables",
    "encode",
    "curves",
    "analytic_curves",
    "simulate",
    "simulate_async",
    "decode",
    "analyze",
    "TimingConfig",
    "BitSequence",
    "PulseTrain",
    "text_to_bits",
    "bits_to_text",
    "bits_to_pulse_train",
    "add_framing",
    "edges_to_bits",
    "realign_cyclic",
    "StreamParams",
    "SamplingTables",
    "sample_emissions",
    "build_tables",
    "run_micro",
    "run_micro_async",
    "run_macro",
    "run_macro_async",
    "TacConfig",
    "Histogram",
    "PeakPolicy",
    "accumulate",
    "flatness_metric",
    "detect_peaks",
    "decode_histogram",
    "StealthReport",
    "stealth_report",
    "filter_compensation",
    "poisson_two_sample_test",
    "ExperimentConfig",
    "load_config",
    "config_digest",
    "run_selftest",
]
