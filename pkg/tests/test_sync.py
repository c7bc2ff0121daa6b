#!/usr/bin/env python3
"""
Unit tests for TAC accumulation, peak detection and decoding
"""

import math
import unittest

import numpy as np
from pydantic import ValidationError

from gammanano.codec import TimingConfig, add_framing, bits_to_pulse_train, text_to_bits
from gammanano.config import MISMATCH_OFFSET_HZ
from gammanano.errors import DecodeError, InsufficientStatisticsError
from gammanano.montecarlo import StreamParams, build_tables, run_macro
from gammanano.physics import AbsorberParams, PhaseProfile, QuadratureSpec
from gammanano.sync import (
    Histogram,
    PeakPolicy,
    TacConfig,
    accumulate,
    decode_histogram,
    detect_peaks,
    flatness_metric,
)

TAU = 347.0
T1_NS = 141.0
WIDTH = 20000.0 / 1024


def synthetic_histogram(edge_times, baseline=1000, excess=(3000, 2000, 1000), offset_ns=0.0, seed=0):
    """Flat Poisson counts with a decaying excess starting in the channel of each edge."""
    rng = np.random.default_rng(seed)
    counts = rng.poisson(baseline, 1024)
    for t in np.mod(np.asarray(edge_times) - offset_ns, 20000.0):
        first = int(t // WIDTH)
        for i, extra in enumerate(excess):
            counts[(first + i) % 1024] += extra
    return Histogram(counts=counts, channel_width_ns=WIDTH)


class TestTacConfig(unittest.TestCase):
    """Test TAC settings"""

    def test_channel_width(self):
        """Test 1024 channels over one 20 us period"""
        self.assertAlmostEqual(TacConfig().channel_width_ns, WIDTH)

    def test_effective_period(self):
        """Test that a positive offset shortens the start spacing"""
        tac = TacConfig(frequency_offset_hz=1000.0)
        self.assertAlmostEqual(tac.effective_period_ns, 1e9 / 51000.0)

    def test_non_positive_start_rate(self):
        """Test that the start rate must stay positive"""
        with self.assertRaises(ValidationError):
            TacConfig(frequency_offset_hz=-5e4)


class TestAccumulate(unittest.TestCase):
    """Test folding records onto the start signal"""

    def test_records_at_starts(self):
        """Test that records coinciding with starts land in channel 0"""
        h = accumulate(np.arange(10) * 20000.0, TacConfig())
        self.assertEqual(h.counts[0], 10)
        self.assertEqual(h.total_counts, 10)
        self.assertEqual(h.total_starts, 10)

    def test_pure_fold(self):
        """Test that histograms of disjoint record sets add up"""
        rng = np.random.default_rng(0)
        a, b = rng.uniform(0, 1e7, 5000), rng.uniform(1e7, 2e7, 5000)
        tac = TacConfig()
        np.testing.assert_array_equal(accumulate(np.concatenate([a, b]), tac).counts,
                                      (accumulate(a, tac) + accumulate(b, tac)).counts)

    def test_start_phase(self):
        """Test that records before the first start are dropped"""
        tac = TacConfig(start_phase_ns=5000.0)
        h = accumulate([1000.0, 5000.0, 5100.0], tac)
        self.assertEqual(h.total_counts, 2)
        self.assertEqual(h.counts[int(100.0 // WIDTH)], 1)

    def test_wrap_for_slow_starts(self):
        """Test that delays past the histogram span wrap around it"""
        tac = TacConfig(frequency_offset_hz=-1000.0)
        h = accumulate([20300.0], tac)
        self.assertEqual(h.counts[int(20300.0 // WIDTH) % 1024], 1)

    def test_start_count_from_duration(self):
        """Test total starts over a known acquisition"""
        h = accumulate([], TacConfig(), duration_ns=1e9)
        self.assertEqual(h.total_starts, 50001)
        self.assertEqual(h.total_counts, 0)


class TestFlatness(unittest.TestCase):
    """Test histogram flatness statistics"""

    def test_perfectly_flat(self):
        """Test zero deviation for identical counts"""
        report = flatness_metric(Histogram(np.full(1024, 500), WIDTH))
        self.assertEqual(report.max_deviation, 0.0)
        self.assertEqual(report.p_value, 1.0)

    def test_poisson_uniform(self):
        """Test that uniform Poisson counts look flat"""
        counts = np.random.default_rng(1).multinomial(10 ** 6, np.full(1024, 1 / 1024))
        report = flatness_metric(Histogram(counts, WIDTH))
        self.assertLess(report.max_deviation, 5.0)
        self.assertGreater(report.p_value, 1e-3)

    def test_structured(self):
        """Test that a message imprint is far from flat"""
        report = flatness_metric(synthetic_histogram([TAU, 2 * TAU]))
        self.assertGreater(report.max_deviation, 50.0)
        self.assertLess(report.log10_p, -100.0)

    def test_empty(self):
        """Test that an empty histogram has no statistics"""
        with self.assertRaises(InsufficientStatisticsError):
            flatness_metric(Histogram(np.zeros(1024), WIDTH))


class TestPeaks(unittest.TestCase):
    """Test threshold peak detection"""

    def test_flat_has_no_peaks(self):
        """Test no peaks in flat counts"""
        self.assertEqual(detect_peaks(Histogram(np.full(1024, 1000), WIDTH)).size, 0)

    def test_centroid(self):
        """Test the count-weighted centroid of one peak"""
        counts = np.full(1024, 1000)
        counts[100:102] += [3000, 1000]
        peaks = detect_peaks(Histogram(counts, WIDTH))
        self.assertEqual(peaks.size, 1)
        expected = (100.5 * 4000 + 101.5 * 2000) / 6000 * WIDTH
        self.assertAlmostEqual(peaks[0], expected)

    def test_wrapping_peak(self):
        """Test that a peak across the last and first channel is one peak"""
        counts = np.full(1024, 1000)
        counts[[1023, 0]] += 3000
        peaks = detect_peaks(Histogram(counts, WIDTH))
        self.assertEqual(peaks.size, 1)
        self.assertAlmostEqual(peaks[0], 0.0, delta=1e-6)

    def test_peaks_are_sorted(self):
        """Test one sorted centroid per edge"""
        edges = [TAU, 2 * TAU, 4 * TAU, 7 * TAU]
        peaks = detect_peaks(synthetic_histogram(edges))
        self.assertEqual(peaks.size, 4)
        self.assertTrue(np.all(np.diff(peaks) > 0))
        self.assertTrue(np.all(np.abs(peaks - edges) < 0.5 * TAU))

    def test_minimum_counts(self):
        """Test that too few counts is insufficient statistics"""
        with self.assertRaises(InsufficientStatisticsError):
            detect_peaks(Histogram(np.full(1024, 0), WIDTH))
        self.assertEqual(detect_peaks(Histogram(np.full(1024, 1), WIDTH), PeakPolicy(min_total_counts=10)).size, 0)

    def test_min_peak_channels(self):
        """Test that single-channel spikes can be ignored"""
        counts = np.full(1024, 1000)
        counts[500] += 5000
        self.assertEqual(detect_peaks(Histogram(counts, WIDTH), PeakPolicy(min_peak_channels=2)).size, 0)


class TestDecodeHistogram(unittest.TestCase):
    """Test histogram -> message"""

    def setUp(self):
        self.cfg = TimingConfig()
        self.edges = bits_to_pulse_train(text_to_bits("Nature"), self.cfg).times()

    def test_aligned(self):
        """Test decoding with the writer and reader clocks aligned"""
        self.assertEqual(decode_histogram(synthetic_histogram(self.edges), self.cfg), b"Nature")

    def test_code_signal_with_offset(self):
        """Test decoding a framed message under an unknown start phase"""
        cfg = TimingConfig(framing="code-signal")
        framed = add_framing(bits_to_pulse_train(text_to_bits("Nature"), cfg), cfg)
        for offset in (0.0, 5000.0, 13333.0):
            h = synthetic_histogram(framed.times(), offset_ns=offset)
            self.assertEqual(decode_histogram(h, cfg), b"Nature", f"offset {offset}")

    def test_flat_histogram(self):
        """Test that flat counts fail at peak detection"""
        with self.assertRaises(DecodeError) as ctx:
            decode_histogram(Histogram(np.full(1024, 1000), WIDTH), self.cfg)
        self.assertEqual(ctx.exception.stage, "detect")

    def test_unframed_offset_fails(self):
        """Test that a shifted unframed message does not decode to the original"""
        h = synthetic_histogram(self.edges, offset_ns=5000.0)
        try:
            text = decode_histogram(h, self.cfg)
        except DecodeError as e:
            self.assertIn(e.stage, ("bits", "text"))
        else:
            self.assertNotEqual(text, b"Nature")

    def test_missing_frame(self):
        """Test that an unframed imprint fails at the frame stage"""
        h = synthetic_histogram(self.edges)
        with self.assertRaises(DecodeError) as ctx:
            decode_histogram(h, TimingConfig(framing="code-signal"))
        self.assertEqual(ctx.exception.stage, "frame")

    def test_empty_message(self):
        """Test that zero bits decode to empty text"""
        cfg = TimingConfig(bit_count=0)
        self.assertEqual(decode_histogram(Histogram(np.full(1024, 1000), WIDTH), cfg), b"")


class TestEndToEnd(unittest.TestCase):
    """Test simulated streams through the TAC"""

    @classmethod
    def setUpClass(cls):
        cls.cfg = TimingConfig()
        cls.train = bits_to_pulse_train(text_to_bits("Nature"), cls.cfg)
        profile = PhaseProfile.from_pulse_train(cls.train, T1_NS)
        cls.tables = build_tables(profile, AbsorberParams(), QuadratureSpec(), "macro", T1_NS)

        cls.framed_cfg = TimingConfig(framing="code-signal")
        framed = add_framing(bits_to_pulse_train(text_to_bits("Nature"), cls.framed_cfg), cls.framed_cfg)
        cls.framed_tables = build_tables(PhaseProfile.from_pulse_train(framed, T1_NS), AbsorberParams(),
                                         QuadratureSpec(), "macro", T1_NS)

        params = StreamParams(mean_rate_hz=3e5, duration_s=4.0, seed=31)
        cls.synced = accumulate(run_macro(params, cls.tables), TacConfig(), params.duration_ns)

    def test_synchronized(self):
        """Test 28 peaks and the message with delta = 0"""
        self.assertEqual(detect_peaks(self.synced).size, 28)
        self.assertEqual(decode_histogram(self.synced, self.cfg, TacConfig()), b"Nature")

    def test_peaks_on_edges(self):
        """Test that every simulated peak lies within a quarter bin of a true edge"""
        edges = self.train.times()
        for peak in detect_peaks(self.synced):
            gap = np.abs(np.mod(peak - edges + 10000.0, 20000.0) - 10000.0).min()
            self.assertLess(gap, 0.25 * TAU, f"peak at {peak:.1f} ns")

    def test_synchronized_not_flat(self):
        """Test that the synchronized histogram is far from uniform"""
        self.assertLess(flatness_metric(self.synced).log10_p, -300)

    def test_framed_with_start_offset(self):
        """Test that a framed message survives a constant receiver start phase"""
        params = StreamParams(mean_rate_hz=3e5, duration_s=4.0, seed=34)
        records = run_macro(params, self.framed_tables)
        tac = TacConfig(start_phase_ns=5000.0)
        h = accumulate(records, tac, params.duration_ns)
        self.assertEqual(decode_histogram(h, self.framed_cfg, tac), b"Nature")

    def test_mismatch_washes_out(self):
        """Test that two full sweeps of clock offset leave a flat histogram"""
        params = StreamParams(mean_rate_hz=3e5, duration_s=4.0, seed=32)
        tac = TacConfig(frequency_offset_hz=2.0 / params.duration_s)
        h = accumulate(run_macro(params, self.tables), tac, params.duration_ns)
        self.assertLess(flatness_metric(h).max_deviation, 5.0)
        with self.assertRaises(DecodeError):
            decode_histogram(h, self.cfg, tac)

    def test_small_mismatch_long_run(self):
        """Test that 0.01 Hz over 200 s erases the message"""
        # two full sweeps of the start phase
        params = StreamParams(mean_rate_hz=2e4, duration_s=2.0 / MISMATCH_OFFSET_HZ, seed=33, chunk_s=10.0)
        tac = TacConfig(frequency_offset_hz=MISMATCH_OFFSET_HZ)
        h = accumulate(run_macro(params, self.tables), tac, params.duration_ns)
        self.assertEqual(detect_peaks(h).size, 0)
        self.assertLess(flatness_metric(h).max_deviation, 5.0)


if __name__ == '__main__':
    unittest.main()
