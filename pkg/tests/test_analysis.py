#!/usr/bin/env python3
"""
Unit tests for the stealth analysis
"""

import math
import unittest

from gammanano.analysis import (
    StealthReport,
    compensated_absorber,
    filter_compensation,
    observed_mean,
    poisson_two_sample_test,
    stealth_report,
)
from gammanano.codec import TimingConfig, add_framing, bits_to_pulse_train, text_to_bits
from gammanano.montecarlo import StreamParams, build_tables, run_macro
from gammanano.physics import AbsorberParams, PhaseProfile, QuadratureSpec, baseline_nb

QUAD = QuadratureSpec()
ABSORBER = AbsorberParams()
T1_NS = 141.0


class TestReportArithmetic(unittest.TestCase):
    """Test the filter that equalizes totals"""

    def test_reference_increase(self):
        """Test transmission 1/1.092 and the equivalent depth"""
        report = StealthReport.from_rates(1.092, 1.0, 14)
        self.assertAlmostEqual(report.relative_increase, 0.092)
        self.assertAlmostEqual(filter_compensation(report), 0.9158, places=4)
        self.assertAlmostEqual(report.compensating_depth, 0.0880, places=4)
        self.assertAlmostEqual(report.per_pulse_contribution, 0.092 / 14)

    def test_no_pulses(self):
        """Test that a message without pulses needs no filter"""
        report = StealthReport.from_rates(0.3, 0.3, 0)
        self.assertEqual(report.filter_transmission, 1.0)
        self.assertEqual(report.per_pulse_contribution, 0.0)
        self.assertEqual(report.compensating_depth, 0.0)

    def test_reference_values_are_carried(self):
        """Test that measured reference counts travel with the report"""
        report = StealthReport.from_rates(1.0, 1.0, 0)
        self.assertEqual((report.reference_counts_with, report.reference_counts_without), (391, 358))

    def test_compensated_absorber(self):
        """Test that the filter adds to the nonresonant depth"""
        report = StealthReport.from_rates(1.092, 1.0, 14)
        absorber = compensated_absorber(ABSORBER, report)
        self.assertAlmostEqual(absorber.nonresonant_depth, 0.3 + report.compensating_depth)
        self.assertEqual(absorber.optical_thickness, ABSORBER.optical_thickness)


class TestStealthReport(unittest.TestCase):
    """Test period-averaged rates with and without a message"""

    @classmethod
    def setUpClass(cls):
        cls.cfg = TimingConfig()
        cls.report = stealth_report("Nature", cls.cfg, ABSORBER, QUAD, T1_NS)

    def test_message_raises_transmission(self):
        """Test that the message increases the mean count rate"""
        self.assertGreater(self.report.relative_increase, 0.0)
        self.assertEqual(self.report.pulse_count, 14)
        self.assertLess(self.report.filter_transmission, 1.0)

    def test_baseline_without_message(self):
        """Test the unmodulated mean (0.2 + 0.8 n_B) exp(-0.3)"""
        expected = (0.2 + 0.8 * baseline_nb(5.0)) * math.exp(-0.3)
        self.assertAlmostEqual(self.report.mean_rate_without, expected, delta=1e-4)

    def test_closure(self):
        """Test that the filtered message mean equals the unmodulated mean"""
        r = self.report
        self.assertAlmostEqual(r.mean_rate_with_message * filter_compensation(r), r.mean_rate_without, places=6)

    def test_empty_message(self):
        """Test zero increase and unit transmission for no bits"""
        report = stealth_report("", TimingConfig(bit_count=0), ABSORBER, QUAD, T1_NS)
        self.assertEqual(report.relative_increase, 0.0)
        self.assertEqual(filter_compensation(report), 1.0)

    def test_per_pulse_scaling(self):
        """Test that a single pulse contributes like an average reference pulse"""
        single = stealth_report(b"\x01", TimingConfig(bit_count=8), ABSORBER, QUAD, T1_NS)
        self.assertEqual(single.pulse_count, 1)
        ratio = single.per_pulse_contribution / self.report.per_pulse_contribution
        self.assertAlmostEqual(ratio, 1.0, delta=0.2)

    def test_monotone_in_pulses(self):
        """Test that separated pulses add transparency"""
        cfg = TimingConfig(bit_count=24)
        increases = [stealth_report(msg, cfg, ABSORBER, QUAD, T1_NS).relative_increase
                     for msg in (b"\x80\x00\x00", b"\x80\x80\x00", b"\x80\x80\x80")]
        self.assertTrue(increases[0] < increases[1] < increases[2])

    def test_framing_pulses_count(self):
        """Test that marker pulses add to the transmitted pulse count"""
        report = stealth_report("Nature", TimingConfig(framing="code-signal"), ABSORBER, QUAD, T1_NS)
        self.assertEqual(report.pulse_count, 17)
        self.assertGreater(report.relative_increase, self.report.relative_increase)


class TestPoissonTest(unittest.TestCase):
    """Test the two-sample count comparison"""

    def test_reference_counts(self):
        """Test that 391 against 358 is not significant"""
        self.assertGreater(poisson_two_sample_test(391, 358), 0.05)

    def test_equal_counts(self):
        """Test p = 1 for identical counts"""
        self.assertAlmostEqual(poisson_two_sample_test(500, 500), 1.0)
        self.assertEqual(poisson_two_sample_test(0, 0), 1.0)

    def test_significant(self):
        """Test that doubled counts are detected"""
        self.assertLess(poisson_two_sample_test(2000, 1000), 1e-6)

    def test_exposure(self):
        """Test that unequal exposures are taken into account"""
        self.assertGreater(poisson_two_sample_test(2000, 1000, exposure_a=2.0, exposure_b=1.0), 0.05)


class TestCompensatedStream(unittest.TestCase):
    """Test that the filter hides the message in total counts"""

    @classmethod
    def setUpClass(cls):
        cfg = TimingConfig()
        train = add_framing(bits_to_pulse_train(text_to_bits("Nature"), cfg), cfg)
        profile = PhaseProfile.from_pulse_train(train, T1_NS)
        cls.report = stealth_report("Nature", cfg, ABSORBER, QUAD, T1_NS)
        cls.filtered = build_tables(profile, compensated_absorber(ABSORBER, cls.report), QUAD, "macro", T1_NS)
        cls.plain = build_tables(PhaseProfile.constant(profile.period), ABSORBER, QUAD, "macro", T1_NS)
        cls.message = build_tables(profile, ABSORBER, QUAD, "macro", T1_NS)

    def test_table_means(self):
        """Test that the filtered table mean matches the unmodulated mean"""
        self.assertAlmostEqual(self.filtered.mean_detection_fraction(), self.plain.mean_detection_fraction(),
                               delta=1e-4)
        self.assertAlmostEqual(self.plain.mean_detection_fraction(), observed_mean(
            PhaseProfile.constant(20000.0 / T1_NS), ABSORBER, QUAD), delta=1e-4)

    def test_totals_indistinguishable(self):
        """Test equal totals with filter and message against no message"""
        params = StreamParams(mean_rate_hz=5e5, duration_s=5.0, seed=41)
        with_filter = run_macro(params, self.filtered).size
        without = run_macro(params.model_copy(update={"seed": 42}), self.plain).size
        self.assertGreater(poisson_two_sample_test(with_filter, without), 0.01)

    def test_unfiltered_totals_differ(self):
        """Test that without the filter the message shows in total counts"""
        params = StreamParams(mean_rate_hz=5e5, duration_s=5.0, seed=43)
        with_message = run_macro(params, self.message).size
        without = run_macro(params.model_copy(update={"seed": 44}), self.plain).size
        self.assertLess(poisson_two_sample_test(with_message, without), 1e-6)


if __name__ == '__main__':
    unittest.main()
