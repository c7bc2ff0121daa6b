#!/usr/bin/env python3
"""
Unit tests for the message codec
"""

import unittest

import numpy as np
from pydantic import ValidationError

from gammanano.codec import (
    BitSequence,
    PulseTrain,
    TimingConfig,
    add_framing,
    bits_to_pulse_train,
    bits_to_text,
    edges_to_bits,
    realign_cyclic,
    text_to_bits,
)
from gammanano.errors import CodecError, FramingError

TAU = 347.0
NATURE_BITS = "01001110 01100001 01110100 01110101 01110010 01100101"


class TestBits(unittest.TestCase):
    """Test text <-> bits"""

    def test_single_byte(self):
        """Test MSB-first encoding of one character"""
        self.assertEqual(str(text_to_bits("N")), "01001110")

    def test_nature(self):
        """Test the 48-bit pattern of the reference message"""
        bits = text_to_bits("Nature")
        self.assertEqual(len(bits), 48)
        self.assertEqual(str(bits), NATURE_BITS)
        self.assertEqual(bits_to_text(bits), b"Nature")

    def test_extended_ascii(self):
        """Test that all 256 byte values survive"""
        data = bytes(range(256))
        self.assertEqual(bits_to_text(text_to_bits(data)), data)
        self.assertEqual(bits_to_text(text_to_bits("é")), "é".encode("latin-1"))

    def test_empty(self):
        """Test the empty message"""
        self.assertEqual(len(text_to_bits("")), 0)
        self.assertEqual(bits_to_text(BitSequence()), b"")

    def test_partial_byte(self):
        """Test that a bit count not divisible by 8 is rejected"""
        with self.assertRaises(CodecError):
            bits_to_text(BitSequence.from_string("0100111"))

    def test_non_binary(self):
        """Test that only 0 and 1 are bits"""
        with self.assertRaises(CodecError):
            BitSequence((0, 1, 2))


class TestTimingConfig(unittest.TestCase):
    """Test message timing validation"""

    def test_message_must_fit_period(self):
        """Test that 64 bins of 347 ns do not fit 20 us"""
        with self.assertRaises(ValidationError):
            TimingConfig(bit_count=64)

    def test_message_must_end_inside_period(self):
        """Test that a message filling the whole period is rejected"""
        with self.assertRaises(ValidationError):
            TimingConfig(bit_count=48, period_ns=48 * TAU)
        self.assertEqual(TimingConfig(bit_count=48, period_ns=49 * TAU).bit_count, 48)

    def test_framed_bit_count(self):
        """Test that STX/ETX adds two bytes on the wire"""
        self.assertEqual(TimingConfig(framing="stx-etx").framed_bit_count, 64)
        self.assertEqual(TimingConfig(framing="code-signal").framed_bit_count, 48)

    def test_payload_origin(self):
        """Test that code-signal framing moves the payload two bins in"""
        self.assertEqual(TimingConfig(framing="code-signal").payload_origin_ns, 2 * TAU)
        self.assertEqual(TimingConfig().payload_origin_ns, 0.0)


class TestPulseTrain(unittest.TestCase):
    """Test bits -> pulses"""

    def setUp(self):
        self.cfg = TimingConfig()
        self.train = bits_to_pulse_train(text_to_bits("Nature"), self.cfg)

    def test_nature_counts(self):
        """Test 14 pulses and 28 edges for the reference message"""
        self.assertEqual(self.train.pulse_count, 14)
        self.assertEqual(self.train.edge_count, 28)

    def test_edges_on_bin_boundaries(self):
        """Test first pulse and the rising/falling alternation"""
        self.assertEqual(self.train.edges[0].time_ns, TAU)
        self.assertTrue(self.train.edges[0].rising)
        self.assertEqual(self.train.edges[1].time_ns, 2 * TAU)
        self.assertFalse(self.train.edges[1].rising)
        self.assertTrue(np.allclose(np.mod(self.train.times(), TAU), 0.0))

    def test_merged_runs(self):
        """Test that adjacent ones merge into one pulse"""
        cfg = TimingConfig(bit_count=8)
        train = bits_to_pulse_train(BitSequence.from_string("01110000"), cfg)
        self.assertEqual(train.pulses(), [(TAU, 4 * TAU)])

    def test_final_bin(self):
        """Test a run reaching the last bin ends at N tau"""
        cfg = TimingConfig(bit_count=8)
        train = bits_to_pulse_train(BitSequence.from_string("00000011"), cfg)
        self.assertEqual(train.pulses(), [(6 * TAU, 8 * TAU)])

    def test_length_mismatch(self):
        """Test that the bit count must match the timing"""
        with self.assertRaises(CodecError):
            bits_to_pulse_train(text_to_bits("Na"), self.cfg)

    def test_empty_message(self):
        """Test zero pulses for zero bits"""
        train = bits_to_pulse_train(BitSequence(), TimingConfig(bit_count=0))
        self.assertEqual(train.pulse_count, 0)

    def test_invalid_trains(self):
        """Test odd edge counts and unsorted edges"""
        with self.assertRaises(CodecError):
            PulseTrain.from_times([1.0, 2.0, 3.0], 100.0)
        with self.assertRaises(CodecError):
            PulseTrain.from_times([1.0, 1.0], 100.0)
        with self.assertRaises(CodecError):
            PulseTrain.from_times([1.0, 200.0], 100.0)


class TestRoundTrip(unittest.TestCase):
    """Test pulses -> bits"""

    def setUp(self):
        self.cfg = TimingConfig()

    def test_nature(self):
        """Test the reference message through the full codec"""
        train = bits_to_pulse_train(text_to_bits("Nature"), self.cfg)
        self.assertEqual(bits_to_text(edges_to_bits(train, self.cfg)), b"Nature")

    def test_random_messages(self):
        """Test random 6-byte messages"""
        rng = np.random.default_rng(7)
        for _ in range(100):
            data = rng.integers(0, 256, 6, dtype=np.uint8).tobytes()
            train = bits_to_pulse_train(text_to_bits(data), self.cfg)
            self.assertEqual(bits_to_text(edges_to_bits(train, self.cfg)), data)

    def test_jitter_tolerance(self):
        """Test that edges within 0.2 bins still decode"""
        times = bits_to_pulse_train(text_to_bits("Nature"), self.cfg).times()
        jitter = np.random.default_rng(3).uniform(-0.2, 0.2, times.size) * TAU
        self.assertEqual(bits_to_text(edges_to_bits(times + jitter, self.cfg)), b"Nature")

    def test_unpaired_edge(self):
        """Test that an odd number of edges is rejected"""
        with self.assertRaises(CodecError):
            edges_to_bits([TAU, 2 * TAU, 3 * TAU], self.cfg)

    def test_edge_outside_window(self):
        """Test that edges past the payload are rejected"""
        with self.assertRaises(CodecError):
            edges_to_bits([TAU, 60 * TAU], self.cfg)

    def test_collapsed_pulse(self):
        """Test that two edges rounding to one boundary are rejected"""
        with self.assertRaises(CodecError):
            edges_to_bits([1.9 * TAU, 2.1 * TAU], self.cfg)

    def test_tolerance(self):
        """Test a tighter tolerance rejects off-boundary edges"""
        with self.assertRaises(CodecError):
            edges_to_bits([1.3 * TAU, 3.0 * TAU], self.cfg, tolerance=0.25)


class TestCodeSignalFraming(unittest.TestCase):
    """Test marker framing and cyclic realignment"""

    def setUp(self):
        self.cfg = TimingConfig(framing="code-signal")
        self.payload = bits_to_pulse_train(text_to_bits("Nature"), self.cfg)
        self.framed = add_framing(self.payload, self.cfg)

    def test_markers(self):
        """Test one start and two end marker pulses"""
        markers = self.framed.marker_edges()
        self.assertEqual(len(markers), 6)
        self.assertAlmostEqual(markers[0].time_ns, 0.25 * TAU)
        self.assertAlmostEqual(markers[1].time_ns, 0.75 * TAU)
        self.assertAlmostEqual(markers[2].time_ns, (51 + 0.25) * TAU)
        self.assertEqual(self.framed.pulse_count, 17)

    def test_payload_shift(self):
        """Test that payload edges start two bins in"""
        np.testing.assert_allclose([e.time_ns for e in self.framed.payload_edges()],
                                   self.payload.times() + 2 * TAU)

    def test_framed_round_trip(self):
        """Test that a framed train decodes from its own payload"""
        self.assertEqual(bits_to_text(edges_to_bits(self.framed, self.cfg)), b"Nature")

    def test_every_rotation(self):
        """Test realignment for every cyclic shift of the edges"""
        period = self.cfg.period_ns
        for offset in np.linspace(0.0, period, 97)[:-1]:
            realigned = realign_cyclic(self.framed.rotated_times(offset), self.cfg)
            self.assertEqual(bits_to_text(edges_to_bits(realigned, self.cfg)), b"Nature", f"offset {offset}")

    def test_missing_marker(self):
        """Test that an unframed train has no start marker"""
        with self.assertRaises(FramingError):
            realign_cyclic(self.payload.times(), self.cfg)

    def test_ambiguous_marker(self):
        """Test that a second isolated short pulse is ambiguous"""
        times = np.concatenate([self.framed.times(), [54.25 * TAU, 54.75 * TAU]])
        with self.assertRaises(FramingError):
            realign_cyclic(times, self.cfg)

    def test_framing_overflow(self):
        """Test that a frame longer than the period is rejected"""
        cfg = TimingConfig(framing="code-signal", period_ns=50 * TAU)
        train = bits_to_pulse_train(text_to_bits("Nature"), cfg)
        with self.assertRaises(FramingError):
            add_framing(train, cfg)

    def test_marker_on_boundary(self):
        """Test that marker edges must not coincide with bin boundaries"""
        cfg = TimingConfig(framing="code-signal", code_signal_fraction=0.75)
        with self.assertRaises(FramingError):
            add_framing(bits_to_pulse_train(text_to_bits("Nature"), cfg), cfg)

    def test_realign_needs_code_signal(self):
        """Test that realignment refuses other framings"""
        with self.assertRaises(FramingError):
            realign_cyclic(self.framed.times(), TimingConfig())


class TestStxEtxFraming(unittest.TestCase):
    """Test control-byte framing"""

    def test_round_trip(self):
        """Test STX + message + ETX with a period long enough for 64 bins"""
        cfg = TimingConfig(framing="stx-etx", period_ns=25000.0)
        framed = add_framing(bits_to_pulse_train(text_to_bits("Nature"), cfg), cfg)
        bits = edges_to_bits(framed, cfg)
        self.assertEqual(len(bits), 64)
        self.assertEqual(str(bits)[:8], "00000010")
        self.assertEqual(bits_to_text(bits, "stx-etx"), b"Nature")

    def test_overflow(self):
        """Test that 64 bins do not fit the default period"""
        cfg = TimingConfig(framing="stx-etx")
        with self.assertRaises(FramingError):
            add_framing(bits_to_pulse_train(text_to_bits("Nature"), cfg), cfg)

    def test_frame_filling_period(self):
        """Test that ETX may not close exactly on the period end"""
        cfg = TimingConfig(framing="stx-etx", period_ns=64 * TAU)
        with self.assertRaises(FramingError):
            add_framing(bits_to_pulse_train(text_to_bits("Nature"), cfg), cfg)

    def test_missing_control_byte(self):
        """Test that a frame without STX is rejected"""
        with self.assertRaises(FramingError):
            bits_to_text(text_to_bits("Nature"), "stx-etx")


if __name__ == '__main__':
    unittest.main()
