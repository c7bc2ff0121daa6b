#!/usr/bin/env python3
"""
Message codec: text <-> bits <-> rectangular voltage pulse trains.

Each bit occupies one time bin of width tau. Voltage is high during every bin holding a 1;
runs of ones merge into a single pulse, and the absorber sees one phase jump per pulse edge.
"""

import math
from dataclasses import dataclass
from typing import Iterable, List, Literal, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .config import (
    DEFAULT_BIN_WIDTH_NS, DEFAULT_PERIOD_NS, DEFAULT_FRAMING, DEFAULT_CODE_SIGNAL_FRACTION,
    STX, ETX,
)
from .errors import CodecError, FramingError

Framing = Literal["none", "code-signal", "stx-etx"]

# start marker begins this far into its bin
_MARKER_OFFSET = 0.25
_ON_BOUNDARY = 1e-9


class TimingConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    bin_width_ns: float = Field(DEFAULT_BIN_WIDTH_NS, gt=0)
    bit_count: int = Field(48, ge=0)
    period_ns: float = Field(DEFAULT_PERIOD_NS, gt=0)
    framing: Framing = DEFAULT_FRAMING
    code_signal_fraction: float = Field(DEFAULT_CODE_SIGNAL_FRACTION, gt=0, lt=1)

    @model_validator(mode="after")
    def _message_fits(self):
        # a closing edge at the period end would wrap onto t = 0
        if self.bit_count and self.bit_count * self.bin_width_ns >= self.period_ns:
            raise ValueError(
                f"message of {self.bit_count} bits x {self.bin_width_ns} ns does not fit "
                f"period {self.period_ns} ns")
        return self

    @property
    def info_length_ns(self) -> float:
        return self.bit_count * self.bin_width_ns

    @property
    def framed_bit_count(self) -> int:
        """Bits on the wire: payload plus STX/ETX bytes when that framing is used."""
        return self.bit_count + 16 if self.framing == "stx-etx" else self.bit_count

    @property
    def payload_origin_ns(self) -> float:
        return 2 * self.bin_width_ns if self.framing == "code-signal" else 0.0

    @property
    def frame_span_ns(self) -> float:
        if self.framing == "code-signal":
            tail = math.ceil(_MARKER_OFFSET + 3 * self.code_signal_fraction)
            return (self.bit_count + 3 + tail) * self.bin_width_ns
        return self.framed_bit_count * self.bin_width_ns

    @property
    def marker_gap_threshold_ns(self) -> float:
        """Cyclic gaps shorter than this belong to code-signal markers."""
        return 0.5 * (1.0 + self.code_signal_fraction) * self.bin_width_ns


@dataclass(frozen=True)
class BitSequence:
    """Bits, MSB-first per byte."""

    bits: Tuple[int, ...] = ()

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise CodecError("bits must be 0 or 1")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_string(cls, text: str) -> "BitSequence":
        return cls(tuple(int(ch) for ch in text if ch in "01"))

    def __len__(self):
        return len(self.bits)

    def __iter__(self):
        return iter(self.bits)

    def __getitem__(self, item):
        return self.bits[item]

    def __add__(self, other: "BitSequence") -> "BitSequence":
        return BitSequence(self.bits + tuple(other))

    def __str__(self):
        flat = "".join(str(b) for b in self.bits)
        return " ".join(flat[i:i + 8] for i in range(0, len(flat), 8))


class Edge(NamedTuple):
    time_ns: float
    rising: bool
    marker: bool = False


@dataclass(frozen=True)
class PulseTrain:
    """Alternating rising/falling edges of the voltage within one period.

    `origin_ns` is where payload bin 0 starts; `framing` records which framing was applied.
    """

    edges: Tuple[Edge, ...]
    period_ns: float
    origin_ns: float = 0.0
    framing: Framing = "none"

    def __post_init__(self):
        edges = tuple(Edge(*e) for e in self.edges)
        if len(edges) % 2:
            raise CodecError("unpaired edge")
        times = [e.time_ns for e in edges]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise CodecError("edges must be strictly increasing")
        if any(e.rising != (i % 2 == 0) for i, e in enumerate(edges)):
            raise CodecError("edge polarity must alternate starting with a rising edge")
        if edges and (times[0] < 0 or times[-1] > self.period_ns):
            raise CodecError(f"edges must lie within [0, {self.period_ns}] ns")
        object.__setattr__(self, "edges", edges)

    @classmethod
    def from_times(cls, times: Iterable[float], period_ns: float, **kwargs) -> "PulseTrain":
        """Untagged times; the first is taken as rising (voltage starts low)."""
        edges = tuple(Edge(float(t), i % 2 == 0) for i, t in enumerate(sorted(times)))
        return cls(edges=edges, period_ns=period_ns, **kwargs)

    def times(self) -> np.ndarray:
        return np.array([e.time_ns for e in self.edges], dtype=float)

    def pulses(self) -> List[Tuple[float, float]]:
        return [(self.edges[i].time_ns, self.edges[i + 1].time_ns) for i in range(0, len(self.edges), 2)]

    def payload_edges(self) -> Tuple[Edge, ...]:
        return tuple(e for e in self.edges if not e.marker)

    def marker_edges(self) -> Tuple[Edge, ...]:
        return tuple(e for e in self.edges if e.marker)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def pulse_count(self) -> int:
        return len(self.edges) // 2

    def rotated_times(self, offset_ns: float) -> np.ndarray:
        """Edge times as seen by a receiver whose clock is shifted by offset_ns."""
        return np.sort(np.mod(self.times() + offset_ns, self.period_ns))


# =============================================================================
# TEXT <-> BITS
# =============================================================================

def _as_bytes(text: Union[bytes, str]) -> bytes:
    # extended ASCII: code points 0-255 map to single bytes
    return text.encode("latin-1") if isinstance(text, str) else bytes(text)


def text_to_bits(text: Union[bytes, str]) -> BitSequence:
    data = np.frombuffer(_as_bytes(text), dtype=np.uint8)
    return BitSequence(tuple(np.unpackbits(data).tolist()))


def bits_to_text(bits: BitSequence, framing: Framing = "none") -> bytes:
    """Reassemble bytes MSB-first; with stx-etx framing, check and strip STX/ETX."""
    if len(bits) % 8:
        raise CodecError(f"bit count {len(bits)} is not a multiple of 8")
    data = np.packbits(np.array(bits.bits, dtype=np.uint8)).tobytes() if len(bits) else b""
    if framing == "stx-etx":
        if len(data) < 2 or data[0] != STX or data[-1] != ETX:
            raise FramingError("frame marker missing: STX/ETX not found")
        data = data[1:-1]
    return data


# =============================================================================
# BITS <-> PULSES
# =============================================================================

def _run_edges(bits: Sequence[int], bin_width_ns: float, origin_ns: float) -> List[Edge]:
    padded = np.concatenate([[0], np.asarray(bits, dtype=np.int8), [0]])
    changes = np.flatnonzero(np.diff(padded))
    return [Edge(origin_ns + k * bin_width_ns, i % 2 == 0) for i, k in enumerate(changes)]


def bits_to_pulse_train(bits: BitSequence, cfg: TimingConfig) -> PulseTrain:
    """One pulse per maximal run of ones, edges on bin boundaries."""
    if len(bits) != cfg.bit_count:
        raise CodecError(f"expected {cfg.bit_count} bits, got {len(bits)}")
    return PulseTrain(edges=tuple(_run_edges(bits.bits, cfg.bin_width_ns, 0.0)),
                      period_ns=cfg.period_ns)


def _check_on_boundaries(train: PulseTrain, cfg: TimingConfig) -> None:
    for e in train.payload_edges():
        k = (e.time_ns - train.origin_ns) / cfg.bin_width_ns
        if abs(k - round(k)) > _ON_BOUNDARY:
            raise FramingError(f"edge at {e.time_ns} ns is not on a bin boundary")


def add_framing(train: PulseTrain, cfg: TimingConfig) -> PulseTrain:
    """Attach the frame selected by cfg.framing to an unframed payload train."""
    if cfg.framing == "none":
        return train
    if train.framing != "none":
        raise FramingError(f"train is already framed ({train.framing})")
    _check_on_boundaries(train, cfg)
    # code-signal frames end in idle bins, STX/ETX ends on a 1 bit
    span = cfg.frame_span_ns
    if span > cfg.period_ns or (cfg.framing == "stx-etx" and span == cfg.period_ns):
        raise FramingError(
            f"framing overflow: frame needs {cfg.frame_span_ns:g} ns, period is {cfg.period_ns:g} ns")
    tau = cfg.bin_width_ns

    if cfg.framing == "stx-etx":
        payload = edges_to_bits(train, cfg, bit_count=cfg.bit_count)
        framed = text_to_bits(bytes([STX])) + payload + text_to_bits(bytes([ETX]))
        return PulseTrain(edges=tuple(_run_edges(framed.bits, tau, 0.0)),
                          period_ns=cfg.period_ns, framing="stx-etx")

    w = cfg.code_signal_fraction
    starts = [_MARKER_OFFSET, _MARKER_OFFSET + w, _MARKER_OFFSET + 2 * w, _MARKER_OFFSET + 3 * w]
    if any(abs(x - round(x)) < _ON_BOUNDARY for x in starts):
        raise FramingError(f"code_signal_fraction {w} puts a marker edge on a bin boundary")
    origin = cfg.payload_origin_ns
    end = (cfg.bit_count + 3) * tau
    marker_times = [(_MARKER_OFFSET * tau, (_MARKER_OFFSET + w) * tau),
                    (end + starts[0] * tau, end + starts[1] * tau),
                    (end + starts[2] * tau, end + starts[3] * tau)]
    edges = [Edge(e.time_ns + origin, e.rising) for e in train.edges]
    for on, off in marker_times:
        edges.append(Edge(on, True, True))
        edges.append(Edge(off, False, True))
    edges.sort(key=lambda e: e.time_ns)
    return PulseTrain(edges=tuple(edges), period_ns=cfg.period_ns, origin_ns=origin,
                      framing="code-signal")


def edges_to_bits(edges: Union[PulseTrain, Sequence[float]], cfg: TimingConfig,
                  bit_count: Optional[int] = None, tolerance: float = 0.5) -> BitSequence:
    """Quantize edge times to the nearest bin boundary and fill ones between pulse edges.

    A PulseTrain contributes its payload edges measured from its origin. Untagged times are
    taken as alternating rising/falling starting with rising. `tolerance` is in bins.
    """
    tau = cfg.bin_width_ns
    if isinstance(edges, PulseTrain):
        framing = edges.framing
        times = np.array([e.time_ns for e in edges.payload_edges()]) - edges.origin_ns
        if framing == "code-signal":
            framing = "none"
    else:
        framing = cfg.framing
        times = np.sort(np.asarray(edges, dtype=float))
    if bit_count is None:
        bit_count = cfg.bit_count + 16 if framing == "stx-etx" else cfg.bit_count
    if times.size % 2:
        raise CodecError(f"unpaired edge ({times.size} edges)")

    k = np.rint(times / tau).astype(int)
    off = np.abs(times - k * tau)
    if np.any(off > tolerance * tau):
        worst = float(times[np.argmax(off)])
        raise CodecError(f"edge at {worst:g} ns is not within {tolerance} bins of a boundary")
    if np.any((k < 0) | (k > bit_count)):
        raise CodecError(f"edge outside the {bit_count}-bit payload window")

    bits = np.zeros(bit_count, dtype=np.int8)
    previous = 0
    for rise, fall in zip(k[0::2], k[1::2]):
        if fall <= rise or rise < previous:
            raise CodecError(f"pulse edges collapse at bins {rise}..{fall}")
        bits[rise:fall] = 1
        previous = fall
    return BitSequence(tuple(bits.tolist()))


# =============================================================================
# CYCLIC REALIGNMENT
# =============================================================================

def _short_gap_runs(short: np.ndarray) -> List[List[int]]:
    n = short.size
    first_long = int(np.argmin(short))
    runs, current = [], []
    for step in range(1, n + 1):
        idx = (first_long + step) % n
        if short[idx]:
            current.append(idx)
        elif current:
            runs.append(current)
            current = []
    if current:
        runs.append(current)
    return runs


def realign_cyclic(edges: Union[PulseTrain, Sequence[float]], cfg: TimingConfig) -> PulseTrain:
    """Locate the code-signal start marker in a cyclically shifted edge set and return the
    payload edges measured from the payload origin.

    The start marker is the only isolated pulse shorter than a bin; the end marker is three
    consecutive short gaps. Works for any constant offset between writer and reader.
    """
    if cfg.framing != "code-signal":
        raise FramingError("realignment needs code-signal framing")
    period, tau = cfg.period_ns, cfg.bin_width_ns
    raw = edges.times() if isinstance(edges, PulseTrain) else np.asarray(edges, dtype=float)
    times = np.sort(np.mod(raw, period))
    if times.size < 2:
        raise FramingError("frame marker missing")

    gaps = np.diff(np.append(times, times[0] + period))
    short = gaps < cfg.marker_gap_threshold_ns
    if short.all():
        raise FramingError("ambiguous frame: every gap is marker-sized")
    runs = _short_gap_runs(short)
    singles = [r for r in runs if len(r) == 1]
    strays = [r for r in runs if len(r) not in (1, 3)]
    if not singles:
        raise FramingError("frame marker missing")
    if len(singles) > 1 or strays:
        raise FramingError(f"ambiguous frame: {len(singles)} isolated marker pulses, "
                           f"{len(strays)} unexplained short-gap runs")

    origin = times[singles[0][0]] + (2.0 - _MARKER_OFFSET) * tau
    rel = np.mod(times - origin + 0.5 * tau, period) - 0.5 * tau
    payload = np.sort(rel[rel < (cfg.bit_count + 0.5) * tau])
    return PulseTrain.from_times(payload, period)
