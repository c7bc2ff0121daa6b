"""Periodic phase modulation seen by the absorber."""

import math
from dataclasses import dataclass, field
from typing import Literal, Optional, Sequence, Tuple

import numpy as np

from ..errors import PhysicsDomainError

PhaseMode = Literal["ideal", "realistic"]
Convention = Literal["half-wave", "full-wave"]

_CONVENTION_FACTOR = {"half-wave": math.pi, "full-wave": 2.0 * math.pi}
# image periods are summed until the relaxation tail is below exp(-_TAIL_DECAYS)
_TAIL_DECAYS = 40.0


def displacement_profile(t, t1: float, t2: float, trd: float):
    """D(t)/a of a transducer driven by one rectangular voltage pulse on [t1, t2).

    Exponential approach to 1 during the pulse, exponential relaxation after it.
    """
    if not t2 > t1:
        raise PhysicsDomainError(f"pulse must satisfy t2 > t1, got {t1}, {t2}")
    if not trd > 0:
        raise PhysicsDomainError(f"rise/decay time must be > 0, got {trd}")
    t_arr = np.asarray(t, dtype=float)
    rising = -np.expm1(-np.clip(t_arr - t1, 0.0, None) / trd)
    reached = -math.expm1(-(t2 - t1) / trd)
    decaying = np.exp(-np.clip(t_arr - t2, 0.0, None) / trd) * reached
    out = np.where(t_arr < t1, 0.0, np.where(t_arr < t2, rising, decaying))
    return out if np.ndim(t) else float(out)


@dataclass(frozen=True)
class PhaseProfile:
    """phi(t) with period `period`, built from rectangular drive pulses.

    Times are in units of T1. `pulses` are (on, off) pairs with 0 <= on < period and
    on < off <= on + period. In ideal mode phi jumps between 0 and pi at the pulse edges;
    in realistic mode it follows the transducer displacement with rise/decay time `rise_time`.
    """

    period: float
    pulses: Tuple[Tuple[float, float], ...] = ()
    mode: PhaseMode = "ideal"
    rise_time: float = 0.0
    convention: Convention = "half-wave"
    displacement_wavelengths: Optional[float] = None
    _table: Tuple[np.ndarray, np.ndarray] = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.period > 0:
            raise PhysicsDomainError(f"period must be > 0, got {self.period}")
        pulses = tuple(sorted((float(on), float(off)) for on, off in self.pulses))
        for on, off in pulses:
            if not (0.0 <= on < self.period and on < off <= on + self.period):
                raise PhysicsDomainError(f"pulse ({on}, {off}) does not fit period {self.period}")
        spans = list(pulses) + ([(pulses[0][0] + self.period, 0.0)] if pulses else [])
        for (_, off), (nxt, _) in zip(spans, spans[1:]):
            if off > nxt:
                raise PhysicsDomainError("pulses overlap")
        if self.mode == "realistic" and not self.rise_time > 0:
            raise PhysicsDomainError("realistic mode needs rise_time > 0")
        if self.mode not in ("ideal", "realistic"):
            raise PhysicsDomainError(f"unknown phase mode {self.mode!r}")
        object.__setattr__(self, "pulses", pulses)

    # -- constructors ---------------------------------------------------------

    @classmethod
    def constant(cls, period: float) -> "PhaseProfile":
        return cls(period=period)

    @classmethod
    def from_pulse_train(cls, train, t1_ns: float, mode: PhaseMode = "ideal", rise_time: float = 0.0,
                         convention: Convention = "half-wave",
                         displacement_wavelengths: Optional[float] = None) -> "PhaseProfile":
        """Profile driven by a codec PulseTrain (edge times in ns)."""
        period = train.period_ns / t1_ns
        pulses = []
        for on, off in train.pulses():
            on_t = (on / t1_ns) % period
            pulses.append((on_t, on_t + (off - on) / t1_ns))
        return cls(period=period, pulses=tuple(pulses), mode=mode, rise_time=rise_time,
                   convention=convention, displacement_wavelengths=displacement_wavelengths)

    # -- ideal-mode edges -------------------------------------------------------

    @property
    def edge_count(self) -> int:
        return 2 * len(self.pulses)

    def transitions(self) -> Tuple[np.ndarray, np.ndarray]:
        """Edge times folded into [0, period) and the jump c_after - c_before of c = exp(i*phi).

        Only meaningful in ideal mode, where c steps between +1 and -1.
        """
        if not self.pulses:
            return np.zeros(0), np.zeros(0)
        on = np.array([p[0] for p in self.pulses])
        off = np.array([p[1] for p in self.pulses]) % self.period
        times = np.concatenate([on, off])
        jumps = np.concatenate([np.full(on.size, -2.0), np.full(off.size, 2.0)])
        order = np.argsort(times, kind="stable")
        return times[order], jumps[order]

    def _ideal_level(self, t_mod: np.ndarray) -> np.ndarray:
        level = np.zeros(t_mod.shape)
        for on, off in self.pulses:
            inside = (t_mod >= on) & (t_mod < off)
            if off > self.period:
                inside |= t_mod < off - self.period
            level = level + inside
        return level

    # -- realistic mode -------------------------------------------------------

    @property
    def amplitude(self) -> float:
        """Phase (rad) corresponding to full displacement a."""
        if self.displacement_wavelengths is not None:
            return _CONVENTION_FACTOR[self.convention] * self.displacement_wavelengths
        if not self.pulses or self.mode == "ideal":
            return math.pi
        shortest = min(off - on for on, off in self.pulses)
        return math.pi / -math.expm1(-shortest / self.rise_time)

    def _realistic_phase(self, t_mod: np.ndarray) -> np.ndarray:
        images = 1 + int(math.ceil(_TAIL_DECAYS * self.rise_time / self.period))
        total = np.zeros(t_mod.shape)
        for on, off in self.pulses:
            for m in range(images + 1):
                total += displacement_profile(t_mod + m * self.period, on, off, self.rise_time)
        return self.amplitude * total

    # -- evaluation -------------------------------------------------------------

    def phase(self, t):
        """phi(t) in radians; right-continuous at ideal edges."""
        t_mod = np.mod(np.asarray(t, dtype=float), self.period)
        if self.mode == "ideal":
            out = math.pi * self._ideal_level(t_mod)
        else:
            out = self._realistic_phase(t_mod)
        return out if np.ndim(t) else float(out)

    def factor(self, t):
        """c(t) = exp(i*phi(t))."""
        return np.exp(1j * np.asarray(self.phase(t)))

    def table(self, step: float) -> Tuple[np.ndarray, np.ndarray]:
        """phi tabulated on [0, period) with spacing <= step (cached per profile)."""
        cached = self._table
        if cached is not None and cached[0].size > 1 and cached[0][1] <= step:
            return cached
        n = int(math.ceil(self.period / step))
        grid = np.arange(n) * (self.period / n)
        values = np.asarray(self.phase(grid))
        grid.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "_table", (grid, values))
        return grid, values

    def interpolated_factor(self, t: np.ndarray, step: float) -> np.ndarray:
        """c(t) from the periodic phase table; used by the realistic-mode convolutions."""
        grid, values = self.table(step)
        return np.exp(1j * np.interp(t, grid, values, period=self.period))

    def is_constant(self) -> bool:
        return not self.pulses
