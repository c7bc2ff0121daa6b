"""Parameter records of the analytic kernel.

All times inside the physics package are in units of the excited-state lifetime T1 = 1/(2*gamma),
so gamma = 1/2 and the coupling b = T*gamma/2 becomes T/4.
"""

import math
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from ..config import (
    DEFAULT_T1_NS, DEFAULT_OPTICAL_THICKNESS, DEFAULT_COHERENCE_RATE_RATIO, DEFAULT_DETUNING,
    DEFAULT_NONRESONANT_DEPTH, DEFAULT_RECOILLESS_FRACTION, DEFAULT_HORIZON, MIN_HORIZON,
    DEFAULT_REL_TOL, DEFAULT_GRID_STEP, DEFAULT_GL_ORDER,
)
from ..errors import PhysicsDomainError

GAMMA = 0.5


class PhysicsUnits(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    t1_source_ns: float = Field(DEFAULT_T1_NS, gt=0)
    natural_units: Literal[True] = True

    def to_natural(self, t_ns):
        return t_ns / self.t1_source_ns

    def to_ns(self, t):
        return t * self.t1_source_ns


class AbsorberParams(BaseModel):
    """Resonant absorber seen by the transmitted photons."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    optical_thickness: float = Field(DEFAULT_OPTICAL_THICKNESS, ge=0)
    coherence_rate_ratio: float = Field(DEFAULT_COHERENCE_RATE_RATIO, gt=0)
    detuning: float = DEFAULT_DETUNING
    nonresonant_depth: float = Field(DEFAULT_NONRESONANT_DEPTH, ge=0)
    recoilless_fraction: float = Field(DEFAULT_RECOILLESS_FRACTION, ge=0, le=1)

    @property
    def coupling(self) -> float:
        return coupling(self.optical_thickness)

    @property
    def gamma_a(self) -> float:
        return self.coherence_rate_ratio * GAMMA

    @property
    def delta(self) -> float:
        return self.detuning * GAMMA

    @property
    def is_resonant(self) -> bool:
        return self.detuning == 0.0 and self.coherence_rate_ratio == 1.0

    def require_resonance(self, what: str) -> None:
        if not self.is_resonant:
            raise PhysicsDomainError(
                f"{what} needs detuning 0 and gamma_A/gamma 1, got "
                f"{self.detuning} and {self.coherence_rate_ratio}"
            )


class QuadratureSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    horizon: float = Field(DEFAULT_HORIZON, ge=MIN_HORIZON)
    rel_tol: float = Field(DEFAULT_REL_TOL, gt=0)
    grid_step: float = Field(DEFAULT_GRID_STEP, gt=0, le=1)
    gl_order: int = Field(DEFAULT_GL_ORDER, ge=4, le=64)

    @property
    def steps(self) -> int:
        """Number of grid cells covering the horizon."""
        return int(round(self.horizon / self.grid_step))

    @property
    def tail_norm(self) -> float:
        """Weight of exp(-s) on [0, horizon]; divides rates so that T=0 gives exactly 1."""
        return -math.expm1(-self.horizon)


def coupling(optical_thickness: float) -> float:
    """b = T*gamma/2 in natural units."""
    if optical_thickness < 0:
        raise PhysicsDomainError(f"optical thickness must be >= 0, got {optical_thickness}")
    return optical_thickness / 4.0
