#!/usr/bin/env python3
"""
Nested experiment configuration: one JSON document, every section optional.
"""

import hashlib
import json
from pathlib import Path
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .codec import TimingConfig
from .config import (
    DEFAULT_MESSAGE, DEFAULT_SEED, DEFAULT_OUTPUT_DIR, DEFAULT_THREADS,
    DEFAULT_PHASE_MODE, DEFAULT_RISE_TIME_NS, DEFAULT_CONVENTION,
    DEFAULT_CURVE_T1, DEFAULT_CURVE_T2, DEFAULT_CURVE_RISE_TIME, DEFAULT_CURVE_T_MAX, DEFAULT_CURVE_STEP,
)
from .errors import ConfigurationError
from .montecarlo import StreamParams
from .physics import AbsorberParams, PhysicsUnits, QuadratureSpec
from .sync import PeakPolicy, TacConfig

# not part of the digest: they change where and how fast, never what
_UNHASHED = {"output_dir", "threads"}


class PhaseSettings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    mode: Literal["ideal", "realistic"] = DEFAULT_PHASE_MODE
    rise_time_ns: float = Field(DEFAULT_RISE_TIME_NS, gt=0)
    convention: Literal["half-wave", "full-wave"] = DEFAULT_CONVENTION
    displacement_wavelengths: Optional[float] = Field(None, gt=0)


class CurveSettings(BaseModel):
    """Grid and pulse placement for the analytic curves, in units of T1."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    t1: float = Field(DEFAULT_CURVE_T1, ge=0)
    t2: float = DEFAULT_CURVE_T2
    rise_time: float = Field(DEFAULT_CURVE_RISE_TIME, gt=0)
    t_max: float = Field(DEFAULT_CURVE_T_MAX, gt=0)
    step: float = Field(DEFAULT_CURVE_STEP, gt=0)

    @model_validator(mode="after")
    def _ordered(self):
        if not self.t2 > self.t1:
            raise ValueError("t2 must be greater than t1")
        return self


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    message: str = DEFAULT_MESSAGE
    seed: int = Field(DEFAULT_SEED, ge=0, lt=2 ** 64)
    output_dir: str = DEFAULT_OUTPUT_DIR
    threads: int = Field(DEFAULT_THREADS, ge=1)
    units: PhysicsUnits = PhysicsUnits()
    absorber: AbsorberParams = AbsorberParams()
    timing: TimingConfig = TimingConfig()
    stream: StreamParams = StreamParams()
    tac: TacConfig = TacConfig()
    quadrature: QuadratureSpec = QuadratureSpec()
    phase: PhaseSettings = PhaseSettings()
    curves: CurveSettings = CurveSettings()
    peaks: PeakPolicy = PeakPolicy()

    @model_validator(mode="before")
    @classmethod
    def _derive(cls, data):
        if not isinstance(data, dict):
            return data
        data = dict(data)
        message = data.get("message", DEFAULT_MESSAGE)
        try:
            bits = 8 * len(message.encode("latin-1"))
        except (AttributeError, UnicodeEncodeError):
            raise ValueError("message must be text with code points below 256")

        timing = _section(data, "timing")
        if timing.setdefault("bit_count", bits) != bits:
            raise ValueError(f"timing.bit_count {timing['bit_count']} disagrees with the "
                             f"{bits}-bit message")
        tac = _section(data, "tac")
        if "period_ns" in timing:
            tac.setdefault("start_period_ns", timing["period_ns"])

        stream = _section(data, "stream")
        if "seed" in data and "seed" in stream and stream["seed"] != data["seed"]:
            raise ValueError("seed and stream.seed disagree")
        if "seed" in stream:
            data["seed"] = stream["seed"]
        else:
            stream["seed"] = data.get("seed", DEFAULT_SEED)
        return data

    @property
    def message_bytes(self) -> bytes:
        return self.message.encode("latin-1")


def _section(data: dict, key: str) -> dict:
    value = data.get(key, {})
    if isinstance(value, BaseModel):
        value = value.model_dump()
    section = dict(value)
    data[key] = section
    return section


def format_validation_error(error: ValidationError) -> str:
    """One line per failing field path, e.g. 'timing.bin_width_ns: ...'."""
    lines = []
    for item in error.errors():
        path = ".".join(str(p) for p in item["loc"]) or "<root>"
        lines.append(f"{path}: {item['msg']}")
    return "\n".join(lines)


def build_config(data: Optional[dict] = None) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data or {})
    except ValidationError as e:
        raise ConfigurationError(format_validation_error(e)) from e


def load_config(path: Optional[Union[str, Path]] = None) -> ExperimentConfig:
    """Read a JSON experiment file; None gives the all-defaults configuration."""
    if path is None:
        return build_config()
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"{path}: invalid JSON ({e})") from e
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: top level must be an object")
    return build_config(data)


def with_overrides(cfg: ExperimentConfig, seed: Optional[int] = None, mode: Optional[str] = None,
                   offset_hz: Optional[float] = None, output_dir: Optional[str] = None,
                   threads: Optional[int] = None, duration_s: Optional[float] = None) -> ExperimentConfig:
    """Apply command-line overrides and revalidate."""
    data = cfg.model_dump()
    if seed is not None:
        data["seed"] = seed
        data["stream"]["seed"] = seed
    if mode is not None:
        data["stream"]["mode"] = mode
    if duration_s is not None:
        data["stream"]["duration_s"] = duration_s
    if offset_hz is not None:
        data["tac"]["frequency_offset_hz"] = offset_hz
    if output_dir is not None:
        data["output_dir"] = output_dir
    if threads is not None:
        data["threads"] = threads
    return build_config(data)


def config_digest(cfg: ExperimentConfig) -> str:
    """First 16 hex digits of SHA-256 over the canonical JSON of the configuration."""
    payload = cfg.model_dump(mode="json", exclude=_UNHASHED)
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]
