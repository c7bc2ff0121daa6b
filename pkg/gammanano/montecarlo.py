#!/usr/bin/env python3
"""
Monte Carlo photon detection streams.

Two independent routes to the same detector timestamps:

- micro: every emitted photon is followed through the absorber. It survives with its own
  transmission probability and its delay is drawn from its own |a(u)|^2.
- macro: detections form an inhomogeneous Poisson process whose intensity is the
  emission-averaged count rate, sampled by thinning.

The acquisition interval is cut into fixed chunks, chunk i drawing from
default_rng(SeedSequence(seed, spawn_key=(i,))), so results do not depend on worker count.
"""

import asyncio
import logging
import math
from dataclasses import dataclass
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import integrate

from .config import (
    DEFAULT_MEAN_RATE_HZ, DEFAULT_DURATION_S, DEFAULT_SEED, DEFAULT_MC_MODE,
    DEFAULT_DETECTOR_EFFICIENCY, DEFAULT_CHUNK_S, DEFAULT_PHASE_ROWS, DEFAULT_T1_NS,
    PILE_UP_WARNING, DEFAULT_THREADS,
)
from .errors import ConfigurationError
from .physics import AbsorberParams, PhaseProfile, QuadratureSpec, emission_cells, rate_table

SimulationMode = Literal["micro", "macro"]

NS_PER_S = 1e9


class StreamParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    mean_rate_hz: float = Field(DEFAULT_MEAN_RATE_HZ, gt=0)
    duration_s: float = Field(DEFAULT_DURATION_S, ge=0)
    seed: int = Field(DEFAULT_SEED, ge=0, lt=2 ** 64)
    mode: SimulationMode = DEFAULT_MC_MODE
    detector_efficiency: float = Field(DEFAULT_DETECTOR_EFFICIENCY, gt=0, le=1)
    chunk_s: float = Field(DEFAULT_CHUNK_S, gt=0)

    @property
    def duration_ns(self) -> float:
        return self.duration_s * NS_PER_S

    @property
    def chunk_count(self) -> int:
        return int(math.ceil(self.duration_s / self.chunk_s))


@dataclass(frozen=True)
class SamplingTables:
    """Immutable per-configuration tables shared read-only by all chunks.

    micro: `row_phase_ns` (emission phases), `p_det` per row and `cdf` of the delay per row
    on cells of width `delay_step_ns` (leading column 0, last column 1).
    macro: `times_ns` over one period and `rate` = lambda(t)/mean_rate, with `rate_max`.
    """

    mode: SimulationMode
    period_ns: float
    t1_ns: float
    row_phase_ns: Optional[np.ndarray] = None
    p_det: Optional[np.ndarray] = None
    cdf: Optional[np.ndarray] = None
    delay_step_ns: float = 0.0
    times_ns: Optional[np.ndarray] = None
    rate: Optional[np.ndarray] = None
    rate_max: float = 0.0

    @property
    def rows(self) -> int:
        return 0 if self.p_det is None else self.p_det.size

    def mean_detection_fraction(self) -> float:
        """Detected / emitted photons averaged over emission phase."""
        if self.mode == "micro":
            return float(np.mean(self.p_det))
        # time average over the periodic, non-uniform rate table
        t = np.append(self.times_ns, self.times_ns[0] + self.period_ns)
        return float(integrate.trapezoid(np.append(self.rate, self.rate[0]), t)) / self.period_ns


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


# =============================================================================
# TABLES
# =============================================================================

def _exponential_cells(steps: int, h: float) -> np.ndarray:
    """Recoil photons: |a|^2 = exp(-u) integrated over each delay cell."""
    return np.exp(-np.arange(steps) * h) * -math.expm1(-h)


def build_tables(phase: PhaseProfile, absorber: AbsorberParams, quad: QuadratureSpec,
                 mode: SimulationMode, t1_ns: float = DEFAULT_T1_NS,
                 rows: int = DEFAULT_PHASE_ROWS) -> SamplingTables:
    """Precompute what run_micro or run_macro needs for one configuration."""
    absorber.require_resonance("build_tables")
    f = absorber.recoilless_fraction
    attenuation = math.exp(-absorber.nonresonant_depth)
    period_ns = phase.period * t1_ns

    if mode == "macro":
        times, values = rate_table(phase, absorber.optical_thickness, quad)
        rate = ((1.0 - f) + f * values) * attenuation
        logging.info(f"  ✓ Rate table: {times.size} nodes, mean {rate.mean():.4f}")
        return SamplingTables(mode="macro", period_ns=period_ns, t1_ns=t1_ns,
                              times_ns=_frozen(times * t1_ns), rate=_frozen(rate),
                              rate_max=float(rate.max()))

    if mode != "micro":
        raise ConfigurationError(f"unknown simulation mode {mode!r}")
    if rows < 1:
        raise ConfigurationError(f"rows must be >= 1, got {rows}")
    h = quad.grid_step
    steps = quad.steps
    norm = -math.expm1(-steps * h)
    # emission phases at row midpoints
    t0s = (np.arange(rows) + 0.5) * (phase.period / rows)
    cells = emission_cells(t0s, phase, absorber.optical_thickness, quad) / norm
    recoil = _exponential_cells(steps, h) / norm

    p_resonant = np.clip(cells.sum(axis=1), 0.0, 1.0)
    p_det = np.clip(attenuation * (f * p_resonant + (1.0 - f)), 0.0, 1.0)

    density = f * cells + (1.0 - f) * recoil[None, :]
    totals = density.sum(axis=1)
    dark = totals <= 0
    if np.any(dark):
        density[dark] = recoil
        totals[dark] = recoil.sum()
    cdf = np.zeros((rows, steps + 1))
    cdf[:, 1:] = np.cumsum(density, axis=1) / totals[:, None]
    cdf[:, -1] = 1.0
    logging.info(f"  ✓ Micro tables: {rows} emission phases x {steps} delay cells, "
                 f"mean P_det {p_det.mean():.4f}")
    return SamplingTables(mode="micro", period_ns=period_ns, t1_ns=t1_ns,
                          row_phase_ns=_frozen(t0s * t1_ns), p_det=_frozen(p_det),
                          cdf=_frozen(cdf), delay_step_ns=h * t1_ns)


# =============================================================================
# EMISSIONS
# =============================================================================

def chunk_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def chunk_bounds(params: StreamParams) -> List[Tuple[float, float]]:
    """[start, stop) of every acquisition chunk in ns."""
    chunk_ns = params.chunk_s * NS_PER_S
    total = params.duration_ns
    return [(i * chunk_ns, min((i + 1) * chunk_ns, total)) for i in range(params.chunk_count)]


def _poisson_times(rng: np.random.Generator, rate_hz: float, start_ns: float, stop_ns: float) -> np.ndarray:
    n = rng.poisson(rate_hz * (stop_ns - start_ns) / NS_PER_S)
    return np.sort(rng.uniform(start_ns, stop_ns, n))


def sample_emissions(params: StreamParams, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Homogeneous Poisson emission times (ns) over the acquisition.

    Without `rng`, draws chunk by chunk from the seed-derived streams, exactly the emissions
    run_micro starts from.
    """
    if rng is not None:
        return _poisson_times(rng, params.mean_rate_hz, 0.0, params.duration_ns)
    parts = [_poisson_times(chunk_rng(params.seed, i), params.mean_rate_hz, lo, hi)
             for i, (lo, hi) in enumerate(chunk_bounds(params))]
    return np.concatenate(parts) if parts else np.zeros(0)


def check_pile_up(params: StreamParams, t1_ns: float) -> None:
    occupancy = params.mean_rate_hz * t1_ns / NS_PER_S
    if occupancy > PILE_UP_WARNING:
        logging.warning(f"  ✗ {occupancy:.3f} photons per lifetime: pile-up is not modelled")


def _require(tables: SamplingTables, mode: SimulationMode) -> None:
    if tables.mode != mode:
        raise ConfigurationError(f"tables were built for {tables.mode} mode, not {mode}")


def _merge(parts: List[np.ndarray], params: StreamParams) -> np.ndarray:
    records = np.sort(np.concatenate(parts)) if parts else np.zeros(0)
    return records[records < params.duration_ns]


# =============================================================================
# MICRO
# =============================================================================

def sample_delays(tables: SamplingTables, rows: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF delays (ns) for photons of the given table rows and uniforms u.

    Rows are offset by 2*row so one searchsorted covers the whole flattened table; inside a
    cell the CDF is linear.
    """
    cdf = tables.cdf
    width = cdf.shape[1]
    steps = width - 1
    flat = (cdf + 2.0 * np.arange(cdf.shape[0])[:, None]).ravel()
    idx = np.searchsorted(flat, u + 2.0 * rows, side="right") - 1
    j = np.clip(idx - rows * width, 0, steps - 1)
    lo = cdf[rows, j]
    span = cdf[rows, j + 1] - lo
    frac = np.where(span > 0, (u - lo) / np.where(span > 0, span, 1.0), 0.5)
    return (j + np.clip(frac, 0.0, 1.0)) * tables.delay_step_ns


def _micro_chunk(params: StreamParams, tables: SamplingTables, index: int,
                 bounds: Tuple[float, float]) -> np.ndarray:
    rng = chunk_rng(params.seed, index)
    t0 = _poisson_times(rng, params.mean_rate_hz, *bounds)
    rows_total = tables.rows
    rows = np.floor(np.mod(t0, tables.period_ns) / tables.period_ns * rows_total).astype(np.int64) % rows_total
    keep = rng.random(t0.size) < tables.p_det[rows] * params.detector_efficiency
    t0, rows = t0[keep], rows[keep]
    # snap to the row phase the tables were computed for
    t0 = t0 - np.mod(t0, tables.period_ns) + tables.row_phase_ns[rows]
    delays = sample_delays(tables, rows, rng.random(t0.size))
    logging.debug(f"    chunk {index}: {keep.size} emissions, {t0.size} detections")
    return t0 + delays


def run_micro(params: StreamParams, tables: SamplingTables) -> np.ndarray:
    """Per-photon simulation. Returns sorted detection times in ns."""
    _require(tables, "micro")
    check_pile_up(params, tables.t1_ns)
    parts = [_micro_chunk(params, tables, i, b) for i, b in enumerate(chunk_bounds(params))]
    return _merge(parts, params)


async def run_micro_async(params: StreamParams, tables: SamplingTables,
                          threads: int = DEFAULT_THREADS) -> np.ndarray:
    _require(tables, "micro")
    check_pile_up(params, tables.t1_ns)
    return await _gather_chunks(_micro_chunk, params, tables, threads)


# =============================================================================
# MACRO
# =============================================================================

def intensity(tables: SamplingTables, t_ns) -> np.ndarray:
    """lambda(t)/mean_rate by periodic linear interpolation of the rate table."""
    return np.interp(np.mod(t_ns, tables.period_ns), tables.times_ns, tables.rate,
                     period=tables.period_ns)


def _macro_chunk(params: StreamParams, tables: SamplingTables, index: int,
                 bounds: Tuple[float, float]) -> np.ndarray:
    rng = chunk_rng(params.seed, index)
    lam_max = tables.rate_max * params.mean_rate_hz * params.detector_efficiency
    candidates = _poisson_times(rng, lam_max, *bounds)
    keep = rng.random(candidates.size) * tables.rate_max < intensity(tables, candidates)
    logging.debug(f"    chunk {index}: {candidates.size} candidates, {int(keep.sum())} kept")
    return candidates[keep]


def run_macro(params: StreamParams, tables: SamplingTables) -> np.ndarray:
    """Thinning of a homogeneous process at lambda_max. Returns sorted detection times in ns."""
    _require(tables, "macro")
    check_pile_up(params, tables.t1_ns)
    parts = [_macro_chunk(params, tables, i, b) for i, b in enumerate(chunk_bounds(params))]
    return _merge(parts, params)


async def run_macro_async(params: StreamParams, tables: SamplingTables,
                          threads: int = DEFAULT_THREADS) -> np.ndarray:
    _require(tables, "macro")
    check_pile_up(params, tables.t1_ns)
    return await _gather_chunks(_macro_chunk, params, tables, threads)


async def _gather_chunks(worker, params: StreamParams, tables: SamplingTables, threads: int) -> np.ndarray:
    if threads < 1:
        raise ConfigurationError(f"threads must be >= 1, got {threads}")
    semaphore = asyncio.Semaphore(threads)

    async def run_chunk(index: int, bounds: Tuple[float, float]) -> np.ndarray:
        async with semaphore:
            return await asyncio.to_thread(worker, params, tables, index, bounds)

    tasks = [run_chunk(i, b) for i, b in enumerate(chunk_bounds(params))]
    parts = await asyncio.gather(*tasks)
    return _merge(list(parts), params)


def run(params: StreamParams, tables: SamplingTables) -> np.ndarray:
    """Dispatch on params.mode."""
    if params.mode == "micro":
        return run_micro(params, tables)
    return run_macro(params, tables)


async def run_async(params: StreamParams, tables: SamplingTables, threads: int = DEFAULT_THREADS) -> np.ndarray:
    if params.mode == "micro":
        return await run_micro_async(params, tables, threads)
    return await run_macro_async(params, tables, threads)
