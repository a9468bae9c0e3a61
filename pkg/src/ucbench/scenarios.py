"""Randomized 24-hour load profiles.

One profile is drawn in four steps: a system peak from a uniform band around
60% of installed capacity, per-bus shares from jittered nominal shares, an
hourly shape from a cumulative product of hour-over-hour ratios normalized to
peak at 1, and finally the bus-by-hour demand as the product of the three.

Profiles are a pure function of (system, seed): the generator is PCG64 and
the draw order (peak, bus shares, hourly shape) is fixed, so a stored seed
reproduces the matrix bit for bit on any platform.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DataError
from .system import PowerSystem, _readonly

#: Peak demand band: 0.6 * installed capacity * unif(PEAK_LOW, PEAK_HIGH).
PEAK_BASE_FRACTION = 0.6
PEAK_LOW, PEAK_HIGH = 0.925, 1.075

#: Bus-share jitter band.
SHARE_LOW, SHARE_HIGH = 0.9, 1.1

#: Hour-over-hour ratios are redrawn until at least this value (at most
#: MAX_REDRAWS attempts, then clamped) so cumulative products stay positive.
MIN_HOURLY_RATIO = 0.01
MAX_REDRAWS = 100


@dataclass(frozen=True, eq=False)
class DemandMatrix:
    """Bus-by-hour demand in MW, together with the factors that produced it."""

    values: np.ndarray            # B x T, MW
    peak: float                   # system peak, MW
    bus_factors: np.ndarray       # per-bus shares, sum to 1
    temporal_factors: np.ndarray  # per-hour shape, max exactly 1

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(self.values))
        object.__setattr__(self, "bus_factors", _readonly(self.bus_factors))
        object.__setattr__(self, "temporal_factors", _readonly(self.temporal_factors))
        b, t = len(self.bus_factors), len(self.temporal_factors)
        if self.values.shape != (b, t):
            raise DataError(f"values shape {self.values.shape} != ({b}, {t})")
        if self.peak < 0 or np.any(self.bus_factors < 0) or np.any(self.temporal_factors < 0):
            raise DataError("demand factors must be non-negative")
        if abs(float(self.bus_factors.sum()) - 1.0) > 1e-12:
            raise DataError("bus_factors must sum to 1 within 1e-12")
        if float(self.temporal_factors.max()) != 1.0:
            raise DataError("temporal_factors must have maximum exactly 1")
        expected = self.peak * np.outer(self.bus_factors, self.temporal_factors)
        if not np.allclose(self.values, expected, rtol=0.0, atol=1e-9):
            raise DataError("values do not equal peak * bus_factors x temporal_factors within 1e-9 MW")

    @classmethod
    def from_factors(cls, peak: float, bus_factors, temporal_factors) -> "DemandMatrix":
        bus_factors = np.asarray(bus_factors, dtype=float)
        temporal_factors = np.asarray(temporal_factors, dtype=float)
        values = peak * np.outer(bus_factors, temporal_factors)
        return cls(values=values, peak=float(peak), bus_factors=bus_factors,
                   temporal_factors=temporal_factors)

    @classmethod
    def from_values(cls, values) -> "DemandMatrix":
        """Rebuild a demand matrix from its bus-by-hour MW values alone.

        The peak and the two factor vectors are re-derived from the values
        (peak hour = hour of largest total), so a matrix that is not the
        product of per-bus and per-hour factors is rejected.
        """
        values = np.asarray(values, dtype=float)
        if values.ndim != 2 or values.size == 0:
            raise DataError("demand values must be a non-empty B x T matrix")
        totals = values.sum(axis=0)
        peak_hour = int(np.argmax(totals))
        peak = float(totals[peak_hour])
        if peak <= 0:
            raise DataError("demand values carry no load")
        return cls(values=values, peak=peak,
                   bus_factors=values[:, peak_hour] / peak,
                   temporal_factors=totals / peak)

    @cached_property
    def hourly_totals(self) -> np.ndarray:
        """System demand per hour, MW, shape (T,)."""
        totals = self.values.sum(axis=0)
        totals.setflags(write=False)
        return totals

    @property
    def n_buses(self) -> int:
        return self.values.shape[0]

    @property
    def n_hours(self) -> int:
        return self.values.shape[1]

    def __eq__(self, other):
        if not isinstance(other, DemandMatrix):
            return NotImplemented
        return (self.peak == other.peak
                and np.array_equal(self.values, other.values)
                and np.array_equal(self.bus_factors, other.bus_factors)
                and np.array_equal(self.temporal_factors, other.temporal_factors))


@dataclass(frozen=True)
class Scenario:
    """One generated demand instance, keyed by the seed that produced it."""

    instance_id: int
    seed: int
    demand: DemandMatrix


def draw_peak_demand(system: PowerSystem, rng) -> float:
    """System peak in MW: 0.6 * total capacity * unif(0.925, 1.075)."""
    if system.n_generators == 0:
        raise DataError("cannot draw a peak demand for a system with no generators")
    return PEAK_BASE_FRACTION * system.total_capacity * float(rng.uniform(PEAK_LOW, PEAK_HIGH))


def draw_bus_factors(system: PowerSystem, rng) -> np.ndarray:
    """Per-bus demand shares: jittered nominal shares, renormalized to sum 1."""
    shares = system.nominal_load_shares
    if shares.sum() <= 0:
        raise DataError("all nominal load shares are zero")
    jitter = np.array([rng.uniform(SHARE_LOW, SHARE_HIGH) for _ in range(len(shares))])
    raw = shares * jitter
    return raw / raw.sum()


def draw_temporal_factors(system: PowerSystem, rng) -> np.ndarray:
    """Hourly demand shape on [0, 1] with maximum exactly 1.

    Hour-over-hour ratios are normal(mean_t, std_t), the first hour being
    relative to an implicit pre-horizon level of 1. A draw below
    MIN_HOURLY_RATIO is redrawn (at most MAX_REDRAWS times, then clamped) so
    the cumulative product stays positive.
    """
    ratios = np.empty(system.horizon)
    for t in range(system.horizon):
        mean = system.hourly_ratio_mean[t]
        std = system.hourly_ratio_std[t]
        v = float(rng.normal(mean, std))
        attempts = 0
        while v < MIN_HOURLY_RATIO and attempts < MAX_REDRAWS:
            v = float(rng.normal(mean, std))
            attempts += 1
        ratios[t] = max(v, MIN_HOURLY_RATIO)
    shape = np.cumprod(ratios)
    return shape / shape.max()


def generate_profile(system: PowerSystem, seed: int) -> DemandMatrix:
    """Deterministic demand profile for (system, seed).

    Draw order is fixed: peak, then bus shares, then hourly shape.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    peak = draw_peak_demand(system, rng)
    bus_factors = draw_bus_factors(system, rng)
    temporal = draw_temporal_factors(system, rng)
    return DemandMatrix.from_factors(peak, bus_factors, temporal)


_MASK64 = (1 << 64) - 1


def instance_seed(master_seed: int, index: int) -> int:
    """Sub-seed for instance `index` of a batch: SplitMix64 of the pair.

    z = master + (index+1) * golden; then two xor-shift-multiply rounds.
    Pure 64-bit integer arithmetic, so identical on every platform.
    """
    if index < 0:
        raise DataError("instance index must be >= 0")
    z = (master_seed + 0x9E3779B97F4A7C15 * (index + 1)) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def generate_batch(system: PowerSystem, n_instances: int, master_seed: int) -> list[Scenario]:
    """Generate `n_instances` scenarios with sub-seeds mixed from `master_seed`."""
    if n_instances < 0:
        raise DataError("n_instances must be >= 0")
    out = []
    for i in range(n_instances):
        seed = instance_seed(master_seed, i)
        out.append(Scenario(instance_id=i, seed=seed, demand=generate_profile(system, seed)))
    return out
