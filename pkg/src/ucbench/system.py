"""Static power-system data model and DC network sensitivities.

The grid is described by buses, thermal generators and transmission lines.
Line flows are modeled with the DC approximation through a PTDF (power
transfer distribution factor) matrix, so the dispatch problems never carry
voltage-angle variables and line limits can be generated lazily.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import DataError, NumericalError, StructuralError, UnbalancedInjectionError

#: Default hour-over-hour demand ratios for a 24-hour horizon: overnight sag,
#: morning ramp, flat afternoon, evening peak around hour 20, late decline.
DEFAULT_HOURLY_RATIO_MEAN = (
    0.95, 0.93, 0.95, 0.97, 1.02, 1.06, 1.10, 1.08,
    1.03, 1.01, 1.00, 0.99, 0.98, 0.99, 1.00, 1.01,
    1.03, 1.06, 1.05, 1.01, 0.97, 0.94, 0.92, 0.95,
)

#: Default spread of the hour-over-hour ratios.
DEFAULT_HOURLY_RATIO_STD = (0.05,) * 24

#: Injections passed to `line_flows` must sum to zero within this (MW).
INJECTION_BALANCE_TOL = 1e-6


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Bus:
    """One network node.

    `nominal_load_share` is the bus's share of system demand before the
    per-scenario randomization; shares need not sum to one (they are
    renormalized by the scenario generator).
    """

    id: int
    nominal_load_share: float

    def __post_init__(self):
        if self.nominal_load_share < 0:
            raise DataError(f"bus {self.id}: nominal_load_share must be >= 0")


@dataclass(frozen=True)
class Generator:
    """One thermal unit with standard commitment data.

    `initial_on_hours` is signed: positive means the unit enters the horizon
    having already been on that many hours, negative means off that many
    hours. `initial_power` is its output in the hour before the horizon
    (zero unless initially on).
    """

    id: int
    bus: int
    p_min: float
    p_max: float
    marginal_cost: float
    no_load_cost: float = 0.0
    startup_cost: float = 0.0
    min_up: int = 1
    min_down: int = 1
    ramp_up: float | None = None
    ramp_down: float | None = None
    startup_limit: float | None = None
    shutdown_limit: float | None = None
    initial_on_hours: int | None = None
    initial_power: float = 0.0

    def __post_init__(self):
        # Unset initial state means off just long enough to be free to start.
        if self.initial_on_hours is None:
            object.__setattr__(self, "initial_on_hours", -self.min_down)
        # Unset operating limits default to the loosest value allowed.
        if self.ramp_up is None:
            object.__setattr__(self, "ramp_up", self.p_max)
        if self.ramp_down is None:
            object.__setattr__(self, "ramp_down", self.p_max)
        if self.startup_limit is None:
            object.__setattr__(self, "startup_limit", self.p_max)
        if self.shutdown_limit is None:
            object.__setattr__(self, "shutdown_limit", self.p_max)
        g = f"generator {self.id}"
        if not 0 <= self.p_min <= self.p_max:
            raise DataError(f"{g}: need 0 <= p_min <= p_max")
        if self.marginal_cost < 0 or self.no_load_cost < 0 or self.startup_cost < 0:
            raise DataError(f"{g}: costs must be >= 0")
        if self.min_up < 1 or self.min_down < 1:
            raise DataError(f"{g}: min_up and min_down must be >= 1 hour")
        if self.ramp_up <= 0 or self.ramp_down <= 0:
            raise DataError(f"{g}: ramp rates must be > 0")
        if not self.p_min <= self.startup_limit <= self.p_max:
            raise DataError(f"{g}: need p_min <= startup_limit <= p_max")
        if not self.p_min <= self.shutdown_limit <= self.p_max:
            raise DataError(f"{g}: need p_min <= shutdown_limit <= p_max")
        if self.initial_on_hours == 0:
            raise DataError(f"{g}: initial_on_hours cannot be 0 (sign carries on/off)")
        if self.initial_on_hours > 0:
            if not self.p_min <= self.initial_power <= self.p_max:
                raise DataError(f"{g}: initially-on unit needs p_min <= initial_power <= p_max")
        elif self.initial_power != 0.0:
            raise DataError(f"{g}: initially-off unit must have initial_power = 0")

    @property
    def initially_on(self) -> bool:
        return self.initial_on_hours > 0


@dataclass(frozen=True)
class Line:
    """One transmission line under the DC approximation."""

    id: int
    from_bus: int
    to_bus: int
    reactance: float
    flow_limit: float

    def __post_init__(self):
        if self.from_bus == self.to_bus:
            raise DataError(f"line {self.id}: from_bus and to_bus must differ")
        if self.reactance <= 0:
            raise DataError(f"line {self.id}: reactance must be > 0")
        if self.flow_limit <= 0:
            raise DataError(f"line {self.id}: flow_limit must be > 0")


@dataclass(frozen=True)
class PowerSystem:
    """Immutable grid description shared by every solver and generator.

    `hourly_ratio_mean` / `hourly_ratio_std` parameterize the hour-over-hour
    demand ratio used by the scenario generator; they must match `horizon`.
    """

    buses: tuple[Bus, ...]
    generators: tuple[Generator, ...]
    lines: tuple[Line, ...]
    hourly_ratio_mean: tuple[float, ...] = DEFAULT_HOURLY_RATIO_MEAN
    hourly_ratio_std: tuple[float, ...] = DEFAULT_HOURLY_RATIO_STD
    horizon: int = 24
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "buses", tuple(self.buses))
        object.__setattr__(self, "generators", tuple(self.generators))
        object.__setattr__(self, "lines", tuple(self.lines))
        object.__setattr__(self, "hourly_ratio_mean", tuple(float(x) for x in self.hourly_ratio_mean))
        object.__setattr__(self, "hourly_ratio_std", tuple(float(x) for x in self.hourly_ratio_std))
        n = self.n_buses
        if n == 0:
            raise DataError("system has no buses")
        if [b.id for b in self.buses] != list(range(n)):
            raise DataError("bus ids must be unique and contiguous 0..B-1")
        if sum(b.nominal_load_share for b in self.buses) <= 0:
            raise DataError("total nominal_load_share must be > 0")
        for g in self.generators:
            if not 0 <= g.bus < n:
                raise DataError(f"generator {g.id} references missing bus {g.bus}")
        for ln in self.lines:
            if not (0 <= ln.from_bus < n and 0 <= ln.to_bus < n):
                raise DataError(f"line {ln.id} references a missing bus")
        if self.horizon < 1:
            raise DataError("horizon must be >= 1 hour")
        if len(self.hourly_ratio_mean) != self.horizon or len(self.hourly_ratio_std) != self.horizon:
            raise DataError("hourly_ratio_mean/std lengths must equal horizon")
        if any(s < 0 for s in self.hourly_ratio_std):
            raise DataError("hourly_ratio_std entries must be >= 0")
        self._check_connected()

    def _check_connected(self):
        n = self.n_buses
        if n == 1:
            return
        rows = [ln.from_bus for ln in self.lines] + [ln.to_bus for ln in self.lines]
        cols = [ln.to_bus for ln in self.lines] + [ln.from_bus for ln in self.lines]
        adj = sp.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
        n_comp, _ = connected_components(adj, directed=False)
        if n_comp != 1:
            raise StructuralError(f"network is disconnected ({n_comp} components)")

    @property
    def n_buses(self) -> int:
        return len(self.buses)

    @property
    def n_generators(self) -> int:
        return len(self.generators)

    @property
    def n_lines(self) -> int:
        return len(self.lines)

    @cached_property
    def total_capacity(self) -> float:
        """Sum of generator p_max in MW."""
        return float(sum(g.p_max for g in self.generators))

    @cached_property
    def generator_bus(self) -> np.ndarray:
        """Bus index of each generator, shape (G,)."""
        a = np.array([g.bus for g in self.generators], dtype=int)
        a.setflags(write=False)
        return a

    @cached_property
    def p_min(self) -> np.ndarray:
        return _readonly([g.p_min for g in self.generators])

    @cached_property
    def p_max(self) -> np.ndarray:
        return _readonly([g.p_max for g in self.generators])

    @cached_property
    def marginal_cost(self) -> np.ndarray:
        return _readonly([g.marginal_cost for g in self.generators])

    @cached_property
    def line_limits(self) -> np.ndarray:
        return _readonly([ln.flow_limit for ln in self.lines])

    @cached_property
    def nominal_load_shares(self) -> np.ndarray:
        return _readonly([b.nominal_load_share for b in self.buses])


@dataclass(frozen=True)
class PtdfMatrix:
    """Linear map from balanced bus injections (MW) to line flows (MW).

    The slack-bus column is identically zero; flows of any balanced injection
    are invariant to the slack choice.
    """

    entries: np.ndarray
    slack_bus: int

    def __post_init__(self):
        object.__setattr__(self, "entries", _readonly(self.entries))
        if self.entries.ndim != 2:
            raise DataError("PTDF entries must be a 2-D (lines x buses) matrix")
        if not (0 <= self.slack_bus < self.entries.shape[1]):
            raise DataError("slack_bus outside bus range")
        if self.entries.size and np.any(self.entries[:, self.slack_bus] != 0.0):
            raise DataError("PTDF slack column must be all zeros")

    @property
    def n_lines(self) -> int:
        return self.entries.shape[0]

    @property
    def n_buses(self) -> int:
        return self.entries.shape[1]


def merge_parallel_lines(lines) -> tuple[Line, ...]:
    """Collapse lines sharing the same bus pair into one equivalent line.

    Susceptances (1/x) add; flow limits add. Orientation follows the first
    line seen for each pair. Line ids are renumbered 0..L-1.
    """
    groups: dict[tuple[int, int], list[Line]] = {}
    order: list[tuple[int, int]] = []
    for ln in lines:
        key = (min(ln.from_bus, ln.to_bus), max(ln.from_bus, ln.to_bus))
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(ln)
    merged = []
    for i, key in enumerate(order):
        group = groups[key]
        first = group[0]
        if len(group) == 1:
            merged.append(first if first.id == i else Line(
                id=i, from_bus=first.from_bus, to_bus=first.to_bus,
                reactance=first.reactance, flow_limit=first.flow_limit))
            continue
        susceptance = sum(1.0 / ln.reactance for ln in group)
        limit = sum(ln.flow_limit for ln in group)
        merged.append(Line(id=i, from_bus=first.from_bus, to_bus=first.to_bus,
                           reactance=1.0 / susceptance, flow_limit=limit))
    return tuple(merged)


def compute_ptdf(system: PowerSystem, slack: int = 0) -> PtdfMatrix:
    """Compute the PTDF matrix of `system` for the given slack bus.

    Flows follow each line's from->to orientation: a positive entry means
    injection at that bus pushes power from `from_bus` toward `to_bus`.
    """
    n, m = system.n_buses, system.n_lines
    if not 0 <= slack < n:
        raise DataError(f"slack bus {slack} outside bus range 0..{n - 1}")
    if m == 0:
        return PtdfMatrix(entries=np.zeros((0, n)), slack_bus=slack)
    system._check_connected()

    susceptance = np.array([1.0 / ln.reactance for ln in system.lines])
    incidence = np.zeros((m, n))
    for i, ln in enumerate(system.lines):
        incidence[i, ln.from_bus] = 1.0
        incidence[i, ln.to_bus] = -1.0
    weighted = susceptance[:, None] * incidence          # L x B
    bbus = incidence.T @ weighted                        # B x B Laplacian
    keep = [b for b in range(n) if b != slack]
    reduced = bbus[np.ix_(keep, keep)]
    try:
        # reduced is symmetric, so solve against the transposed RHS directly
        block = np.linalg.solve(reduced, weighted[:, keep].T).T
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"singular reduced susceptance matrix: {exc}") from exc
    entries = np.zeros((m, n))
    entries[:, keep] = block
    return PtdfMatrix(entries=entries, slack_bus=slack)


def line_flows(ptdf: PtdfMatrix, injections) -> np.ndarray:
    """Map a balanced per-bus injection vector (MW) to per-line flows (MW)."""
    inj = np.asarray(injections, dtype=float)
    if inj.shape != (ptdf.n_buses,):
        raise DataError(f"expected {ptdf.n_buses} bus injections, got shape {inj.shape}")
    imbalance = float(inj.sum())
    if abs(imbalance) > INJECTION_BALANCE_TOL:
        raise UnbalancedInjectionError(
            f"injections sum to {imbalance:.3e} MW; must balance within {INJECTION_BALANCE_TOL} MW")
    return ptdf.entries @ inj


def bus_injections(system: PowerSystem, dispatch: np.ndarray, demand_values: np.ndarray) -> np.ndarray:
    """Net per-bus injections (B x T) for a dispatch (G x T) against demand (B x T)."""
    inj = -np.asarray(demand_values, dtype=float).copy()
    np.add.at(inj, system.generator_bus, np.asarray(dispatch, dtype=float))
    return inj
