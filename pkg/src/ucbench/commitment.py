"""Commitment schedules, solver configuration, and unit on/off logic.

The on/off logic (minimum up/down times against initial conditions, startup
detection) lives here so the MILP builder, the fixed-commitment dispatch, and
the exhaustive oracle all agree on what a valid schedule is.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, LogicViolationError
from .system import Generator, PowerSystem


@dataclass(frozen=True, eq=False)
class CommitmentSchedule:
    """Binary generator-by-hour on/off matrix."""

    on: np.ndarray  # G x T, values in {0, 1}

    def __post_init__(self):
        a = np.asarray(self.on)
        if a.ndim != 2:
            raise DataError("commitment matrix must be 2-D (generators x hours)")
        if a.size and not np.isin(a, (0, 1)).all():
            raise DataError("commitment entries must be 0 or 1")
        a = a.astype(np.int8)
        a.setflags(write=False)
        object.__setattr__(self, "on", a)

    @property
    def n_generators(self) -> int:
        return self.on.shape[0]

    @property
    def n_hours(self) -> int:
        return self.on.shape[1]

    def __eq__(self, other):
        if not isinstance(other, CommitmentSchedule):
            return NotImplemented
        return np.array_equal(self.on, other.on)


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances and limits shared by the UC and dispatch solvers."""

    mip_gap: float = 1e-4            # relative, 0.01%
    time_limit_seconds: float = 600.0
    flow_violation_tol: float = 1e-4  # MW
    max_lazy_rounds: int = 50

    def __post_init__(self):
        if self.mip_gap < 0:
            raise DataError("mip_gap must be >= 0")
        if self.time_limit_seconds <= 0:
            raise DataError("time_limit_seconds must be > 0")
        if self.flow_violation_tol <= 0:
            raise DataError("flow_violation_tol must be > 0")
        if self.max_lazy_rounds < 1:
            raise DataError("max_lazy_rounds must be >= 1")


def forced_initial_hours(gen: Generator, horizon: int) -> tuple[int, int]:
    """Hours the unit must stay on / stay off at the start of the horizon."""
    if gen.initially_on:
        return min(horizon, max(0, gen.min_up - gen.initial_on_hours)), 0
    return 0, min(horizon, max(0, gen.min_down + gen.initial_on_hours))


def unit_pattern_violation(gen: Generator, row) -> str | None:
    """Check one unit's on/off pattern; return a description or None if valid.

    Runs truncated by the end of the horizon are allowed to be shorter than
    the minimum up/down time.
    """
    row = np.asarray(row)
    horizon = len(row)
    must_on, must_off = forced_initial_hours(gen, horizon)
    for t in range(must_on):
        if row[t] != 1:
            return f"must stay on through hour {must_on - 1} (initially on {gen.initial_on_hours}h)"
    for t in range(must_off):
        if row[t] != 0:
            return f"must stay off through hour {must_off - 1} (initially off {-gen.initial_on_hours}h)"
    prev = 1 if gen.initially_on else 0
    t = 0
    while t < horizon:
        run_start = t
        value = row[t]
        while t < horizon and row[t] == value:
            t += 1
        length = t - run_start
        starts_inside = not (run_start == 0 and value == prev)
        truncated = t == horizon
        if starts_inside and not truncated:
            if value == 1 and length < gen.min_up:
                return f"on-run of {length}h starting hour {run_start} < min_up {gen.min_up}h"
            if value == 0 and length < gen.min_down:
                return f"off-run of {length}h starting hour {run_start} < min_down {gen.min_down}h"
    return None


def validate_commitment(system: PowerSystem, schedule: CommitmentSchedule):
    """Raise LogicViolationError if the schedule breaks any unit's on/off rules."""
    g, t = schedule.on.shape
    if g != system.n_generators or t != system.horizon:
        raise DataError(
            f"commitment shape {(g, t)} does not match system ({system.n_generators}, {system.horizon})")
    for gi, gen in enumerate(system.generators):
        reason = unit_pattern_violation(gen, schedule.on[gi])
        if reason is not None:
            raise LogicViolationError(f"generator {gen.id}: {reason}",
                                      generator=gen.id)


def startup_indicators(system: PowerSystem, schedule: CommitmentSchedule) -> np.ndarray:
    """0/1 matrix marking hours where each unit switches from off to on."""
    on = schedule.on
    initial = np.array([1 if g.initially_on else 0 for g in system.generators],
                       dtype=np.int8)
    prev = np.concatenate([initial[:, None], on[:, :-1]], axis=1)
    return ((on == 1) & (prev == 0)).astype(np.int8)


def fixed_commitment_cost(system: PowerSystem, schedule: CommitmentSchedule) -> float:
    """Commitment-dependent constant cost: no-load hours plus startups."""
    starts = startup_indicators(system, schedule)
    no_load = np.array([g.no_load_cost for g in system.generators])
    startup = np.array([g.startup_cost for g in system.generators])
    return float(no_load @ schedule.on.sum(axis=1) + startup @ starts.sum(axis=1))
