"""Dispatch with the commitment frozen: the continuous problem left once
every on/off decision is fixed.

The LP minimizes production cost under balance, output bounds, ramping, and
(lazily generated) line limits. The returned objective adds the
commitment-dependent constants (no-load hours and startups computed
arithmetically from the schedule), so it is directly comparable to the
objective of the full unit-commitment solve.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .commitment import (CommitmentSchedule, SolverConfig, fixed_commitment_cost,
                         validate_commitment)
from .cuts import solve_with_line_limits
from .errors import DataError, SolveLimitError, UcbenchError
from .milp import LinearModel, SolveStatus
from .scenarios import DemandMatrix
from .system import PowerSystem, PtdfMatrix, compute_ptdf, _readonly


@dataclass(frozen=True, eq=False)
class OpfSolution:
    """Result of one fixed-commitment dispatch.

    `objective` includes the no-load and startup constants of the fixed
    schedule; it is None when `feasible` is False (solve time is still
    recorded).
    """

    feasible: bool
    dispatch: np.ndarray | None
    objective: float | None
    solve_seconds: float
    lazy_rounds: int = 1
    added_line_constraints: int = 0

    def __post_init__(self):
        if self.dispatch is not None:
            object.__setattr__(self, "dispatch", _readonly(self.dispatch))


def _build_dispatch_lp(system: PowerSystem, demand: DemandMatrix,
                       on: np.ndarray) -> tuple[LinearModel, np.ndarray]:
    """LP over dispatch variables only, with the commitment as constants."""
    n_gen, horizon = on.shape
    model = LinearModel()
    p_min = system.p_min
    p_max = system.p_max
    lb = (on * p_min[:, None]).ravel()
    ub = (on * p_max[:, None]).ravel()
    cost = np.repeat(system.marginal_cost, horizon)
    p_vars = model.add_variables(n_gen * horizon, lb=lb, ub=ub, cost=cost)
    p_vars = p_vars.reshape(n_gen, horizon)

    totals = demand.hourly_totals
    for t in range(horizon):
        model.add_constraint(p_vars[:, t], np.ones(n_gen), lb=totals[t], ub=totals[t])

    for gi, gen in enumerate(system.generators):
        u0 = 1 if gen.initially_on else 0
        p0 = gen.initial_power
        for t in range(horizon):
            u_now = int(on[gi, t])
            u_prev = u0 if t == 0 else int(on[gi, t - 1])
            if u_now == 0 and u_prev == 0:
                continue
            p_prev_var = None if t == 0 else p_vars[gi, t - 1]
            # ramp up: p_t - p_{t-1} <= RU*u_prev + SU*(u_now - u_prev) + Pmax*(1 - u_now)
            up_rhs = (gen.ramp_up * u_prev + gen.startup_limit * (u_now - u_prev)
                      + gen.p_max * (1 - u_now))
            # ramp down: p_{t-1} - p_t <= RD*u_now + SD*(u_prev - u_now) + Pmax*(1 - u_prev)
            down_rhs = (gen.ramp_down * u_now + gen.shutdown_limit * (u_prev - u_now)
                        + gen.p_max * (1 - u_prev))
            if t == 0:
                model.add_constraint([p_vars[gi, t]], [1.0], ub=up_rhs + p0)
                model.add_constraint([p_vars[gi, t]], [-1.0], ub=down_rhs - p0)
            else:
                model.add_constraint([p_vars[gi, t], p_prev_var], [1.0, -1.0], ub=up_rhs)
                model.add_constraint([p_vars[gi, t], p_prev_var], [-1.0, 1.0], ub=down_rhs)
    return model, p_vars


def solve_opf(system: PowerSystem, demand: DemandMatrix,
              fixed: CommitmentSchedule, config: SolverConfig | None = None, *,
              ptdf: PtdfMatrix | None = None, slack_bus: int = 0,
              validate: bool = True) -> OpfSolution:
    """Solve the dispatch LP for `demand` with commitments frozen to `fixed`.

    A schedule that violates unit on/off logic raises LogicViolationError
    (bad input, not a benchmark outcome). An LP that cannot serve the demand
    under this schedule returns feasible=False.
    """
    config = config or SolverConfig()
    if demand.values.shape != (system.n_buses, system.horizon):
        raise DataError(
            f"demand shape {demand.values.shape} does not match system "
            f"({system.n_buses}, {system.horizon})")
    if validate:
        validate_commitment(system, fixed)

    start = time.perf_counter()
    deadline = start + config.time_limit_seconds
    on = fixed.on

    # quick screens: committed capacity must straddle every hourly total
    committed_max = system.p_max @ on
    committed_min = system.p_min @ on
    totals = demand.hourly_totals
    if np.any(committed_max < totals - 1e-9) or np.any(committed_min > totals + 1e-9):
        return OpfSolution(feasible=False, dispatch=None, objective=None,
                           solve_seconds=time.perf_counter() - start)

    if ptdf is None and system.n_lines:
        ptdf = compute_ptdf(system, slack_bus)
    model, p_vars = _build_dispatch_lp(system, demand, on)
    outcome = solve_with_line_limits(model, p_vars, system, ptdf, demand, config,
                                     mip_gap=None, deadline=deadline)
    elapsed = time.perf_counter() - start
    result = outcome.result
    if result.status is SolveStatus.INFEASIBLE:
        return OpfSolution(feasible=False, dispatch=None, objective=None,
                           solve_seconds=elapsed, lazy_rounds=outcome.rounds,
                           added_line_constraints=outcome.added_constraints)
    if result.status is SolveStatus.LIMIT:
        raise SolveLimitError("dispatch LP hit its time or round limit",
                              gap=result.gap)
    if not result.ok:
        raise UcbenchError(f"dispatch LP ended with status {result.status.value}")

    dispatch = np.maximum(result.x[p_vars], 0.0)
    objective = float(result.objective) + fixed_commitment_cost(system, fixed)
    return OpfSolution(feasible=True, dispatch=dispatch, objective=objective,
                       solve_seconds=elapsed, lazy_rounds=outcome.rounds,
                       added_line_constraints=outcome.added_constraints)
