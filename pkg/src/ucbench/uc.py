"""Unit commitment: build and solve the mixed-integer master problem.

The MILP minimizes production + no-load + startup cost subject to hourly
balance, output bounds tied to the commitment, minimum up/down times with
initial conditions, ramping with startup/shutdown limits, and lazily
generated transmission limits. Binaries are the on/off matrix plus a startup
indicator per unit and hour (shutdown is implied).

`brute_force_uc` is an independent check for tiny instances: it enumerates
every logic-valid commitment matrix and keeps the cheapest feasible dispatch.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass

import numpy as np

from .commitment import CommitmentSchedule, SolverConfig, forced_initial_hours, \
    unit_pattern_violation
from .cuts import solve_with_line_limits
from .errors import (DataError, EnumerationLimitError, InfeasibleError,
                     SolveLimitError, UcbenchError)
from .milp import LinearModel, SolveStatus
from .opf import _build_dispatch_lp
from .scenarios import DemandMatrix
from .system import PowerSystem, PtdfMatrix, compute_ptdf, _readonly

#: Upper bound on G*T for exhaustive enumeration.
ENUMERATION_LIMIT = 16


@dataclass(frozen=True, eq=False)
class UcSolution:
    """Commitment, dispatch, and solve metadata of one UC instance."""

    commitment: CommitmentSchedule
    dispatch: np.ndarray          # G x T, MW
    objective: float
    solve_seconds: float
    mip_gap_achieved: float
    lazy_rounds: int
    added_line_constraints: int
    round_objectives: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "dispatch", _readonly(self.dispatch))


def _check_dimensions(system: PowerSystem, demand: DemandMatrix):
    if demand.values.shape != (system.n_buses, system.horizon):
        raise DataError(
            f"demand shape {demand.values.shape} does not match system "
            f"({system.n_buses}, {system.horizon})")


def _capacity_screen(system: PowerSystem, demand: DemandMatrix):
    totals = demand.hourly_totals
    worst = int(np.argmax(totals))
    if totals[worst] > system.total_capacity + 1e-9:
        raise InfeasibleError(
            f"capacity shortfall at hour {worst}: demand {totals[worst]:.3f} MW "
            f"exceeds installed capacity {system.total_capacity:.3f} MW",
            hour=worst)


def _build_uc_model(system: PowerSystem, demand: DemandMatrix):
    """Master MILP. Returns (model, p_vars, u_vars, s_vars), each G x T."""
    n_gen, horizon = system.n_generators, system.horizon
    model = LinearModel()

    p_vars = model.add_variables(
        n_gen * horizon, lb=0.0, ub=np.repeat(system.p_max, horizon),
        cost=np.repeat(system.marginal_cost, horizon)).reshape(n_gen, horizon)
    u_vars = model.add_variables(
        n_gen * horizon, lb=0.0, ub=1.0, integer=True,
        cost=np.repeat([g.no_load_cost for g in system.generators], horizon)
    ).reshape(n_gen, horizon)
    s_vars = model.add_variables(
        n_gen * horizon, lb=0.0, ub=1.0, integer=True,
        cost=np.repeat([g.startup_cost for g in system.generators], horizon)
    ).reshape(n_gen, horizon)

    totals = demand.hourly_totals
    for t in range(horizon):
        model.add_constraint(p_vars[:, t], np.ones(n_gen), lb=totals[t], ub=totals[t])

    for gi, gen in enumerate(system.generators):
        u0 = 1 if gen.initially_on else 0
        p0 = gen.initial_power
        must_on, must_off = forced_initial_hours(gen, horizon)
        for t in range(must_on):
            model.set_variable_bounds(u_vars[gi, t], 1.0, 1.0)
        for t in range(must_off):
            model.set_variable_bounds(u_vars[gi, t], 0.0, 0.0)

        for t in range(horizon):
            p, u, s = p_vars[gi, t], u_vars[gi, t], s_vars[gi, t]
            # output window: pmin*u <= p <= pmax*u
            model.add_constraint([p, u], [1.0, -gen.p_max], ub=0.0)
            model.add_constraint([p, u], [1.0, -gen.p_min], lb=0.0)
            # startup indicator: s = 1 exactly on an off->on transition
            if t == 0:
                model.add_constraint([s, u], [1.0, -1.0], lb=-u0)
                model.add_constraint([s, u], [1.0, -1.0], ub=0.0)
                model.set_variable_bounds(s, 0.0, 1.0 - u0)
            else:
                u_prev = u_vars[gi, t - 1]
                model.add_constraint([s, u, u_prev], [1.0, -1.0, 1.0], lb=0.0)
                model.add_constraint([s, u], [1.0, -1.0], ub=0.0)
                model.add_constraint([s, u_prev], [1.0, 1.0], ub=1.0)
            # ramping with startup/shutdown limits
            if t == 0:
                # p0var - P0 <= RU*u0 + SU*(u - u0) + Pmax*(1 - u)
                model.add_constraint(
                    [p, u], [1.0, gen.p_max - gen.startup_limit],
                    ub=p0 + (gen.ramp_up - gen.startup_limit) * u0 + gen.p_max)
                # P0 - p0var <= RD*u + SD*(u0 - u)
                model.add_constraint(
                    [p, u], [-1.0, gen.shutdown_limit - gen.ramp_down],
                    ub=gen.shutdown_limit * u0 + gen.p_max * (1 - u0) - p0)
            else:
                p_prev = p_vars[gi, t - 1]
                u_prev = u_vars[gi, t - 1]
                model.add_constraint(
                    [p, p_prev, u_prev, u],
                    [1.0, -1.0, gen.startup_limit - gen.ramp_up,
                     gen.p_max - gen.startup_limit],
                    ub=gen.p_max)
                model.add_constraint(
                    [p_prev, p, u, u_prev],
                    [1.0, -1.0, gen.shutdown_limit - gen.ramp_down,
                     gen.p_max - gen.shutdown_limit],
                    ub=gen.p_max)
        # minimum up time: startups in the trailing window keep the unit on
        if gen.min_up > 1:
            for t in range(horizon):
                lo = max(0, t - gen.min_up + 1)
                window = list(s_vars[gi, lo:t + 1])
                model.add_constraint(window + [u_vars[gi, t]],
                                     [1.0] * len(window) + [-1.0], ub=0.0)
        # minimum down time: no startup within min_down hours of being on
        if gen.min_down > 1:
            for t in range(horizon):
                lo = max(0, t - gen.min_down + 1)
                window = list(s_vars[gi, lo:t + 1])
                if lo == 0:
                    model.add_constraint(window, [1.0] * len(window), ub=1.0 - u0)
                else:
                    model.add_constraint(window + [u_vars[gi, lo - 1]],
                                         [1.0] * len(window) + [1.0], ub=1.0)
    return model, p_vars, u_vars, s_vars


def solve_uc(system: PowerSystem, demand: DemandMatrix,
             config: SolverConfig | None = None, *, slack_bus: int = 0,
             lazy: bool = True, ptdf: PtdfMatrix | None = None) -> UcSolution:
    """Solve the UC instance to within `config.mip_gap` of the full optimum.

    Line limits are generated lazily unless `lazy=False`, in which case all
    of them are installed up front. Either way the returned dispatch is
    verified against the complete line set.
    """
    config = config or SolverConfig()
    _check_dimensions(system, demand)
    _capacity_screen(system, demand)

    start = time.perf_counter()
    deadline = start + config.time_limit_seconds
    if ptdf is None and system.n_lines:
        ptdf = compute_ptdf(system, slack_bus)
    model, p_vars, u_vars, s_vars = _build_uc_model(system, demand)
    outcome = solve_with_line_limits(model, p_vars, system, ptdf, demand, config,
                                     mip_gap=config.mip_gap, deadline=deadline,
                                     lazy=lazy)
    elapsed = time.perf_counter() - start
    result = outcome.result

    if result.status is SolveStatus.INFEASIBLE:
        pool = frozenset(outcome.pool)
        detail = f" with {len(pool)} line constraints active" if pool else ""
        raise InfeasibleError("solver proved the commitment problem infeasible"
                              + detail, line_pool=pool)
    if result.status is SolveStatus.LIMIT or not outcome.converged:
        partial = None
        if result.x is not None:
            partial = _extract_solution(system, result, p_vars, u_vars, outcome,
                                        elapsed)
        raise SolveLimitError(
            f"stopped after {outcome.rounds} rounds without convergence",
            partial=partial, gap=result.gap)
    if not result.ok:
        raise UcbenchError(f"solver ended with status {result.status.value}")
    return _extract_solution(system, result, p_vars, u_vars, outcome, elapsed)


def _extract_solution(system, result, p_vars, u_vars, outcome, elapsed) -> UcSolution:
    on = (result.x[u_vars] > 0.5).astype(np.int8)
    dispatch = np.maximum(result.x[p_vars], 0.0)
    dispatch[on == 0] = 0.0
    return UcSolution(
        commitment=CommitmentSchedule(on=on),
        dispatch=dispatch,
        objective=float(result.objective),
        solve_seconds=elapsed,
        mip_gap_achieved=float(result.gap) if result.gap is not None else 0.0,
        lazy_rounds=outcome.rounds,
        added_line_constraints=outcome.added_constraints,
        round_objectives=tuple(outcome.round_objectives),
    )


def _valid_unit_patterns(gen, horizon: int) -> list[tuple[int, ...]]:
    """All on/off rows for one unit that respect its up/down-time logic."""
    out = []
    for bits in itertools.product((0, 1), repeat=horizon):
        if unit_pattern_violation(gen, bits) is None:
            out.append(bits)
    return out


def brute_force_uc(system: PowerSystem, demand: DemandMatrix,
                   config: SolverConfig | None = None, *,
                   slack_bus: int = 0) -> UcSolution:
    """Exhaustive UC oracle for tiny instances (G*T <= 16).

    Enumerates every commitment matrix whose rows pass unit logic, solves the
    fixed-commitment dispatch LP for each (the same LP the OPF path uses),
    and returns the cheapest feasible one with zero gap.
    """
    config = config or SolverConfig()
    _check_dimensions(system, demand)
    n_gen, horizon = system.n_generators, system.horizon
    if n_gen * horizon > ENUMERATION_LIMIT:
        raise EnumerationLimitError(
            f"G*T = {n_gen * horizon} exceeds enumeration limit {ENUMERATION_LIMIT}")

    start = time.perf_counter()
    deadline = start + config.time_limit_seconds
    ptdf = compute_ptdf(system, slack_bus) if system.n_lines else None
    per_gen = [_valid_unit_patterns(g, horizon) for g in system.generators]
    totals = demand.hourly_totals
    p_max = system.p_max
    p_min = system.p_min
    no_load = np.array([g.no_load_cost for g in system.generators])
    startup = np.array([g.startup_cost for g in system.generators])
    initial_on = np.array([1 if g.initially_on else 0 for g in system.generators])

    best = None
    for rows in itertools.product(*per_gen):
        on = np.array(rows, dtype=np.int8)
        committed_max = p_max @ on
        if np.any(committed_max < totals - 1e-9):
            continue
        committed_min = p_min @ on
        if np.any(committed_min > totals + 1e-9):
            continue
        if time.perf_counter() > deadline:
            raise SolveLimitError("enumeration exceeded the time limit",
                                  partial=best[1] if best else None)
        model, p_vars = _build_dispatch_lp(system, demand, on)
        outcome = solve_with_line_limits(model, p_vars, system, ptdf, demand,
                                         config, mip_gap=None, deadline=deadline)
        result = outcome.result
        if result.status is SolveStatus.INFEASIBLE:
            continue
        if not result.ok or not outcome.converged:
            raise SolveLimitError("dispatch LP did not converge during enumeration",
                                  gap=result.gap)
        prev = np.concatenate([initial_on[:, None], on[:, :-1]], axis=1)
        starts = (on == 1) & (prev == 0)
        fixed_cost = float(no_load @ on.sum(axis=1) + startup @ starts.sum(axis=1))
        objective = float(result.objective) + fixed_cost
        if best is None or objective < best[0]:
            dispatch = np.maximum(result.x[p_vars], 0.0)
            dispatch[on == 0] = 0.0
            best = (objective, UcSolution(
                commitment=CommitmentSchedule(on=on.copy()),
                dispatch=dispatch,
                objective=objective,
                solve_seconds=0.0,
                mip_gap_achieved=0.0,
                lazy_rounds=outcome.rounds,
                added_line_constraints=outcome.added_constraints,
            ))
    if best is None:
        raise InfeasibleError("every logic-valid commitment is dispatch-infeasible")
    solution = best[1]
    object.__setattr__(solution, "solve_seconds", time.perf_counter() - start)
    return solution
