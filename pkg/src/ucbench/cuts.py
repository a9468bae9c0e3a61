"""Constraint generation for transmission limits.

Both the UC master problem and the fixed-commitment dispatch start without
any line constraints. After each solve, flows on every line and hour are
recomputed from the incumbent dispatch through the PTDF; each limit violated
by more than the tolerance contributes one ranged row, and the model is
re-solved until no violation remains (or the round budget runs out).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .commitment import SolverConfig
from .errors import NumericalError
from .milp import LinearModel, SolveResult, SolveStatus
from .scenarios import DemandMatrix
from .system import PowerSystem, PtdfMatrix

#: PTDF coefficients below this are dropped from generated rows.
COEFFICIENT_DROP_TOL = 1e-11


@dataclass
class LazyLoopOutcome:
    """Final solve result plus the audit trail of the constraint loop."""

    result: SolveResult
    rounds: int
    added_constraints: int
    round_objectives: list[float] = field(default_factory=list)
    pool: set = field(default_factory=set)
    converged: bool = False


def _flow_terms(system: PowerSystem, ptdf: PtdfMatrix, demand: DemandMatrix):
    """Per-generator PTDF columns (L x G) and fixed demand offsets (L x T)."""
    gen_cols = ptdf.entries[:, system.generator_bus] if system.n_generators else \
        np.zeros((ptdf.n_lines, 0))
    offsets = ptdf.entries @ demand.values
    return gen_cols, offsets


def solve_with_line_limits(model: LinearModel, p_vars: np.ndarray,
                           system: PowerSystem, ptdf: PtdfMatrix | None,
                           demand: DemandMatrix, config: SolverConfig, *,
                           mip_gap: float | None, deadline: float,
                           lazy: bool = True) -> LazyLoopOutcome:
    """Solve `model`, generating violated line-limit rows until none remain.

    `p_vars` is the G x T array of dispatch variable indices. With
    `lazy=False` every line row is installed before the first solve; the
    post-solve flow check still runs, so the returned outcome is verified
    against the full line set either way.
    """
    outcome = LazyLoopOutcome(result=None, rounds=0, added_constraints=0)
    if ptdf is None or ptdf.n_lines == 0:
        outcome.result = model.solve(mip_gap=mip_gap,
                                     time_limit=deadline - time.perf_counter())
        outcome.rounds = 1
        if outcome.result.ok:
            outcome.round_objectives.append(outcome.result.objective)
            outcome.converged = True
        return outcome

    gen_cols, offsets = _flow_terms(system, ptdf, demand)
    limits = system.line_limits
    horizon = p_vars.shape[1]

    def add_row(line: int, hour: int):
        coef = gen_cols[line]
        keep = np.abs(coef) > COEFFICIENT_DROP_TOL
        off = offsets[line, hour]
        model.add_constraint(p_vars[:, hour][keep], coef[keep],
                             lb=off - limits[line], ub=off + limits[line])
        outcome.pool.add((line, hour))
        outcome.added_constraints += 1

    if not lazy:
        for line in range(ptdf.n_lines):
            for hour in range(horizon):
                add_row(line, hour)

    max_rounds = config.max_lazy_rounds
    while True:
        outcome.rounds += 1
        budget = deadline - time.perf_counter()
        if budget <= 0:
            outcome.result = SolveResult(status=SolveStatus.LIMIT, x=None,
                                         objective=None, best_bound=None, gap=None)
            return outcome
        result = model.solve(mip_gap=mip_gap, time_limit=budget)
        outcome.result = result
        if not result.ok:
            return outcome
        outcome.round_objectives.append(result.objective)

        dispatch = result.x[p_vars]
        flows = gen_cols @ dispatch - offsets
        excess = np.abs(flows) - limits[:, None]
        violated = np.argwhere(excess > config.flow_violation_tol)
        new_pairs = [(int(l), int(t)) for l, t in violated
                     if (int(l), int(t)) not in outcome.pool]
        if violated.size and not new_pairs:
            raise NumericalError(
                "line limits already enforced still violated beyond tolerance; "
                f"worst excess {float(excess.max()):.3e} MW")
        if not new_pairs:
            outcome.converged = True
            return outcome
        if outcome.rounds >= max_rounds:
            outcome.result = SolveResult(status=SolveStatus.LIMIT, x=result.x,
                                         objective=result.objective,
                                         best_bound=result.best_bound,
                                         gap=result.gap)
            return outcome
        for line, hour in new_pairs:
            add_row(line, hour)
