"""Thin vendor-neutral backend for linear and mixed-integer linear programs.

Models are built incrementally (variables, ranged linear constraints, linear
objective) and solved through the HiGHS engine shipped with scipy; nothing
here needs a commercial license. A model may be re-solved after appending
constraints, which is how the lazy transmission loop works.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.optimize import Bounds, LinearConstraint, milp


class SolveStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    LIMIT = "limit"          # time or node limit before proving optimality
    ERROR = "error"


_STATUS_FROM_SCIPY = {
    0: SolveStatus.OPTIMAL,
    1: SolveStatus.LIMIT,
    2: SolveStatus.INFEASIBLE,
    3: SolveStatus.UNBOUNDED,
    4: SolveStatus.ERROR,
}


@dataclass
class SolveResult:
    """Outcome of one solve: incumbent (if any), objective, bound and gap."""

    status: SolveStatus
    x: np.ndarray | None
    objective: float | None
    best_bound: float | None
    gap: float | None

    @property
    def ok(self) -> bool:
        return self.status is SolveStatus.OPTIMAL


class LinearModel:
    """Incremental builder for a single LP/MILP solved by HiGHS."""

    def __init__(self):
        self._lb: list[float] = []
        self._ub: list[float] = []
        self._integer: list[bool] = []
        self._cost: list[float] = []
        self._row_idx: list[np.ndarray] = []
        self._row_coef: list[np.ndarray] = []
        self._row_lb: list[float] = []
        self._row_ub: list[float] = []

    @property
    def num_variables(self) -> int:
        return len(self._lb)

    @property
    def num_constraints(self) -> int:
        return len(self._row_lb)

    def add_variable(self, lb: float = 0.0, ub: float = np.inf, *,
                     integer: bool = False, cost: float = 0.0) -> int:
        self._lb.append(lb)
        self._ub.append(ub)
        self._integer.append(integer)
        self._cost.append(cost)
        return len(self._lb) - 1

    def add_variables(self, n: int, lb=0.0, ub=np.inf, *, integer: bool = False,
                      cost=0.0) -> np.ndarray:
        """Append `n` variables; scalar or per-variable lb/ub/cost."""
        lbs = np.broadcast_to(np.asarray(lb, dtype=float), (n,))
        ubs = np.broadcast_to(np.asarray(ub, dtype=float), (n,))
        costs = np.broadcast_to(np.asarray(cost, dtype=float), (n,))
        start = len(self._lb)
        self._lb.extend(lbs.tolist())
        self._ub.extend(ubs.tolist())
        self._integer.extend([integer] * n)
        self._cost.extend(costs.tolist())
        return np.arange(start, start + n)

    def set_variable_bounds(self, index: int, lb: float, ub: float):
        self._lb[index] = lb
        self._ub[index] = ub

    def add_constraint(self, indices, coefficients, lb: float = -np.inf,
                       ub: float = np.inf) -> int:
        """Append the ranged row  lb <= sum(coefficients * x[indices]) <= ub."""
        idx = np.asarray(indices, dtype=int)
        coef = np.asarray(coefficients, dtype=float)
        if idx.shape != coef.shape:
            raise ValueError("indices and coefficients must have the same length")
        self._row_idx.append(idx)
        self._row_coef.append(coef)
        self._row_lb.append(lb)
        self._row_ub.append(ub)
        return len(self._row_lb) - 1

    def _assemble(self):
        n = self.num_variables
        m = self.num_constraints
        if m == 0:
            return None
        rows = np.repeat(np.arange(m), [len(ix) for ix in self._row_idx])
        cols = np.concatenate(self._row_idx) if m else np.empty(0, dtype=int)
        data = np.concatenate(self._row_coef) if m else np.empty(0)
        a = sp.csc_matrix((data, (rows, cols)), shape=(m, n))
        return LinearConstraint(a, np.asarray(self._row_lb), np.asarray(self._row_ub))

    def solve(self, *, mip_gap: float | None = None,
              time_limit: float | None = None) -> SolveResult:
        """Solve the current model; safe to call again after adding rows."""
        n = self.num_variables
        if n == 0:
            raise ValueError("model has no variables")
        integrality = np.array(self._integer, dtype=np.uint8)
        is_mip = bool(integrality.any())
        options: dict = {"presolve": True}
        if mip_gap is not None and is_mip:
            options["mip_rel_gap"] = float(mip_gap)
        if time_limit is not None:
            options["time_limit"] = max(float(time_limit), 1e-3)
        constraint = self._assemble()
        res = milp(
            c=np.asarray(self._cost),
            constraints=[constraint] if constraint is not None else None,
            integrality=integrality,
            bounds=Bounds(np.asarray(self._lb), np.asarray(self._ub)),
            options=options,
        )
        status = _STATUS_FROM_SCIPY.get(res.status, SolveStatus.ERROR)
        x = np.asarray(res.x, dtype=float) if res.x is not None else None
        objective = float(res.fun) if res.fun is not None else None
        if is_mip:
            bound = getattr(res, "mip_dual_bound", None)
            gap = getattr(res, "mip_gap", None)
            bound = float(bound) if bound is not None else None
            gap = float(gap) if gap is not None else None
        else:
            bound = objective
            gap = 0.0 if status is SolveStatus.OPTIMAL else None
        return SolveResult(status=status, x=x, objective=objective,
                           best_bound=bound, gap=gap)
