"""Leave-one-out evaluation of the nearest-neighbor strategy.

For each instance: pick the K nearest solved instances by demand distance,
re-solve the dispatch problem with the commitment frozen to each neighbor's,
keep the cheapest feasible cost, and score the suboptimality gap against the
instance's own exact solve plus the speedup under an idealized parallel run
(slowest of the K dispatches plus the neighbor-selection time).
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .commitment import SolverConfig
from .errors import DataError, UcbenchError
from .neighbors import InstanceRecord, NeighborSet, nearest_neighbors
from .opf import solve_opf
from .scenarios import Scenario, generate_batch
from .system import PowerSystem, PtdfMatrix, compute_ptdf
from .uc import solve_uc

log = logging.getLogger("ucbench")

#: Histogram bucket edges for the gap, in percent; the first bucket is
#: (-inf, 0.01) and the last [0.1, inf), all others half-open [lo, hi).
GAP_BUCKET_EDGES_PCT = (0.01, 0.02, 0.05, 0.1)

GAP_BUCKET_LABELS = ("<0.01%", "0.01-0.02%", "0.02-0.05%", "0.05-0.1%", ">0.1%")


@dataclass(frozen=True)
class NeighborOpfResult:
    """One neighbor's fixed-commitment dispatch outcome for a query."""

    neighbor_id: int
    feasible: bool
    objective: float | None
    solve_seconds: float


@dataclass(frozen=True)
class InstanceEval:
    """Gap and speedup of the neighbor strategy on one instance."""

    instance_id: int
    neighbor_set: NeighborSet
    opf_results: tuple[NeighborOpfResult, ...]
    best_cost: float | None
    gap: float | None
    speedup: float
    all_infeasible: bool


@dataclass(frozen=True)
class EvalReport:
    """Aggregate over one system's instances: headline gap/speedup numbers."""

    system_name: str
    n_instances: int
    mean_gap: float | None            # fraction, over instances with a gap
    max_gap: float | None
    histogram: tuple[int, int, int, int, int]
    n_infeasible: int
    mean_speedup: float

    def __post_init__(self):
        if sum(self.histogram) + self.n_infeasible != self.n_instances:
            raise DataError("histogram counts plus infeasible must equal n_instances")


def gap_bucket(gap: float) -> int:
    """Index of the histogram bucket holding `gap` (a fraction, not percent)."""
    pct = gap * 100.0
    for i, edge in enumerate(GAP_BUCKET_EDGES_PCT):
        if pct < edge:
            return i
    return len(GAP_BUCKET_EDGES_PCT)


def suboptimality_gap(best_cost: float, exact_cost: float) -> float:
    """Relative excess of the best neighbor dispatch over the exact solve."""
    return (best_cost - exact_cost) / exact_cost


def parallel_speedup(exact_seconds: float, opf_seconds, learn_seconds: float) -> float:
    """Exact solve time over the idealized parallel strategy time.

    The strategy time is the slowest of the K dispatch solves plus the
    neighbor-selection time, independent of actual execution order.
    """
    return exact_seconds / (max(opf_seconds) + learn_seconds)


def evaluate_instance(query_id: int, records: list[InstanceRecord], k: int,
                      system: PowerSystem, config: SolverConfig | None = None, *,
                      ptdf: PtdfMatrix | None = None, jobs: int = 1) -> InstanceEval:
    """Run the neighbor strategy for one query instance.

    The K dispatch solves are independent solver sessions; `jobs` caps how
    many run at once. The speedup always uses the slowest single dispatch
    plus the selection time, regardless of actual execution order.
    """
    config = config or SolverConfig()
    by_id = {r.instance_id: r for r in records}
    if query_id not in by_id:
        raise DataError(f"query instance {query_id} not in the record store")
    query = by_id[query_id]
    if ptdf is None and system.n_lines:
        ptdf = compute_ptdf(system)

    neighbor_set = nearest_neighbors(query_id, records, k)

    def run(neighbor_id: int) -> NeighborOpfResult:
        sol = solve_opf(system, query.demand, by_id[neighbor_id].commitment,
                        config, ptdf=ptdf)
        return NeighborOpfResult(
            neighbor_id=neighbor_id, feasible=sol.feasible,
            objective=sol.objective, solve_seconds=sol.solve_seconds)

    workers = max(1, min(jobs, len(neighbor_set)))
    if workers == 1:
        results = tuple(run(i) for i in neighbor_set.neighbor_ids)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = tuple(pool.map(run, neighbor_set.neighbor_ids))

    feasible = [(r.objective, r.neighbor_id) for r in results if r.feasible]
    best_cost = min(feasible)[0] if feasible else None
    gap = None
    if best_cost is not None:
        gap = suboptimality_gap(best_cost, query.objective)
    speedup = parallel_speedup(query.solve_seconds,
                               [r.solve_seconds for r in results],
                               neighbor_set.learn_seconds)
    return InstanceEval(
        instance_id=query_id,
        neighbor_set=neighbor_set,
        opf_results=results,
        best_cost=best_cost,
        gap=gap,
        speedup=speedup,
        all_infeasible=not feasible,
    )


def evaluate_all(records: list[InstanceRecord], k: int, system: PowerSystem,
                 config: SolverConfig | None = None, *,
                 jobs: int = 1) -> list[InstanceEval]:
    """Evaluate every record in the store with leave-one-out neighbors."""
    ptdf = compute_ptdf(system) if system.n_lines else None
    evals = []
    for r in records:
        ev = evaluate_instance(r.instance_id, records, k, system, config,
                               ptdf=ptdf, jobs=jobs)
        log.info("event=instance_evaluated id=%d gap=%s speedup=%.3f",
                 r.instance_id,
                 "none" if ev.gap is None else f"{ev.gap * 100:.6f}%",
                 ev.speedup)
        evals.append(ev)
    return evals


def aggregate(evals: list[InstanceEval], system_name: str = "") -> EvalReport:
    """Fold per-instance evaluations into the report row.

    Instances whose K dispatches were all infeasible are counted separately
    and excluded from the gap statistics and histogram.
    """
    if not evals:
        raise DataError("cannot aggregate an empty evaluation list")
    gaps = [e.gap for e in evals if e.gap is not None]
    counts = [0] * (len(GAP_BUCKET_EDGES_PCT) + 1)
    for g in gaps:
        counts[gap_bucket(g)] += 1
    return EvalReport(
        system_name=system_name,
        n_instances=len(evals),
        mean_gap=float(np.mean(gaps)) if gaps else None,
        max_gap=float(np.max(gaps)) if gaps else None,
        histogram=tuple(counts),
        n_infeasible=sum(1 for e in evals if e.all_infeasible),
        mean_speedup=float(np.mean([e.speedup for e in evals])),
    )


def solve_scenarios(system: PowerSystem, scenarios: list[Scenario],
                    config: SolverConfig | None = None, *,
                    existing: list[InstanceRecord] | None = None,
                    on_record=None) -> list[InstanceRecord]:
    """Solve each scenario exactly, producing the record set.

    Instance ids already present in `existing` are skipped, which makes a
    partially-written store resumable. Individual solve failures are logged
    and skipped; more than 10% failures aborts the run. `on_record` (if
    given) is called after each newly solved record, e.g. to persist it.
    """
    config = config or SolverConfig()
    have = {r.instance_id: r for r in (existing or [])}
    records = [have[s.instance_id] for s in scenarios if s.instance_id in have]
    failures = 0
    for scenario in scenarios:
        if scenario.instance_id in have:
            log.info("event=instance_skipped id=%d reason=already_solved",
                     scenario.instance_id)
            continue
        try:
            sol = solve_uc(system, scenario.demand, config)
        except UcbenchError as exc:
            failures += 1
            log.warning("event=instance_failed id=%d error=%r",
                        scenario.instance_id, exc)
            if failures > 0.1 * len(scenarios):
                raise UcbenchError(
                    f"{failures} of {len(scenarios)} instances failed to solve; "
                    "aborting dataset build") from exc
            continue
        record = InstanceRecord(
            instance_id=scenario.instance_id,
            demand=scenario.demand,
            commitment=sol.commitment,
            objective=sol.objective,
            solve_seconds=sol.solve_seconds,
        )
        records.append(record)
        if on_record is not None:
            on_record(record)
        log.info("event=instance_solved id=%d objective=%.6f seconds=%.3f",
                 scenario.instance_id, sol.objective, sol.solve_seconds)
    return records


def build_dataset(system: PowerSystem, n_instances: int, master_seed: int,
                  config: SolverConfig | None = None, *,
                  existing: list[InstanceRecord] | None = None,
                  on_record=None) -> list[InstanceRecord]:
    """Generate `n_instances` scenarios from `master_seed` and solve them all."""
    scenarios = generate_batch(system, n_instances, master_seed)
    return solve_scenarios(system, scenarios, config, existing=existing,
                           on_record=on_record)
