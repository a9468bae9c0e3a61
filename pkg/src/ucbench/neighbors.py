"""Nearest-neighbor selection over solved instances.

Distances are plain Euclidean norms between flattened bus-by-hour demand
matrices in MW, computed by brute force: record stores are small (hundreds of
instances), and an honest learning time matters more than asymptotics.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .commitment import CommitmentSchedule
from .errors import DataError
from .scenarios import DemandMatrix


@dataclass(frozen=True)
class InstanceRecord:
    """One solved instance: its demand, commitment, cost, and solve time."""

    instance_id: int
    demand: DemandMatrix
    commitment: CommitmentSchedule
    objective: float
    solve_seconds: float


@dataclass(frozen=True)
class NeighborSet:
    """Ordered nearest neighbors of one query instance (leave-one-out)."""

    query_id: int
    neighbor_ids: tuple[int, ...]
    distances: tuple[float, ...]
    learn_seconds: float
    truncated: bool = False

    def __post_init__(self):
        if self.query_id in self.neighbor_ids:
            raise DataError("query instance cannot be its own neighbor")
        if len(self.neighbor_ids) != len(self.distances):
            raise DataError("neighbor_ids and distances lengths differ")
        if any(b < a for a, b in zip(self.distances, self.distances[1:])):
            raise DataError("distances must be non-decreasing")

    def __len__(self) -> int:
        return len(self.neighbor_ids)


def demand_distance(a: DemandMatrix, b: DemandMatrix) -> float:
    """Euclidean norm of the elementwise difference of two demand matrices."""
    if a.values.shape != b.values.shape:
        raise DataError(f"demand shapes differ: {a.values.shape} vs {b.values.shape}")
    return float(np.linalg.norm((a.values - b.values).ravel()))


def nearest_neighbors(query_id: int, records: list[InstanceRecord],
                      k: int) -> NeighborSet:
    """The k records closest to the query, excluding the query itself.

    Ties break toward the lower instance id. If k exceeds the candidate pool
    it is truncated to |records| - 1 and the result is flagged. The recorded
    learning time covers distance computation and selection.
    """
    if k < 1:
        raise DataError("k must be >= 1")
    if len(records) < 2:
        raise DataError("need at least 2 records for leave-one-out selection")
    by_id = {r.instance_id: r for r in records}
    if query_id not in by_id:
        raise DataError(f"query instance {query_id} not in the record store")

    start = time.perf_counter()
    query = by_id[query_id]
    ranked = sorted(
        ((demand_distance(query.demand, r.demand), r.instance_id)
         for r in records if r.instance_id != query_id))
    truncated = k > len(ranked)
    top = ranked[:min(k, len(ranked))]
    learn_seconds = time.perf_counter() - start
    return NeighborSet(
        query_id=query_id,
        neighbor_ids=tuple(i for _, i in top),
        distances=tuple(d for d, _ in top),
        learn_seconds=learn_seconds,
        truncated=truncated,
    )
