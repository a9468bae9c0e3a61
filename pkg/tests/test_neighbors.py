import math

import numpy as np
import pytest

from ucbench import (CommitmentSchedule, DataError, DemandMatrix,
                     InstanceRecord, demand_distance, nearest_neighbors)


def random_demand(rng, n_buses=3, n_hours=4) -> DemandMatrix:
    shares = rng.uniform(0.2, 1.0, n_buses)
    shares = shares / shares.sum()
    temporal = rng.uniform(0.3, 1.0, n_hours)
    temporal = temporal / temporal.max()
    return DemandMatrix.from_factors(float(rng.uniform(50.0, 150.0)),
                                     shares, temporal)


def record(instance_id, demand, objective=100.0, seconds=1.0):
    shape = (1, demand.n_hours)
    return InstanceRecord(instance_id=instance_id, demand=demand,
                          commitment=CommitmentSchedule(on=np.ones(shape, dtype=int)),
                          objective=objective, solve_seconds=seconds)


class TestDistance:
    def test_identity(self):
        d = DemandMatrix.from_factors(4.0, [1.0], [0.75, 1.0])
        assert demand_distance(d, d) == 0.0

    def test_three_four_five(self):
        # flattened difference (3, 4): a 3-4-5 right triangle
        a = DemandMatrix.from_factors(4.0, [1.0], [0.75, 1.0])
        b = DemandMatrix.from_factors(8.0, [1.0], [0.75, 1.0])
        assert demand_distance(a, b) == pytest.approx(5.0, abs=1e-12)

    def test_matches_two_loop_accumulation(self):
        rng = np.random.default_rng(17)
        a = random_demand(rng, 4, 6)
        b = random_demand(rng, 4, 6)
        acc = 0.0
        for i in range(4):
            for j in range(6):
                acc += (a.values[i, j] - b.values[i, j]) ** 2
        assert demand_distance(a, b) == pytest.approx(math.sqrt(acc), rel=1e-12)

    def test_dimension_mismatch(self):
        a = DemandMatrix.from_factors(2.0, [1.0], [1.0, 0.5])
        b = DemandMatrix.from_factors(2.0, [1.0], [1.0, 0.5, 0.5])
        with pytest.raises(DataError):
            demand_distance(a, b)

    def test_metric_properties_on_random_triples(self):
        rng = np.random.default_rng(23)
        for _ in range(200):
            a, b, c = (random_demand(rng) for _ in range(3))
            assert demand_distance(a, b) == pytest.approx(
                demand_distance(b, a), rel=1e-12)
            assert demand_distance(a, c) <= (demand_distance(a, b)
                                             + demand_distance(b, c) + 1e-9)
            assert demand_distance(a, a) == 0.0


class TestNearestNeighbors:
    def test_exact_twin_comes_first(self):
        base = DemandMatrix.from_factors(30.0, [0.5, 0.5], [0.8, 1.0])
        other = DemandMatrix.from_factors(33.0, [0.5, 0.5], [0.8, 1.0])
        records = [record(0, base), record(1, base), record(2, other)]
        ns = nearest_neighbors(0, records, k=2)
        assert ns.neighbor_ids[0] == 1
        assert ns.distances[0] == 0.0
        assert ns.learn_seconds > 0.0

    def test_ties_break_to_lower_id(self):
        base = DemandMatrix.from_factors(30.0, [1.0], [1.0, 0.5])
        records = [record(i, base) for i in range(5)]
        ns = nearest_neighbors(3, records, k=3)
        assert ns.neighbor_ids == (0, 1, 2)

    def test_matches_full_sort_oracle(self):
        rng = np.random.default_rng(31)
        records = [record(i, random_demand(rng, 3, 8)) for i in range(100)]
        query = records[42]
        ranked = sorted(
            (demand_distance(query.demand, r.demand), r.instance_id)
            for r in records if r.instance_id != 42)
        expected = [i for _, i in ranked[:10]]
        ns = nearest_neighbors(42, records, k=10)
        assert list(ns.neighbor_ids) == expected

    def test_leave_one_out(self):
        rng = np.random.default_rng(5)
        records = [record(i, random_demand(rng, 2, 3)) for i in range(20)]
        for q in range(20):
            ns = nearest_neighbors(q, records, k=19)
            assert q not in ns.neighbor_ids

    def test_k_truncated_with_flag(self):
        rng = np.random.default_rng(7)
        records = [record(i, random_demand(rng, 2, 3)) for i in range(4)]
        ns = nearest_neighbors(0, records, k=10)
        assert len(ns) == 3
        assert ns.truncated

    def test_deterministic(self):
        rng = np.random.default_rng(13)
        records = [record(i, random_demand(rng, 2, 5)) for i in range(30)]
        first = nearest_neighbors(7, records, k=5)
        second = nearest_neighbors(7, records, k=5)
        assert first.neighbor_ids == second.neighbor_ids
        assert first.distances == second.distances

    def test_query_must_exist(self):
        rng = np.random.default_rng(1)
        records = [record(0, random_demand(rng)), record(1, random_demand(rng))]
        with pytest.raises(DataError):
            nearest_neighbors(9, records, k=1)
