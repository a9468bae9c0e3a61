import numpy as np
import pytest

from ucbench import (CommitmentSchedule, DemandMatrix, EnumerationLimitError,
                     InfeasibleError, SolverConfig, brute_force_uc,
                     bus_injections, compute_ptdf, generate_profile, solve_uc,
                     validate_commitment)


def flat_demand(system, totals):
    """Demand matrix with the whole load on bus 0 scaled to given totals."""
    totals = np.asarray(totals, dtype=float)
    shares = np.zeros(system.n_buses)
    shares[0] = 1.0
    temporal = totals / totals.max()
    return DemandMatrix.from_factors(float(totals.max()), shares, temporal)


def spread_demand(system, totals, shares):
    totals = np.asarray(totals, dtype=float)
    shares = np.asarray(shares, dtype=float)
    return DemandMatrix.from_factors(float(totals.max()), shares / shares.sum(),
                                     totals / totals.max())


class TestSingleGenerator:
    def test_textbook_objective(self, single_bus_single_gen):
        # 50+60 MWh at 20 $/MWh, 2 h of 5 $/h no-load, one 100 $ startup
        demand = flat_demand(single_bus_single_gen, [50.0, 60.0])
        sol = solve_uc(single_bus_single_gen, demand)
        assert sol.objective == pytest.approx(2310.0, rel=1e-9)
        np.testing.assert_array_equal(sol.commitment.on, [[1, 1]])
        np.testing.assert_allclose(sol.dispatch, [[50.0, 60.0]], atol=1e-6)

    def test_capacity_shortfall_reported_with_hour(self, single_bus_single_gen):
        demand = flat_demand(single_bus_single_gen, [50.0, 150.0])
        with pytest.raises(InfeasibleError) as err:
            solve_uc(single_bus_single_gen, demand)
        assert err.value.hour == 1

    def test_solution_invariants(self, single_bus_single_gen):
        demand = flat_demand(single_bus_single_gen, [95.0, 40.0])
        sol = solve_uc(single_bus_single_gen, demand)
        on = sol.commitment.on
        p = sol.dispatch
        assert np.all(p <= on * 100.0 + 1e-6)
        assert np.all(p >= on * 10.0 - 1e-6)
        np.testing.assert_allclose(p.sum(axis=0), demand.hourly_totals, atol=1e-6)


class TestBruteForceOracle:
    def test_one_gen_demand_below_minimum_infeasible(self, single_bus_single_gen):
        demand = flat_demand(single_bus_single_gen, [5.0, 5.0])
        with pytest.raises(InfeasibleError):
            brute_force_uc(single_bus_single_gen, demand)

    def test_one_gen_in_range(self, single_bus_single_gen):
        demand = flat_demand(single_bus_single_gen, [50.0, 60.0])
        sol = brute_force_uc(single_bus_single_gen, demand)
        assert sol.objective == pytest.approx(2310.0, rel=1e-12)
        assert sol.mip_gap_achieved == 0.0

    def test_enumeration_bound(self, tiny_three_gen):
        # 3 generators x 6 hours > 16 commitment bits
        system6 = tiny_three_gen.__class__(
            buses=tiny_three_gen.buses, generators=tiny_three_gen.generators,
            lines=(), hourly_ratio_mean=(1.0,) * 6,
            hourly_ratio_std=(0.0,) * 6, horizon=6)
        demand = DemandMatrix.from_factors(
            100.0, [1.0], np.array([0.5, 0.5, 0.5, 0.5, 0.5, 1.0]))
        with pytest.raises(EnumerationLimitError):
            brute_force_uc(system6, demand)

    def test_matches_milp_on_random_instances(self, tiny_three_gen):
        config = SolverConfig(mip_gap=1e-4)
        for seed in range(12):
            demand = generate_profile(tiny_three_gen, seed)
            exact = brute_force_uc(tiny_three_gen, demand, config)
            milp = solve_uc(tiny_three_gen, demand, config)
            tol = max(1e-6, config.mip_gap * exact.objective)
            assert abs(milp.objective - exact.objective) <= tol
            validate_commitment(tiny_three_gen, milp.commitment)
            validate_commitment(tiny_three_gen, exact.commitment)


class TestTransmission:
    def test_congestion_raises_cost(self, ring_three_bus):
        # all load at bus 2 behind a 60 MW line: cheap unit alone would
        # push 2/3 of 150 MW = 100 MW over it
        demand = spread_demand(ring_three_bus, [150.0], [0.0, 0.0, 1.0])
        constrained = solve_uc(ring_three_bus, demand)
        relaxed_system = ring_three_bus.__class__(
            buses=ring_three_bus.buses, generators=ring_three_bus.generators,
            lines=tuple(ln.__class__(id=ln.id, from_bus=ln.from_bus,
                                     to_bus=ln.to_bus, reactance=ln.reactance,
                                     flow_limit=1e6)
                        for ln in ring_three_bus.lines),
            hourly_ratio_mean=ring_three_bus.hourly_ratio_mean,
            hourly_ratio_std=ring_three_bus.hourly_ratio_std,
            horizon=ring_three_bus.horizon)
        relaxed = solve_uc(relaxed_system, demand)
        assert constrained.objective > relaxed.objective + 1.0
        assert constrained.added_line_constraints >= 1

    def test_lazy_matches_upfront(self, ring_three_bus):
        demand = spread_demand(ring_three_bus, [150.0], [0.0, 0.0, 1.0])
        lazy = solve_uc(ring_three_bus, demand, lazy=True)
        upfront = solve_uc(ring_three_bus, demand, lazy=False)
        assert lazy.objective == pytest.approx(upfront.objective, rel=1e-6)

    def test_no_congestion_single_round(self, ring_three_bus):
        demand = spread_demand(ring_three_bus, [30.0], [0.0, 0.0, 1.0])
        sol = solve_uc(ring_three_bus, demand)
        assert sol.lazy_rounds == 1
        assert sol.added_line_constraints == 0

    def test_posthoc_flows_within_limits(self, ring_three_bus):
        config = SolverConfig()
        demand = spread_demand(ring_three_bus, [150.0], [0.0, 0.0, 1.0])
        sol = solve_uc(ring_three_bus, demand, config)
        ptdf = compute_ptdf(ring_three_bus)
        inj = bus_injections(ring_three_bus, sol.dispatch, demand.values)
        flows = ptdf.entries @ inj
        limits = ring_three_bus.line_limits[:, None]
        assert np.all(np.abs(flows) <= limits + config.flow_violation_tol)

    def test_round_objectives_non_decreasing(self, ring_three_bus):
        config = SolverConfig()
        demand = spread_demand(ring_three_bus, [150.0], [0.0, 0.0, 1.0])
        sol = solve_uc(ring_three_bus, demand, config)
        assert len(sol.round_objectives) == sol.lazy_rounds
        for earlier, later in zip(sol.round_objectives, sol.round_objectives[1:]):
            assert later >= earlier - config.mip_gap * abs(earlier) - 1e-9

    def test_brute_force_agrees_under_congestion(self, ring_three_bus):
        demand = spread_demand(ring_three_bus, [150.0], [0.0, 0.0, 1.0])
        exact = brute_force_uc(ring_three_bus, demand)
        milp = solve_uc(ring_three_bus, demand)
        assert abs(milp.objective - exact.objective) <= max(
            1e-6, 1e-4 * exact.objective)


class TestGapContract:
    def test_reported_gap_within_config(self, tiny_three_gen):
        config = SolverConfig(mip_gap=1e-4)
        for seed in (3, 4, 5):
            demand = generate_profile(tiny_three_gen, seed)
            sol = solve_uc(tiny_three_gen, demand, config)
            assert sol.mip_gap_achieved <= config.mip_gap

    def test_dimension_mismatch_rejected(self, tiny_three_gen,
                                         single_bus_single_gen):
        demand = generate_profile(single_bus_single_gen, 0)
        with pytest.raises(Exception, match="does not match"):
            solve_uc(tiny_three_gen, demand)


class TestScheduleLogic:
    def test_min_up_respected(self, tiny_three_gen):
        # generator 0 has min_up = min_down = 2: no single-hour cycling
        for seed in range(8):
            demand = generate_profile(tiny_three_gen, seed)
            sol = solve_uc(tiny_three_gen, demand)
            validate_commitment(tiny_three_gen, sol.commitment)

    def test_validate_rejects_short_run(self, tiny_three_gen):
        bad = CommitmentSchedule(on=np.array([
            [0, 1, 0, 0],   # 1-hour on-run violates min_up=2
            [1, 1, 1, 1],
            [0, 0, 0, 0],
        ]))
        with pytest.raises(Exception, match="min_up"):
            validate_commitment(tiny_three_gen, bad)
