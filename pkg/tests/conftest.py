import numpy as np
import pytest

from ucbench import Bus, Generator, Line, PowerSystem


class ScriptedRng:
    """Stand-in random source returning preset values in order."""

    def __init__(self, uniforms=(), normals=()):
        self._uniforms = list(uniforms)
        self._normals = list(normals)

    def uniform(self, low, high):
        return self._uniforms.pop(0)

    def normal(self, mean, std):
        return self._normals.pop(0)


@pytest.fixture
def single_bus_single_gen():
    """1 bus, 1 generator, T=2; the textbook cost-accounting example."""
    gen = Generator(id=0, bus=0, p_min=10.0, p_max=100.0, marginal_cost=20.0,
                    no_load_cost=5.0, startup_cost=100.0)
    return PowerSystem(buses=(Bus(0, 1.0),), generators=(gen,), lines=(),
                       hourly_ratio_mean=(1.0, 1.0), hourly_ratio_std=(0.0, 0.0),
                       horizon=2, name="one_gen")


@pytest.fixture
def tiny_three_gen():
    """1 bus, 3 generators, T=4; small enough for exhaustive enumeration."""
    gens = (
        Generator(id=0, bus=0, p_min=10.0, p_max=100.0, marginal_cost=20.0,
                  no_load_cost=10.0, startup_cost=50.0, min_up=2, min_down=2),
        Generator(id=1, bus=0, p_min=5.0, p_max=60.0, marginal_cost=35.0,
                  no_load_cost=5.0, startup_cost=20.0),
        Generator(id=2, bus=0, p_min=0.0, p_max=40.0, marginal_cost=50.0,
                  no_load_cost=2.0, startup_cost=10.0, min_down=2,
                  ramp_up=30.0, ramp_down=30.0, startup_limit=25.0,
                  shutdown_limit=25.0),
    )
    return PowerSystem(buses=(Bus(0, 1.0),), generators=gens, lines=(),
                       hourly_ratio_mean=(1.0, 1.1, 0.9, 1.0),
                       hourly_ratio_std=(0.1,) * 4, horizon=4, name="tiny3")


@pytest.fixture
def ring_three_bus():
    """3-bus ring with equal reactances; cheap unit behind a weak line."""
    buses = (Bus(0, 0.0), Bus(1, 0.2), Bus(2, 0.8))
    lines = (
        Line(id=0, from_bus=0, to_bus=1, reactance=0.1, flow_limit=200.0),
        Line(id=1, from_bus=1, to_bus=2, reactance=0.1, flow_limit=200.0),
        Line(id=2, from_bus=0, to_bus=2, reactance=0.1, flow_limit=60.0),
    )
    gens = (
        Generator(id=0, bus=0, p_min=0.0, p_max=200.0, marginal_cost=10.0),
        Generator(id=1, bus=1, p_min=0.0, p_max=200.0, marginal_cost=40.0),
    )
    return PowerSystem(buses=buses, generators=gens, lines=lines,
                       hourly_ratio_mean=(1.0,), hourly_ratio_std=(0.0,),
                       horizon=1, name="ring3")


@pytest.fixture
def five_bus_static():
    """5-bus, 6-line, 4-generator mesh used for PTDF cross-checks."""
    buses = tuple(Bus(b, share) for b, share in
                  enumerate((0.0, 0.15, 0.30, 0.25, 0.30)))
    lines = (
        Line(id=0, from_bus=0, to_bus=1, reactance=0.0281, flow_limit=999.0),
        Line(id=1, from_bus=0, to_bus=3, reactance=0.0304, flow_limit=999.0),
        Line(id=2, from_bus=0, to_bus=4, reactance=0.0064, flow_limit=999.0),
        Line(id=3, from_bus=1, to_bus=2, reactance=0.0108, flow_limit=999.0),
        Line(id=4, from_bus=2, to_bus=3, reactance=0.0297, flow_limit=999.0),
        Line(id=5, from_bus=3, to_bus=4, reactance=0.0297, flow_limit=999.0),
    )
    gens = (
        Generator(id=0, bus=0, p_min=0.0, p_max=300.0, marginal_cost=15.0),
        Generator(id=1, bus=1, p_min=0.0, p_max=200.0, marginal_cost=25.0),
        Generator(id=2, bus=3, p_min=0.0, p_max=200.0, marginal_cost=35.0),
        Generator(id=3, bus=4, p_min=0.0, p_max=100.0, marginal_cost=45.0),
    )
    return PowerSystem(buses=buses, generators=gens, lines=lines,
                       hourly_ratio_mean=(1.0,), hourly_ratio_std=(0.0,),
                       horizon=1, name="five_static")


def dense_dc_flows(system: PowerSystem, injections: np.ndarray,
                   slack: int = 0) -> np.ndarray:
    """Independent DC power-flow oracle: solve B*theta = p, then flows from
    angle differences. Used to cross-check the PTDF path."""
    n = system.n_buses
    b = np.zeros((n, n))
    for ln in system.lines:
        y = 1.0 / ln.reactance
        b[ln.from_bus, ln.from_bus] += y
        b[ln.to_bus, ln.to_bus] += y
        b[ln.from_bus, ln.to_bus] -= y
        b[ln.to_bus, ln.from_bus] -= y
    keep = [i for i in range(n) if i != slack]
    theta = np.zeros(n)
    theta[keep] = np.linalg.solve(b[np.ix_(keep, keep)], injections[keep])
    return np.array([(theta[ln.from_bus] - theta[ln.to_bus]) / ln.reactance
                     for ln in system.lines])
