"""Ready-made test grids: a congested five-bus case and a random generator.

These are small but complete systems for demos and benchmarks; tests use
them too. The random generator is deterministic in its seed.
"""

from __future__ import annotations

import numpy as np

from .system import DEFAULT_HOURLY_RATIO_MEAN, Bus, Generator, Line, PowerSystem


def five_bus(horizon: int = 24, *, congested: bool = True) -> PowerSystem:
    """Five buses, six lines, four generators; one corridor sized to congest.

    Cheap generation sits at buses 0 and 1 while most load hangs off buses
    2-4, so the limit on the 0-4 corridor binds at high-demand hours when
    `congested` is True.
    """
    lines = [
        Line(id=0, from_bus=0, to_bus=1, reactance=0.0281, flow_limit=400.0),
        Line(id=1, from_bus=0, to_bus=3, reactance=0.0304, flow_limit=400.0),
        Line(id=2, from_bus=0, to_bus=4, reactance=0.0064,
             flow_limit=240.0 if congested else 1000.0),
        Line(id=3, from_bus=1, to_bus=2, reactance=0.0108, flow_limit=400.0),
        Line(id=4, from_bus=2, to_bus=3, reactance=0.0297, flow_limit=400.0),
        Line(id=5, from_bus=3, to_bus=4, reactance=0.0297, flow_limit=480.0),
    ]
    generators = [
        Generator(id=0, bus=0, p_min=40.0, p_max=400.0, marginal_cost=14.0,
                  no_load_cost=300.0, startup_cost=1200.0, min_up=4, min_down=4,
                  ramp_up=200.0, ramp_down=200.0, startup_limit=100.0,
                  shutdown_limit=100.0, initial_on_hours=8, initial_power=120.0),
        Generator(id=1, bus=0, p_min=30.0, p_max=250.0, marginal_cost=22.0,
                  no_load_cost=200.0, startup_cost=800.0, min_up=2, min_down=2,
                  ramp_up=150.0, ramp_down=150.0, startup_limit=90.0,
                  shutdown_limit=90.0, initial_on_hours=-4),
        Generator(id=2, bus=2, p_min=20.0, p_max=200.0, marginal_cost=30.0,
                  no_load_cost=150.0, startup_cost=500.0, min_up=2, min_down=2,
                  ramp_up=120.0, ramp_down=120.0, startup_limit=80.0,
                  shutdown_limit=80.0, initial_on_hours=-2),
        Generator(id=3, bus=3, p_min=10.0, p_max=150.0, marginal_cost=45.0,
                  no_load_cost=50.0, startup_cost=200.0, min_up=1, min_down=1,
                  ramp_up=150.0, ramp_down=150.0, startup_limit=150.0,
                  shutdown_limit=150.0, initial_on_hours=-1),
    ]
    buses = [
        Bus(id=0, nominal_load_share=0.00),
        Bus(id=1, nominal_load_share=0.15),
        Bus(id=2, nominal_load_share=0.30),
        Bus(id=3, nominal_load_share=0.25),
        Bus(id=4, nominal_load_share=0.30),
    ]
    mean = DEFAULT_HOURLY_RATIO_MEAN[:horizon] if horizon <= 24 else (1.0,) * horizon
    return PowerSystem(buses=tuple(buses), generators=tuple(generators),
                       lines=tuple(lines), hourly_ratio_mean=mean,
                       hourly_ratio_std=(0.03,) * horizon, horizon=horizon,
                       name="five_bus")


def random_system(n_buses: int, n_generators: int, seed: int, *,
                  horizon: int = 24, line_factor: float = 1.4,
                  temporal_sigma: float = 0.008,
                  name: str | None = None) -> PowerSystem:
    """Random connected grid with a merit-ordered thermal fleet.

    Lines form a random spanning tree plus extra chords (about
    `line_factor * n_buses` total), with limits sized from installed
    capacity. The fleet splits into blocky base units, mid-merit units, and
    free-minimum peakers; together with a calm hour-over-hour spread
    (`temporal_sigma`), commitments stay similar between nearby demand
    profiles, which is what a warm-start benchmark needs.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    buses = tuple(Bus(id=b, nominal_load_share=float(rng.uniform(0.3, 1.0)))
                  for b in range(n_buses))

    seen = set()
    for b in range(1, n_buses):
        other = int(rng.integers(0, b))
        seen.add((min(b, other), max(b, other)))
    extra = max(0, int(line_factor * n_buses) - (n_buses - 1))
    attempts = 0
    while extra > 0 and attempts < 50 * n_buses:
        attempts += 1
        a, b = (int(x) for x in rng.integers(0, n_buses, size=2))
        key = (min(a, b), max(a, b))
        if a == b or key in seen:
            continue
        seen.add(key)
        extra -= 1

    n_base = max(1, round(0.25 * n_generators))
    n_peak = max(1, round(0.30 * n_generators))
    n_mid = max(0, n_generators - n_base - n_peak)
    gen_buses = rng.integers(0, n_buses, size=n_generators)
    generators = []

    def add(p_max, marginal, no_load, startup, p_min_frac, min_time, ramp_frac,
            start_frac):
        gid = len(generators)
        generators.append(Generator(
            id=gid, bus=int(gen_buses[gid]),
            p_min=round(p_min_frac * p_max, 1), p_max=round(p_max, 1),
            marginal_cost=round(marginal, 2),
            no_load_cost=round(no_load * p_max, 1),
            startup_cost=round(startup * p_max, 0),
            min_up=min_time, min_down=min_time,
            ramp_up=round(ramp_frac * p_max, 1),
            ramp_down=round(ramp_frac * p_max, 1),
            startup_limit=round(max(p_min_frac, start_frac) * p_max, 1),
            shutdown_limit=round(max(p_min_frac, start_frac) * p_max, 1),
        ))

    for _ in range(n_base):
        add(float(rng.uniform(280.0, 420.0)), float(rng.uniform(12.0, 20.0)),
            no_load=4.0, startup=60.0, p_min_frac=0.12, min_time=8,
            ramp_frac=0.6, start_frac=0.5)
    for _ in range(n_mid):
        add(float(rng.uniform(140.0, 260.0)), float(rng.uniform(25.0, 45.0)),
            no_load=2.5, startup=35.0, p_min_frac=0.10,
            min_time=int(rng.integers(3, 6)), ramp_frac=0.8, start_frac=0.6)
    for _ in range(n_peak):
        add(float(rng.uniform(80.0, 160.0)), float(rng.uniform(60.0, 90.0)),
            no_load=0.5, startup=2.0, p_min_frac=0.0, min_time=1,
            ramp_frac=1.0, start_frac=1.0)

    total_capacity = sum(g.p_max for g in generators)
    limit_scale = 0.45 * total_capacity
    lines = tuple(
        Line(id=i, from_bus=a, to_bus=b,
             reactance=round(float(rng.uniform(0.05, 0.2)), 4),
             flow_limit=round(float(rng.uniform(0.6, 1.2) * limit_scale), 1))
        for i, (a, b) in enumerate(sorted(seen)))
    return PowerSystem(
        buses=buses, generators=tuple(generators), lines=lines,
        hourly_ratio_mean=DEFAULT_HOURLY_RATIO_MEAN[:horizon]
        if horizon == 24 else (1.0,) * horizon,
        hourly_ratio_std=(temporal_sigma,) * horizon,
        horizon=horizon,
        name=name or f"random_{n_buses}b{n_generators}g",
    )
