"""ucbench: benchmark nearest-neighbor warm starts for unit commitment.

Solve daily unit-commitment instances exactly, then measure how close (and
how much faster) re-dispatching under the commitments of nearby past
instances gets.
"""

from .commitment import (CommitmentSchedule, SolverConfig,
                         fixed_commitment_cost, startup_indicators,
                         validate_commitment)
from .errors import (DataError, EnumerationLimitError, InfeasibleError,
                     LogicViolationError, NumericalError, SolveLimitError,
                     StructuralError, UcbenchError, UnbalancedInjectionError)
from .evaluation import (EvalReport, InstanceEval, NeighborOpfResult,
                         aggregate, build_dataset, evaluate_all,
                         evaluate_instance, gap_bucket, parallel_speedup,
                         solve_scenarios, suboptimality_gap)
from .neighbors import (InstanceRecord, NeighborSet, demand_distance,
                        nearest_neighbors)
from .opf import OpfSolution, solve_opf
from .scenarios import (DemandMatrix, Scenario, draw_bus_factors,
                        draw_peak_demand, draw_temporal_factors,
                        generate_batch, generate_profile, instance_seed)
from .system import (Bus, Generator, Line, PowerSystem, PtdfMatrix,
                     bus_injections, compute_ptdf, line_flows,
                     merge_parallel_lines)
from .uc import UcSolution, brute_force_uc, solve_uc

__version__ = "0.1.0"

__all__ = [
    "Bus", "CommitmentSchedule", "DataError", "DemandMatrix",
    "EnumerationLimitError", "EvalReport", "Generator", "InfeasibleError",
    "InstanceEval", "InstanceRecord", "Line", "LogicViolationError",
    "NeighborOpfResult", "NeighborSet", "NumericalError", "OpfSolution",
    "PowerSystem", "PtdfMatrix", "Scenario", "SolveLimitError",
    "SolverConfig", "StructuralError", "UcSolution", "UcbenchError",
    "UnbalancedInjectionError", "aggregate", "brute_force_uc",
    "build_dataset", "bus_injections", "compute_ptdf", "demand_distance",
    "draw_bus_factors", "draw_peak_demand", "draw_temporal_factors",
    "evaluate_all", "evaluate_instance", "fixed_commitment_cost",
    "gap_bucket", "generate_batch", "generate_profile", "instance_seed",
    "line_flows", "merge_parallel_lines", "nearest_neighbors",
    "parallel_speedup", "solve_opf", "solve_scenarios", "solve_uc",
    "startup_indicators", "suboptimality_gap", "validate_commitment",
]
