"""File formats: JSON for experiment artifacts, CSV for the final report table.

All floats are serialized at full precision (shortest round-trippable repr),
so replaying from disk reproduces in-memory values bit for bit. Writers go
through a temp file and an atomic rename. Unknown fields in input files are
ignored with a warning; versioned wrappers reject mismatched versions.
"""

from __future__ import annotations

import csv
import json
import logging
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .commitment import CommitmentSchedule, SolverConfig
from .errors import DataError
from .evaluation import (EvalReport, GAP_BUCKET_LABELS, InstanceEval,
                         NeighborOpfResult)
from .neighbors import InstanceRecord, NeighborSet
from .scenarios import DemandMatrix, Scenario
from .system import (DEFAULT_HOURLY_RATIO_MEAN, DEFAULT_HOURLY_RATIO_STD, Bus,
                     Generator, Line, PowerSystem, merge_parallel_lines)
from .uc import UcSolution

log = logging.getLogger("ucbench")

SCHEMA_VERSION = "1"

_GENERATOR_FIELDS = ("id", "bus", "p_min", "p_max", "marginal_cost",
                     "no_load_cost", "startup_cost", "min_up", "min_down",
                     "ramp_up", "ramp_down", "startup_limit", "shutdown_limit",
                     "initial_on_hours", "initial_power")


def _atomic_write(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=1, allow_nan=False) + "\n"


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise DataError(f"{path}: file not found") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: JSON parse error at line {exc.lineno}: {exc.msg}") from None


def _warn_unknown(context: str, mapping: dict, known):
    unknown = sorted(set(mapping) - set(known))
    if unknown:
        log.warning("event=unknown_fields context=%s fields=%s", context,
                    ",".join(unknown))


def _require(mapping: dict, key: str, context: str):
    if key not in mapping:
        raise DataError(f"{context}: missing required field '{key}'")
    return mapping[key]


def _check_version(data: dict, path: str):
    version = data.get("schema_version")
    if version is not None and version != SCHEMA_VERSION:
        raise DataError(f"{path}: schema_version {version!r} unsupported "
                        f"(expected {SCHEMA_VERSION!r})")


# ---------------------------------------------------------------- systems

def system_to_dict(system: PowerSystem) -> dict:
    return {
        "name": system.name,
        "horizon": system.horizon,
        "buses": [{"id": b.id, "nominal_load_share": b.nominal_load_share}
                  for b in system.buses],
        "generators": [{f: getattr(g, f) for f in _GENERATOR_FIELDS}
                       for g in system.generators],
        "lines": [{"id": ln.id, "from_bus": ln.from_bus, "to_bus": ln.to_bus,
                   "reactance": ln.reactance, "flow_limit": ln.flow_limit}
                  for ln in system.lines],
        "hourly_ratio_mean": list(system.hourly_ratio_mean),
        "hourly_ratio_std": list(system.hourly_ratio_std),
    }


def save_system(system: PowerSystem, path: str):
    _atomic_write(path, _dump_json(system_to_dict(system)))


def system_from_dict(data: dict, context: str = "system") -> PowerSystem:
    if not isinstance(data, dict):
        raise DataError(f"{context}: expected a JSON object at top level")
    _warn_unknown(context, data, ("name", "horizon", "buses", "generators",
                                  "lines", "hourly_ratio_mean",
                                  "hourly_ratio_std", "schema_version"))
    horizon = int(data.get("horizon", 24))
    buses = []
    for i, b in enumerate(_require(data, "buses", context)):
        _warn_unknown(f"{context}.buses[{i}]", b, ("id", "nominal_load_share"))
        buses.append(Bus(id=int(_require(b, "id", f"bus[{i}]")),
                         nominal_load_share=float(_require(b, "nominal_load_share", f"bus[{i}]"))))
    generators = []
    for i, g in enumerate(_require(data, "generators", context)):
        _warn_unknown(f"{context}.generators[{i}]", g, _GENERATOR_FIELDS)
        kwargs = {k: g[k] for k in _GENERATOR_FIELDS if k in g}
        for key in ("id", "bus"):
            _require(g, key, f"generator[{i}]")
        for key in ("p_min", "p_max", "marginal_cost"):
            _require(g, key, f"generator[{i}]")
        if "initial_on_hours" not in kwargs:
            kwargs["initial_on_hours"] = -int(g.get("min_down", 1))
        generators.append(Generator(**kwargs))
    lines = []
    for i, ln in enumerate(data.get("lines", [])):
        _warn_unknown(f"{context}.lines[{i}]", ln,
                      ("id", "from_bus", "to_bus", "reactance", "flow_limit"))
        lines.append(Line(id=int(_require(ln, "id", f"line[{i}]")),
                          from_bus=int(_require(ln, "from_bus", f"line[{i}]")),
                          to_bus=int(_require(ln, "to_bus", f"line[{i}]")),
                          reactance=float(_require(ln, "reactance", f"line[{i}]")),
                          flow_limit=float(_require(ln, "flow_limit", f"line[{i}]"))))
    if "hourly_ratio_mean" in data:
        mean = tuple(float(x) for x in data["hourly_ratio_mean"])
    elif horizon == len(DEFAULT_HOURLY_RATIO_MEAN):
        mean = DEFAULT_HOURLY_RATIO_MEAN
    else:
        raise DataError(f"{context}: hourly_ratio_mean required for horizon {horizon}")
    if "hourly_ratio_std" in data:
        std = tuple(float(x) for x in data["hourly_ratio_std"])
    else:
        std = (DEFAULT_HOURLY_RATIO_STD[0],) * horizon
    return PowerSystem(buses=tuple(buses), generators=tuple(generators),
                       lines=merge_parallel_lines(lines),
                       hourly_ratio_mean=mean, hourly_ratio_std=std,
                       horizon=horizon, name=str(data.get("name", "")))


def load_system(path: str) -> PowerSystem:
    return system_from_dict(_load_json(path), context=path)


# ------------------------------------------------------- external importer

_EXTERNAL_SECTIONS = ("Parameters", "Generators", "Buses", "Transmission lines",
                      "Reserves", "Contingencies")


def import_external(path: str) -> PowerSystem:
    """Import a system from the public benchmark-instance JSON layout.

    Only the fields this toolkit models are mapped. Files that rely on
    out-of-scope features (reserves, contingencies, piecewise production
    costs, time-dependent startup costs, must-run flags) are rejected with
    the list of offending sections.
    """
    data = _load_json(path)
    if not isinstance(data, dict) or "Generators" not in data:
        raise DataError(f"{path}: not a recognized benchmark-instance file")
    offending = []
    if data.get("Reserves"):
        offending.append("reserves")
    if data.get("Contingencies"):
        offending.append("contingencies")

    params = data.get("Parameters", {})
    horizon = int(params.get("Time horizon (h)", 24))

    bus_names = list(data.get("Buses", {}).keys())
    bus_index = {name: i for i, name in enumerate(bus_names)}
    loads = np.zeros((len(bus_names), horizon))
    for name, b in data.get("Buses", {}).items():
        series = b.get("Load (MW)", 0.0)
        series = np.full(horizon, float(series)) if np.isscalar(series) \
            else np.asarray(series, dtype=float)
        if series.shape != (horizon,):
            raise DataError(f"{path}: bus {name}: load series length != horizon")
        loads[bus_index[name]] = series

    generators = []
    for gi, (name, g) in enumerate(data.get("Generators", {}).items()):
        curve_mw = np.asarray(g.get("Production cost curve (MW)", []), dtype=float)
        curve_cost = np.asarray(g.get("Production cost curve ($)", []), dtype=float)
        if curve_mw.size == 0 or curve_mw.size != curve_cost.size:
            raise DataError(f"{path}: generator {name}: missing production cost curve")
        if curve_mw.size > 2:
            slopes = np.diff(curve_cost) / np.diff(curve_mw)
            if not np.allclose(slopes, slopes[0], rtol=1e-9, atol=1e-9):
                offending.append(f"piecewise costs ({name})")
                continue
        if curve_mw.size >= 2:
            marginal = float((curve_cost[-1] - curve_cost[0]) / (curve_mw[-1] - curve_mw[0]))
            no_load = float(curve_cost[0] - marginal * curve_mw[0])
        else:
            marginal = float(curve_cost[0] / curve_mw[0]) if curve_mw[0] else 0.0
            no_load = 0.0
        if no_load < 0:
            raise DataError(f"{path}: generator {name}: negative no-load intercept")
        startup_costs = g.get("Startup costs ($)", [0.0])
        if np.isscalar(startup_costs):
            startup_costs = [startup_costs]
        if len(set(float(c) for c in startup_costs)) > 1:
            offending.append(f"time-dependent startup costs ({name})")
            continue
        if g.get("Must run?", False):
            offending.append(f"must-run units ({name})")
            continue
        p_min, p_max = float(curve_mw[0]), float(curve_mw[-1])
        initial_status = int(g.get("Initial status (h)", -int(g.get("Minimum downtime (h)", 1))))
        generators.append(Generator(
            id=gi,
            bus=bus_index[_require(g, "Bus", f"generator {name}")],
            p_min=p_min,
            p_max=p_max,
            marginal_cost=marginal,
            no_load_cost=no_load,
            startup_cost=float(startup_costs[0]),
            min_up=int(g.get("Minimum uptime (h)", 1)),
            min_down=int(g.get("Minimum downtime (h)", 1)),
            ramp_up=float(g["Ramp up limit (MW)"]) if "Ramp up limit (MW)" in g else None,
            ramp_down=float(g["Ramp down limit (MW)"]) if "Ramp down limit (MW)" in g else None,
            startup_limit=float(g["Startup limit (MW)"]) if "Startup limit (MW)" in g else None,
            shutdown_limit=float(g["Shutdown limit (MW)"]) if "Shutdown limit (MW)" in g else None,
            initial_on_hours=initial_status,
            initial_power=float(g.get("Initial power (MW)", 0.0)) if initial_status > 0 else 0.0,
        ))
    if offending:
        raise DataError(f"{path}: file uses out-of-scope features: "
                        + "; ".join(offending))

    lines = []
    for li, (name, ln) in enumerate(data.get("Transmission lines", {}).items()):
        lines.append(Line(
            id=li,
            from_bus=bus_index[_require(ln, "Source bus", f"line {name}")],
            to_bus=bus_index[_require(ln, "Target bus", f"line {name}")],
            reactance=float(_require(ln, "Reactance (ohms)", f"line {name}")),
            flow_limit=float(_require(ln, "Normal flow limit (MW)", f"line {name}")),
        ))

    total = loads.sum(axis=0)
    if total.sum() <= 0:
        raise DataError(f"{path}: file carries no load")
    shares = loads.mean(axis=1)
    shares = shares / shares.sum()
    # hour-over-hour ratios of the aggregate series; spread falls back to the
    # shipped default since one deterministic series carries no variance
    mean = np.ones(horizon)
    nonzero = total > 0
    for t in range(1, horizon):
        if nonzero[t] and nonzero[t - 1]:
            mean[t] = total[t] / total[t - 1]
    name = os.path.splitext(os.path.basename(path))[0]
    return PowerSystem(
        buses=tuple(Bus(id=i, nominal_load_share=float(s)) for i, s in enumerate(shares)),
        generators=tuple(generators),
        lines=merge_parallel_lines(lines),
        hourly_ratio_mean=tuple(mean),
        hourly_ratio_std=(DEFAULT_HOURLY_RATIO_STD[0],) * horizon,
        horizon=horizon,
        name=name,
    )


def load_any_system(path: str) -> PowerSystem:
    """Load a system file in either the native or the external layout."""
    data = _load_json(path)
    if isinstance(data, dict) and "buses" in data:
        return system_from_dict(data, context=path)
    return import_external(path)


# ------------------------------------------------------------- demand data

def demand_to_dict(d: DemandMatrix) -> dict:
    return {"peak": d.peak,
            "bus_factors": d.bus_factors.tolist(),
            "temporal_factors": d.temporal_factors.tolist(),
            "values": d.values.tolist()}


def demand_from_dict(data: dict, context: str) -> DemandMatrix:
    _warn_unknown(context, data, ("peak", "bus_factors", "temporal_factors", "values"))
    return DemandMatrix(
        values=np.asarray(_require(data, "values", context), dtype=float),
        peak=float(_require(data, "peak", context)),
        bus_factors=np.asarray(_require(data, "bus_factors", context), dtype=float),
        temporal_factors=np.asarray(_require(data, "temporal_factors", context), dtype=float),
    )


def save_scenarios(path: str, scenarios: list[Scenario]):
    """Instance-set file: array of {instance_id, seed, demand}, the demand
    stored as the bare bus-by-hour MW matrix."""
    payload = [{"instance_id": s.instance_id, "seed": s.seed,
                "demand": s.demand.values.tolist()} for s in scenarios]
    _atomic_write(path, _dump_json(payload))


def load_scenarios(path: str) -> list[Scenario]:
    data = _load_json(path)
    if not isinstance(data, list):
        raise DataError(f"{path}: expected a JSON array of instances")
    out = []
    for i, entry in enumerate(data):
        ctx = f"{path}[{i}]"
        _warn_unknown(ctx, entry, ("instance_id", "seed", "demand"))
        try:
            demand = DemandMatrix.from_values(_require(entry, "demand", ctx))
        except DataError as exc:
            raise DataError(f"{ctx}: {exc}") from None
        out.append(Scenario(
            instance_id=int(_require(entry, "instance_id", ctx)),
            seed=int(_require(entry, "seed", ctx)),
            demand=demand))
    return out


# ------------------------------------------------------------ record store

def record_to_dict(r: InstanceRecord) -> dict:
    return {"instance_id": r.instance_id,
            "demand": demand_to_dict(r.demand),
            "commitment": r.commitment.on.tolist(),
            "objective": r.objective,
            "solve_seconds": r.solve_seconds}


def record_from_dict(data: dict, context: str) -> InstanceRecord:
    _warn_unknown(context, data, ("instance_id", "demand", "commitment",
                                  "objective", "solve_seconds"))
    return InstanceRecord(
        instance_id=int(_require(data, "instance_id", context)),
        demand=demand_from_dict(_require(data, "demand", context), context),
        commitment=CommitmentSchedule(on=np.asarray(_require(data, "commitment", context))),
        objective=float(_require(data, "objective", context)),
        solve_seconds=float(_require(data, "solve_seconds", context)),
    )


def save_records(path: str, records: list[InstanceRecord]):
    ordered = sorted(records, key=lambda r: r.instance_id)
    _atomic_write(path, _dump_json([record_to_dict(r) for r in ordered]))


def load_records(path: str) -> list[InstanceRecord]:
    data = _load_json(path)
    if not isinstance(data, list):
        raise DataError(f"{path}: expected a JSON array of records")
    return [record_from_dict(entry, f"{path}[{i}]") for i, entry in enumerate(data)]


# -------------------------------------------------------------- solutions

def save_solution(path: str, instance_id: int, solution: UcSolution):
    payload = {"instance_id": instance_id,
               "commitment": solution.commitment.on.tolist(),
               "dispatch": solution.dispatch.tolist(),
               "objective": solution.objective,
               "solve_seconds": solution.solve_seconds,
               "mip_gap_achieved": solution.mip_gap_achieved,
               "lazy_rounds": solution.lazy_rounds}
    _atomic_write(path, _dump_json(payload))


# ------------------------------------------------------------- evaluations

def eval_to_dict(e: InstanceEval) -> dict:
    return {
        "instance_id": e.instance_id,
        "neighbor_ids": list(e.neighbor_set.neighbor_ids),
        "distances": list(e.neighbor_set.distances),
        "learn_seconds": e.neighbor_set.learn_seconds,
        "truncated": e.neighbor_set.truncated,
        "opf_results": [{"neighbor_id": r.neighbor_id, "feasible": r.feasible,
                         "objective": r.objective,
                         "solve_seconds": r.solve_seconds}
                        for r in e.opf_results],
        "best_cost": e.best_cost,
        "gap": e.gap,
        "speedup": e.speedup,
        "all_infeasible": e.all_infeasible,
    }


def eval_from_dict(data: dict, context: str) -> InstanceEval:
    known = ("instance_id", "neighbor_ids", "distances", "learn_seconds",
             "truncated", "opf_results", "best_cost", "gap", "speedup",
             "all_infeasible")
    _warn_unknown(context, data, known)
    neighbor_set = NeighborSet(
        query_id=int(_require(data, "instance_id", context)),
        neighbor_ids=tuple(int(i) for i in _require(data, "neighbor_ids", context)),
        distances=tuple(float(d) for d in _require(data, "distances", context)),
        learn_seconds=float(_require(data, "learn_seconds", context)),
        truncated=bool(data.get("truncated", False)),
    )
    results = tuple(
        NeighborOpfResult(
            neighbor_id=int(r["neighbor_id"]), feasible=bool(r["feasible"]),
            objective=None if r.get("objective") is None else float(r["objective"]),
            solve_seconds=float(r["solve_seconds"]))
        for r in _require(data, "opf_results", context))
    best = data.get("best_cost")
    gap = data.get("gap")
    return InstanceEval(
        instance_id=neighbor_set.query_id,
        neighbor_set=neighbor_set,
        opf_results=results,
        best_cost=None if best is None else float(best),
        gap=None if gap is None else float(gap),
        speedup=float(_require(data, "speedup", context)),
        all_infeasible=bool(_require(data, "all_infeasible", context)),
    )


def save_evals(path: str, evals: list[InstanceEval], *, system: PowerSystem,
               k: int):
    payload = {
        "schema_version": SCHEMA_VERSION,
        "system_name": system.name,
        "n_buses": system.n_buses,
        "n_units": system.n_generators,
        "n_lines": system.n_lines,
        "k": k,
        "evals": [eval_to_dict(e) for e in evals],
    }
    _atomic_write(path, _dump_json(payload))


def load_evals(path: str) -> tuple[list[InstanceEval], dict]:
    """Returns (evals, meta) where meta carries the system summary and k."""
    data = _load_json(path)
    if not isinstance(data, dict) or "evals" not in data:
        raise DataError(f"{path}: expected an evaluation file")
    _check_version(data, path)
    meta = {key: data.get(key) for key in
            ("system_name", "n_buses", "n_units", "n_lines", "k")}
    evals = [eval_from_dict(d, f"{path}.evals[{i}]")
             for i, d in enumerate(data["evals"])]
    return evals, meta


# ----------------------------------------------------------------- reports

REPORT_CSV_COLUMNS = ("system", "buses", "units", "lines", "avg_gap_pct",
                      "max_gap_pct", "lt_0.01", "0.01_to_0.02", "0.02_to_0.05",
                      "0.05_to_0.1", "gt_0.1", "n_infeasible", "avg_speedup")


def report_to_dict(report: EvalReport, meta: dict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "system_name": report.system_name,
        "n_buses": meta.get("n_buses"),
        "n_units": meta.get("n_units"),
        "n_lines": meta.get("n_lines"),
        "k": meta.get("k"),
        "n_instances": report.n_instances,
        "mean_gap": report.mean_gap,
        "max_gap": report.max_gap,
        "histogram": list(report.histogram),
        "n_infeasible": report.n_infeasible,
        "mean_speedup": report.mean_speedup,
    }


def save_report_json(path: str, report: EvalReport, meta: dict):
    _atomic_write(path, _dump_json(report_to_dict(report, meta)))


def load_report_json(path: str) -> dict:
    data = _load_json(path)
    _check_version(data, path)
    return data


def write_report_csv(path: str, report: EvalReport, meta: dict):
    """One Table-style row: identity, gap stats (percent, 4 decimals),
    histogram counts, infeasible count, mean speedup."""
    def pct(x):
        return "" if x is None else f"{x * 100:.4f}"

    row = [report.system_name, meta.get("n_buses"), meta.get("n_units"),
           meta.get("n_lines"), pct(report.mean_gap), pct(report.max_gap),
           *report.histogram, report.n_infeasible,
           f"{report.mean_speedup:.1f}"]
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(REPORT_CSV_COLUMNS)
            writer.writerow(row)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_report_table(report: EvalReport, meta: dict) -> str:
    """Human-readable one-row table mirroring the CSV columns."""
    def pct(x):
        return "-" if x is None else f"{x * 100:.4f}"

    header = ["system", "buses", "units", "lines", "avg_gap%", "max_gap%",
              *GAP_BUCKET_LABELS, "n_inf", "avg_speedup"]
    row = [report.system_name or "-", str(meta.get("n_buses", "-")),
           str(meta.get("n_units", "-")), str(meta.get("n_lines", "-")),
           pct(report.mean_gap), pct(report.max_gap),
           *[str(c) for c in report.histogram], str(report.n_infeasible),
           f"{report.mean_speedup:.1f}x"]
    widths = [max(len(h), len(r)) for h, r in zip(header, row)]
    fmt = "  ".join(f"{{:>{w}}}" for w in widths)
    return fmt.format(*header) + "\n" + fmt.format(*row)


# ----------------------------------------------------------------- manifest

@dataclass(frozen=True)
class Manifest:
    """Paths and settings tying one experiment's artifacts together."""

    system_file: str
    instance_file: str
    record_file: str
    report_file: str
    master_seed: int
    config: SolverConfig
    schema_version: str = SCHEMA_VERSION

    def __post_init__(self):
        if self.schema_version != SCHEMA_VERSION:
            raise DataError(f"manifest schema_version {self.schema_version!r} "
                            f"unsupported (expected {SCHEMA_VERSION!r})")


def save_manifest(path: str, manifest: Manifest):
    payload = {
        "schema_version": manifest.schema_version,
        "system_file": manifest.system_file,
        "instance_file": manifest.instance_file,
        "record_file": manifest.record_file,
        "report_file": manifest.report_file,
        "master_seed": manifest.master_seed,
        "config": {
            "mip_gap": manifest.config.mip_gap,
            "time_limit_seconds": manifest.config.time_limit_seconds,
            "flow_violation_tol": manifest.config.flow_violation_tol,
            "max_lazy_rounds": manifest.config.max_lazy_rounds,
        },
    }
    _atomic_write(path, _dump_json(payload))


def load_manifest(path: str) -> Manifest:
    data = _load_json(path)
    _check_version(data, path)
    cfg = data.get("config", {})
    return Manifest(
        system_file=str(_require(data, "system_file", path)),
        instance_file=str(_require(data, "instance_file", path)),
        record_file=str(_require(data, "record_file", path)),
        report_file=str(_require(data, "report_file", path)),
        master_seed=int(_require(data, "master_seed", path)),
        config=SolverConfig(
            mip_gap=float(cfg.get("mip_gap", 1e-4)),
            time_limit_seconds=float(cfg.get("time_limit_seconds", 600.0)),
            flow_violation_tol=float(cfg.get("flow_violation_tol", 1e-4)),
            max_lazy_rounds=int(cfg.get("max_lazy_rounds", 50)),
        ),
        schema_version=str(data.get("schema_version", SCHEMA_VERSION)),
    )
