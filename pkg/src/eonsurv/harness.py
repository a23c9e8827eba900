"""Experiment configuration, sweep execution, and plot-data emission.

Config files are plain ``key = value`` lines; ``#`` starts a comment.  List
values are comma separated.  Recognised keys::

    topology        builtin name (ARPANET, COST239) or path to a topology file
    schemes         subset of dpp, spp, incb (alias: scheme)
    sweep           request counts, ascending, or "auto" (10 even steps)
    seeds           integers; "a-b" expands to an inclusive range
    fr_min, fr_max  demand bounds in slots
    slot_capacity   slots per link (overrides the topology's F)
    metric          km or hops
    failure_mode    enumerate, or sample:<count>
    failure_seed    seed for sampled failure scenarios
    bbp_weighted    true to weight blocking by demanded slots
    output_dir      where emit() writes
    jobs            worker processes for independent cells
    scenario_csv    true to export per-scenario outcomes at the last sweep point
    timing.*        f_d_us, m_p_us, m_a_us, prop_us_per_km, c_x_us, rtc_us
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path as FsPath
from typing import Optional

from eonsurv import failure, metrics, rng, timing, topology as topo, workload
from eonsurv.protection import Scheme, provision
from eonsurv.spectrum import SpectrumGrid
from eonsurv.timing import TimingParams

SCHEME_LABELS = {"dpp": "DPP", "spp": "SPP", "incb": "INCB-SPP"}
_BOOL = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    topology: str = "COST239"
    schemes: tuple[str, ...] = ("dpp", "spp", "incb")
    sweep: Optional[tuple[int, ...]] = None
    seeds: tuple[int, ...] = (1, 2, 3, 4, 5)
    fr_min: int = workload.DEFAULT_FR_MIN
    fr_max: int = workload.DEFAULT_FR_MAX
    slot_capacity: Optional[int] = None
    metric: str = "km"
    failure_mode: str = "enumerate"
    failure_seed: int = 0
    bbp_weighted: bool = False
    output_dir: str = "results"
    jobs: int = 1
    scenario_csv: bool = False
    timing: dict = field(default_factory=dict)
    explicit: frozenset = field(default=frozenset(), compare=False)

    def load_topology(self) -> topo.Topology:
        if self.topology.upper() in topo.BUILTIN:
            t = topo.load_builtin(self.topology)
        else:
            t = topo.load_file(self.topology)
        if self.slot_capacity is not None and self.slot_capacity != t.slot_capacity:
            t = topo.Topology(t.name, t.n_nodes, t.links, self.slot_capacity, t.labels)
        return t

    def timing_params(self, t: topo.Topology) -> TimingParams:
        overrides = {timing.CONFIG_KEYS[k]: v for k, v in self.timing.items()}
        return TimingParams.for_topology(t.name, **overrides)

    def resolved_sweep(self, t: topo.Topology) -> tuple[int, ...]:
        if self.sweep is not None:
            return self.sweep
        pop = t.pair_count
        return tuple(sorted({max(1, (pop * k + 5) // 10) for k in range(1, 11)}))

    def scenario_list(self, t: topo.Topology) -> list[failure.FailureScenario]:
        if self.failure_mode == "enumerate":
            return failure.enumerate_scenarios(t)
        count = int(self.failure_mode.split(":", 1)[1])
        return failure.sample_scenarios(t, min(count, t.n_links * (t.n_links - 1) // 2), self.failure_seed)

    def validate(self, t: Optional[topo.Topology] = None) -> topo.Topology:
        if not self.schemes:
            raise ConfigError("at least one scheme is required")
        for s in self.schemes:
            if s not in SCHEME_LABELS:
                raise ConfigError(f"unknown scheme {s!r}")
        if len(set(self.schemes)) != len(self.schemes):
            raise ConfigError("duplicate scheme")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if self.metric not in topo.METRICS:
            raise ConfigError(f"metric must be one of {topo.METRICS}")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if self.failure_mode != "enumerate":
            head, _, count = self.failure_mode.partition(":")
            if head != "sample" or not count.isdigit() or int(count) < 1:
                raise ConfigError("failure_mode must be 'enumerate' or 'sample:<count>'")
        if t is None:
            try:
                t = self.load_topology()
            except topo.TopologyError as exc:
                raise ConfigError(str(exc)) from None
        sweep = self.resolved_sweep(t)
        if not sweep:
            raise ConfigError("sweep is empty")
        if list(sweep) != sorted(set(sweep)):
            raise ConfigError("sweep values must be strictly ascending")
        if sweep[0] < 1 or sweep[-1] > t.pair_count:
            raise ConfigError(f"sweep values must lie in 1..{t.pair_count} for {t.name}")
        try:
            workload.WorkloadSpec(sweep[-1], self.fr_min, self.fr_max).validate(t)
            self.timing_params(t)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return t

    def canonical(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("explicit")
        d.pop("jobs")  # scheduling only; never changes results
        d["timing"] = dict(sorted(self.timing.items()))
        return d

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.canonical(), sort_keys=True).encode()).hexdigest()


def _ints(value: str) -> tuple[int, ...]:
    out = []
    for part in value.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part[1:]:
            lo, hi = part.split("-", 1) if not part.startswith("-") else (None, None)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return tuple(out)


def parse_config(text: str, base_dir: Optional[FsPath] = None) -> ExperimentConfig:
    values: dict = {}
    timing_over: dict[str, float] = {}
    explicit = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        explicit.add(key)
        try:
            if key in timing.CONFIG_KEYS:
                timing_over[key] = float(value)
            elif key == "topology":
                if value.upper() not in topo.BUILTIN and base_dir is not None and not FsPath(value).is_absolute():
                    value = str(base_dir / value)
                values["topology"] = value
            elif key in ("schemes", "scheme"):
                values["schemes"] = tuple(s.strip().lower() for s in value.split(",") if s.strip())
            elif key == "sweep":
                values["sweep"] = None if value.lower() == "auto" else _ints(value)
            elif key == "seeds":
                values["seeds"] = _ints(value)
            elif key in ("fr_min", "fr_max", "slot_capacity", "failure_seed", "jobs"):
                values[key] = int(value)
            elif key in ("metric", "failure_mode", "output_dir"):
                values[key] = value
            elif key in ("bbp_weighted", "scenario_csv"):
                if value.lower() not in _BOOL:
                    raise ValueError(f"not a boolean: {value!r}")
                values[key] = _BOOL[value.lower()]
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"line {lineno}: {exc}") from None
    return ExperimentConfig(**values, timing=timing_over, explicit=frozenset(explicit))


def load_config(path) -> ExperimentConfig:
    path = FsPath(path)
    return parse_config(path.read_text(), base_dir=path.parent)


@dataclass
class CellOutput:
    seed: int
    scheme: str
    reports: dict[int, metrics.RunReport]
    workload_digests: dict[int, str]
    grid_dump: Optional[str] = None
    scenario_csv: Optional[str] = None


def run_cell(cfg: ExperimentConfig, seed: int, scheme: str, dump_grid: bool = False) -> CellOutput:
    """Provision one seed's workload under one scheme across the whole sweep.

    Provisioning is online and in id order, so the state after the first
    ``k`` requests is exactly what a fresh run on a ``k``-request workload
    produces; each sweep point is evaluated on that state.
    """
    t = cfg.load_topology()
    params = cfg.timing_params(t)
    sweep = cfg.resolved_sweep(t)
    requests = workload.generate(t, workload.WorkloadSpec(sweep[-1], cfg.fr_min, cfg.fr_max, seed))
    scenarios = cfg.scenario_list(t)
    grid = SpectrumGrid.for_topology(t)
    connections: dict = {}
    outcomes = []
    reports = {}
    digests = {}
    out = CellOutput(seed, scheme, reports, digests)
    for count in sweep:
        for req in requests[len(outcomes):count]:
            outcomes.append(provision(Scheme(scheme), grid, t, params, req, connections, cfg.metric))
        per_scenario = [(sc, failure.recover(sc, connections, grid, params)) for sc in scenarios]
        recoveries = [o for _, res in per_scenario for o in res]
        reports[count] = metrics.build_report(scheme, t.name, seed, outcomes, grid, recoveries,
                                              cfg.bbp_weighted)
        digests[count] = workload.digest(requests[:count])
        if count == sweep[-1]:
            if dump_grid:
                out.grid_dump = grid.dump()
            if cfg.scenario_csv:
                out.scenario_csv = failure.scenario_csv(per_scenario)
    return out


def _run_cell_args(args):
    return run_cell(*args)


@dataclass
class SweepResult:
    config: ExperimentConfig
    topology: str
    sweep: tuple[int, ...]
    cells: dict[tuple[str, int, int], metrics.RunReport]
    averaged: dict[tuple[str, int], metrics.RunReport]
    summary: dict[str, dict[str, Optional[float]]]
    workload_digests: dict[int, dict[int, str]]
    grid_dumps: dict[str, str] = field(default_factory=dict)
    scenario_csvs: dict[tuple[str, int], str] = field(default_factory=dict)


def _mean(values):
    values = [v for v in values if v is not None]
    return sum(values) / len(values) if values else None


def run_experiment(cfg: ExperimentConfig, dump_grid: bool = False) -> SweepResult:
    t = cfg.validate()
    sweep = cfg.resolved_sweep(t)
    jobs = [(cfg, seed, scheme, dump_grid and seed == cfg.seeds[0])
            for seed in cfg.seeds for scheme in cfg.schemes]
    if cfg.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_run_cell_args, jobs))
    else:
        results = [run_cell(*job) for job in jobs]

    cells = {}
    digests: dict[int, dict[int, str]] = {}
    dumps = {}
    scen = {}
    for res in results:  # already in canonical (seed, scheme) order
        for count, report in res.reports.items():
            cells[(res.scheme, count, res.seed)] = report
        known = digests.setdefault(res.seed, res.workload_digests)
        if known != res.workload_digests:
            raise RuntimeError(f"schemes saw different workloads for seed {res.seed}")
        if res.grid_dump is not None:
            dumps[res.scheme] = res.grid_dump
        if res.scenario_csv is not None:
            scen[(res.scheme, res.seed)] = res.scenario_csv

    averaged = {}
    for scheme in cfg.schemes:
        for count in sweep:
            averaged[(scheme, count)] = metrics.average([cells[(scheme, count, s)] for s in cfg.seeds])
    summary = {}
    for scheme in cfg.schemes:
        rows = [averaged[(scheme, c)] for c in sweep]
        summary[scheme] = {
            "bbp": _mean(r.bbp for r in rows),
            "rt_us": _mean(r.mean_rt_us for r in rows),
            "bpr": _mean(r.bpr for r in rows),
        }
    return SweepResult(cfg, t.name, sweep, cells, averaged, summary, digests, dumps, scen)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


def _table_csv(result: SweepResult, attr: str) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["request_count", *result.config.schemes])
    for count in result.sweep:
        writer.writerow([count, *(_fmt(getattr(result.averaged[(s, count)], attr)) for s in result.config.schemes)])
    return buf.getvalue()


def summary_table(result: SweepResult) -> dict:
    """parameter -> topology -> scheme -> sweep-and-seed average."""
    rows = {"BBP": "bbp", "RT_us": "rt_us", "BPR": "bpr"}
    return {
        param: {result.topology: {SCHEME_LABELS[s]: result.summary[s][key] for s in result.config.schemes}}
        for param, key in rows.items()
    }


def manifest(result: SweepResult) -> dict:
    cfg = result.config
    t = cfg.load_topology()
    params = cfg.timing_params(t)
    resolved = cfg.canonical()
    resolved["sweep"] = list(result.sweep)
    resolved["slot_capacity"] = t.slot_capacity
    resolved["timing"] = params.as_config()
    implicit = {k: v for k, v in resolved.items() if k not in cfg.explicit and k != "timing"}
    implicit.update({k: v for k, v in params.as_config().items() if k not in cfg.explicit})
    return {
        "config": resolved,
        "config_sha256": cfg.digest(),
        "defaults_applied": implicit,
        "generator": rng.NAME,
        "length_table": topo.LENGTH_TABLE_VERSION if cfg.topology.upper() in topo.BUILTIN else "file",
        "seeds": list(cfg.seeds),
        "topology": result.topology,
        "workload_sha256": {str(seed): {str(c): h for c, h in d.items()}
                            for seed, d in sorted(result.workload_digests.items())},
    }


def emit(result: SweepResult, out_dir) -> list[FsPath]:
    out = FsPath(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "bbp.csv": _table_csv(result, "bbp"),
        "rt.csv": _table_csv(result, "mean_rt_us"),
        "bpr.csv": _table_csv(result, "bpr"),
        "summary.json": json.dumps(summary_table(result), indent=2, sort_keys=True) + "\n",
        "manifest.json": json.dumps(manifest(result), indent=2, sort_keys=True) + "\n",
    }
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(metrics.REPORT_COLUMNS)
    lines = []
    for scheme in result.config.schemes:
        for count in result.sweep:
            for seed in result.config.seeds:
                report = result.cells[(scheme, count, seed)]
                writer.writerow([_fmt(v) for v in report.to_row()])
                lines.append(report.to_json())
    files["reports.csv"] = buf.getvalue()
    files["reports.jsonl"] = "\n".join(lines) + "\n"
    for (scheme, seed), text in sorted(result.scenario_csvs.items()):
        files[f"scenarios_{scheme}_seed{seed}.csv"] = text
    written = []
    for name, text in files.items():
        path = out / name
        path.write_text(text)
        written.append(path)
    return written
