"""Monte Carlo engine: scenario sweep, algorithm dispatch, timing, persistence.

A run is a pure function of its configuration.  Every random stream is
derived by hashing (base seed, scenario index, case, context, algorithm,
repetition), so records are bit-identical whether the sweep executes
serially or across a worker pool, and any single record can be reproduced
in isolation.  Faults are recorded with their scenario key and the sweep
continues; a nonzero fault count fails the process exit status.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .alloc_auction import allocate_ca, allocate_feca
from .alloc_baseline import (
    BaselineConfig,
    allocate_orr,
    allocate_random,
    allocate_sr1,
    allocate_sr2,
    allocate_ws,
)
from .alloc_matching import allocate_gs, allocate_mrgs, allocate_mrm, allocate_ttc
from .assignment import Assignment
from .metrics import (
    CSV_HEADER,
    METRIC_FIELDS,
    MetricRecord,
    aggregate,
    average_records,
    evaluate,
)
from .rng import derive_seed_words, spawn_rng
from .scenario import CASE_FRACTIONS, GeneratorConfig, RadioParams, config_for_case, generate
from .valuation import Context

ALGORITHM_ORDER = ("R", "SR1", "SR2", "WS", "ORR", "GS", "MRM", "MRGS", "TTC", "CA", "FECA")
STOCHASTIC_ALGORITHMS = frozenset({"R", "SR1", "SR2"})
CASE_ORDER = ("I", "II", "III")
CONTEXT_ORDER = ("capacity", "utility")

RNG_SCHEME = (
    "sha256-keyed numpy streams: scenario seed = hash(base_seed, index); "
    "allocator stream = hash(base_seed, index, case, context, algorithm, rep)"
)

_BASELINE_CFG = BaselineConfig(max_channels_per_tenant=4)
GS_TENANT_QUOTA = 4


def _alloc_r(scenario, context, rng) -> Assignment:
    del context
    return allocate_random(scenario, _BASELINE_CFG, rng)


def _alloc_sr1(scenario, context, rng) -> Assignment:
    del context
    return allocate_sr1(scenario, _BASELINE_CFG, rng)


def _alloc_sr2(scenario, context, rng) -> Assignment:
    del context
    return allocate_sr2(scenario, _BASELINE_CFG, rng)


def _alloc_gs(scenario, context, rng) -> Assignment:
    return allocate_gs(scenario, context, rng, tenant_quota=GS_TENANT_QUOTA)


def _alloc_mrm(scenario, context, rng) -> Assignment:
    return allocate_mrm(scenario, context, rng, tenant_quota=GS_TENANT_QUOTA)


ALLOCATORS = {
    "R": _alloc_r,
    "SR1": _alloc_sr1,
    "SR2": _alloc_sr2,
    "WS": allocate_ws,
    "ORR": allocate_orr,
    "GS": _alloc_gs,
    "MRM": _alloc_mrm,
    "MRGS": allocate_mrgs,
    "TTC": allocate_ttc,
    "CA": allocate_ca,
    "FECA": allocate_feca,
}


@dataclass(frozen=True)
class RunConfig:
    n_scenarios: int = 1
    base_seed: int = 0
    cases: tuple[str, ...] = CASE_ORDER
    contexts: tuple[str, ...] = CONTEXT_ORDER
    algorithms: tuple[str, ...] = ALGORITHM_ORDER
    stochastic_reps: int = 10
    out_dir: str = "runs"
    workers: int = 1
    generator: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.n_scenarios < 1:
            raise ValueError("n_scenarios must be >= 1")
        if self.stochastic_reps < 1:
            raise ValueError("stochastic_reps must be >= 1")
        for a in self.algorithms:
            if a not in ALLOCATORS:
                raise ValueError(f"unknown algorithm label {a!r}")
        for c in self.cases:
            if c not in CASE_FRACTIONS:
                raise ValueError(f"unknown case {c!r}")
        for c in self.contexts:
            Context.parse(c)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @staticmethod
    def from_dict(doc: dict) -> "RunConfig":
        doc = dict(doc)
        for key in ("cases", "contexts", "algorithms"):
            if key in doc and isinstance(doc[key], str):
                doc[key] = tuple(s.strip() for s in doc[key].split(",") if s.strip())
            elif key in doc:
                doc[key] = tuple(doc[key])
        return RunConfig(**doc)

    def generator_config(self) -> GeneratorConfig:
        overrides = dict(self.generator)
        if "params" in overrides:
            overrides["params"] = RadioParams(**overrides["params"])
        for key in ("area", "tx_power_interval_dbm", "channels_per_bs_choices",
                    "c_min_interval", "c_max_interval"):
            if key in overrides:
                overrides[key] = tuple(overrides[key])
        return GeneratorConfig(**overrides)


def scenario_seed(base_seed: int, index: int) -> int:
    """Per-scenario generation seed, a pure hash of (base seed, index)."""
    words = derive_seed_words("scenario-seed", base_seed, index)
    return int(words[0]) | (int(words[1]) << 32)


@dataclass
class Fault:
    scenario_seed: int
    case: str
    context: str
    algorithm: str
    rep: int
    error: str


def run_scenario_case(
    config: RunConfig, index: int, case: str
) -> tuple[list[MetricRecord], list[Fault]]:
    """All records of one (scenario index, case) cell, in deterministic order."""
    seed = scenario_seed(config.base_seed, index)
    scn = generate(config_for_case(case, config.generator_config()), seed)
    _ = scn.single_link_capacity_matrix  # shared input, excluded from timings
    records: list[MetricRecord] = []
    faults: list[Fault] = []
    for context_label in config.contexts:
        ctx = Context.parse(context_label)
        for algo in config.algorithms:
            allocator = ALLOCATORS[algo]
            reps = config.stochastic_reps if algo in STOCHASTIC_ALGORITHMS else 1
            rep_records: list[MetricRecord] = []
            failed = False
            for rep in range(reps):
                rng = spawn_rng(config.base_seed, index, case, context_label, algo, rep)
                scn.clear_bundle_cache()
                try:
                    t0 = time.perf_counter()
                    asn = allocator(scn, ctx, rng)
                    dt = time.perf_counter() - t0
                    rep_records.append(
                        evaluate(scn, asn, algorithm=algo, context=context_label,
                                 wall_time_s=dt)
                    )
                except Exception as exc:  # record-and-continue fault policy
                    faults.append(
                        Fault(seed, case, context_label, algo, rep, repr(exc))
                    )
                    failed = True
                    break
            if failed:
                continue
            records.append(
                average_records(rep_records) if len(rep_records) > 1 else rep_records[0]
            )
    return records, faults


def _run_task(args: tuple[RunConfig, int, str]) -> tuple[list[MetricRecord], list[Fault]]:
    return run_scenario_case(*args)


@dataclass
class RunResult:
    records: list[MetricRecord]
    faults: list[Fault]
    out_dir: Path

    @property
    def records_path(self) -> Path:
        return self.out_dir / "records.csv"


def write_manifest(config: RunConfig, out_dir: Path, counts: dict | None = None,
                   fault_count: int | None = None) -> Path:
    doc = {
        "config": config.to_dict(),
        "version": __version__,
        "rng_scheme": RNG_SCHEME,
    }
    if counts is not None:
        doc["record_counts"] = counts
    if fault_count is not None:
        doc["fault_count"] = fault_count
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(doc, indent=2) + "\n")
    return path


def run(config: RunConfig) -> RunResult:
    """Execute the sweep, streaming records to CSV under the output directory."""
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_manifest(config, out_dir)
    tasks = [(config, i, case) for i in range(config.n_scenarios) for case in config.cases]
    records: list[MetricRecord] = []
    faults: list[Fault] = []
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            for recs, flts in pool.map(_run_task, tasks, chunksize=1):
                records.extend(recs)
                faults.extend(flts)
    else:
        for task in tasks:
            recs, flts = _run_task(task)
            records.extend(recs)
            faults.extend(flts)
    with open(out_dir / "records.csv", "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for r in records:
            fh.write(r.csv_row() + "\n")
    if faults:
        with open(out_dir / "faults.csv", "w") as fh:
            fh.write("scenario_seed,case,context,algorithm,rep,error\n")
            writer = csv.writer(fh)
            for f in faults:
                writer.writerow(
                    [f.scenario_seed, f.case, f.context, f.algorithm, f.rep, f.error]
                )
    counts: dict[str, int] = {}
    for r in records:
        key = f"{r.case}/{r.context}/{r.algorithm}"
        counts[key] = counts.get(key, 0) + 1
    write_manifest(config, out_dir, counts=counts, fault_count=len(faults))
    return RunResult(records=records, faults=faults, out_dir=out_dir)


def load_records(path: Path | str) -> list[MetricRecord]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path} is not a records file (bad header)")
    return [MetricRecord.from_csv_row(line) for line in lines[1:] if line]


def write_aggregates(records: list[MetricRecord], out_dir: Path | str) -> list[Path]:
    """Summary table plus per-figure box-plot data and the TU-vs-F scatter."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    aggs = aggregate(records)
    written: list[Path] = []

    table = out_dir / "aggregates.csv"
    with open(table, "w") as fh:
        fh.write(
            "case,context,algorithm,metric,n,mean,median,q1,q3,whisker_lo,whisker_hi\n"
        )
        for (case, context, algo), per_metric in sorted(aggs.items()):
            for metric in METRIC_FIELDS:
                s = per_metric[metric]
                fh.write(
                    f"{case},{context},{algo},{metric},{s['n']},{s['mean']!r},"
                    f"{s['median']!r},{s['q1']!r},{s['q3']!r},"
                    f"{s['whisker_lo']!r},{s['whisker_hi']!r}\n"
                )
    written.append(table)

    cells = sorted({(case, context) for case, context, _ in aggs})
    algo_order = {a: i for i, a in enumerate(ALGORITHM_ORDER)}
    for metric in METRIC_FIELDS:
        for case, context in cells:
            rows = [
                (algo, aggs[(case, context, algo)][metric])
                for (c2, ctx2, algo) in sorted(
                    aggs, key=lambda k: algo_order.get(k[2], len(algo_order))
                )
                if (c2, ctx2) == (case, context)
            ]
            if not rows:
                continue
            path = out_dir / f"plot_{metric}_{case}_{context}.csv"
            with open(path, "w") as fh:
                fh.write("algorithm,median,q1,q3,whisker_lo,whisker_hi,outliers\n")
                for algo, s in rows:
                    outliers = ";".join(repr(x) for x in s["outliers"])
                    fh.write(
                        f"{algo},{s['median']!r},{s['q1']!r},{s['q3']!r},"
                        f"{s['whisker_lo']!r},{s['whisker_hi']!r},{outliers}\n"
                    )
            written.append(path)

    scatter = out_dir / "tu_vs_fu_utility.csv"
    with open(scatter, "w") as fh:
        fh.write("algorithm,case,mean_tu,mean_fu\n")
        for (case, context, algo), per_metric in sorted(
            aggs.items(), key=lambda kv: (algo_order.get(kv[0][2], 99), kv[0][0])
        ):
            if context != "utility":
                continue
            fh.write(
                f"{algo},{case},{per_metric['tu']['mean']!r},"
                f"{per_metric['f_u']['mean']!r}\n"
            )
    written.append(scatter)
    return written
