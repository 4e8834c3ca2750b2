"""Benchmark harness: both algorithms over a grid of generated workflows.

For every instance the harness runs the baseline and the four-step
heuristic, records makespans and feasibility, and aggregates the geometric
mean of the heuristic/baseline makespan ratios over instances where both
succeeded.  Processor memories are scaled per instance (unless disabled) so
that the most demanding single task fits somewhere, mirroring how the
generated weights are normalized against real machine memories.

Report files: a JSON report (deterministic, no wall-clock values), a rows
CSV including runtimes, and a per-instance ratio CSV when a bandwidth sweep
is requested.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from statistics import geometric_mean

from .cluster import ComputingSystem, preset, scale_memories_to_fit
from .generate import generate_workflow
from .hetmem import hetmem
from .hetpart import hetpart
from .result import FORMAT_VERSION, MappingResult
from .workflow import WorkflowDag

# Relative makespan reported by the original full-scale study this harness
# is a desk-scale version of; printed next to the achieved ratio for context.
FULL_SCALE_REFERENCE_RATIO = 0.41


@dataclass
class BenchRow:
    instance: str
    family: str
    n_tasks: int
    seed: int
    preset: str
    bandwidth: float
    algorithm: str
    feasible: bool
    k_used: int | None
    makespan: float | None
    runtime: float
    note: str = ""

    def key(self):
        return (self.family, self.n_tasks, self.seed, self.preset,
                self.bandwidth, self.algorithm)


@dataclass
class BenchReport:
    preset: str
    bandwidths: list[float]
    rows: list[BenchRow] = field(default_factory=list)

    def ratios(self) -> dict[tuple[str, float], float]:
        """Instance-and-bandwidth keyed hetpart/hetmem makespan ratios."""
        by_key: dict[tuple, BenchRow] = {r.key(): r for r in self.rows}
        out: dict[tuple[str, float], float] = {}
        for r in self.rows:
            if r.algorithm != "hetpart" or not r.feasible:
                continue
            base = by_key.get(r.key()[:5] + ("hetmem",))
            if base is None or not base.feasible or not base.makespan:
                continue
            out[(r.instance, r.bandwidth)] = r.makespan / base.makespan
        return out

    def geomean_ratio(self, bandwidth: float | None = None) -> float | None:
        values = [
            ratio for (_, bw), ratio in self.ratios().items()
            if bandwidth is None or bw == bandwidth
        ]
        if not values:
            return None
        return geometric_mean(values)

    def to_json_dict(self) -> dict:
        rows = sorted(self.rows, key=lambda r: r.key())
        return {
            "format": FORMAT_VERSION,
            "preset": self.preset,
            "bandwidths": self.bandwidths,
            "rows": [
                {
                    "instance": r.instance, "family": r.family,
                    "n_tasks": r.n_tasks, "seed": r.seed, "preset": r.preset,
                    "bandwidth": r.bandwidth, "algorithm": r.algorithm,
                    "feasible": r.feasible, "k_used": r.k_used,
                    "makespan": r.makespan, "note": r.note,
                }
                for r in rows
            ],
            "ratios": [
                {"instance": inst, "bandwidth": bw, "ratio": ratio}
                for (inst, bw), ratio in sorted(self.ratios().items())
            ],
            "aggregates": {
                "geomean_ratio": self.geomean_ratio(),
                "per_bandwidth": {
                    str(bw): self.geomean_ratio(bw) for bw in self.bandwidths
                },
                "reference_ratio_full_scale": FULL_SCALE_REFERENCE_RATIO,
            },
        }


def run_instance(dag: WorkflowDag, system: ComputingSystem, algorithm: str,
                 seed: int, epsilon: float = 0.1,
                 stride: int | None = None) -> tuple[MappingResult, float]:
    start = time.perf_counter()
    if algorithm == "hetmem":
        result = hetmem(dag, system)
    elif algorithm == "hetpart":
        result = hetpart(dag, system, seed=seed, epsilon=epsilon, stride=stride)
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    elapsed = time.perf_counter() - start
    result.runtime = elapsed
    return result, elapsed


def run_bench(families, sizes, seeds, preset_name: str = "default",
              bandwidths=(1.0,), fit_memories: bool = True,
              epsilon: float = 0.1, stride: int | None = None,
              results_sink=None) -> BenchReport:
    """Run the full grid; per-instance failures are recorded, not raised."""
    bandwidths = [float(b) for b in bandwidths]
    report = BenchReport(preset_name, bandwidths)
    for family in families:
        for n_tasks in sizes:
            for seed in seeds:
                instance = f"{family}-n{n_tasks}-s{seed}"
                dag = generate_workflow(family, n_tasks, seed)
                max_req = max(dag.requirements())
                for bandwidth in bandwidths:
                    system = preset(preset_name, bandwidth)
                    if fit_memories:
                        system = scale_memories_to_fit(system, max_req)
                    for algorithm in ("hetmem", "hetpart"):
                        note = ""
                        try:
                            result, elapsed = run_instance(
                                dag, system, algorithm, seed, epsilon, stride)
                            feasible = result.feasible
                            k_used = result.k_used
                            makespan = result.makespan
                            if not feasible:
                                note = result.diagnostic or ""
                        except Exception as exc:  # keep the run going
                            feasible, k_used, makespan = False, None, None
                            elapsed = 0.0
                            note = f"error: {exc}"
                            result = None
                        report.rows.append(BenchRow(
                            instance, family, n_tasks, seed, preset_name,
                            bandwidth, algorithm, feasible, k_used, makespan,
                            elapsed, note,
                        ))
                        if results_sink is not None and result is not None:
                            results_sink(instance, bandwidth, algorithm, result, dag, system)
    return report


_CSV_FIELDS = ["instance", "family", "n_tasks", "seed", "preset", "bandwidth",
               "algorithm", "feasible", "k_used", "makespan",
               "runtime_seconds", "note"]


def write_report(report: BenchReport, prefix: str) -> dict[str, str]:
    """Write <prefix>.json, <prefix>.csv and (for sweeps) <prefix>-ratios.csv."""
    paths = {"json": prefix + ".json", "csv": prefix + ".csv"}
    with open(paths["json"], "w") as f:
        json.dump(report.to_json_dict(), f, indent=2)
        f.write("\n")
    with open(paths["csv"], "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=_CSV_FIELDS)
        writer.writeheader()
        for r in sorted(report.rows, key=lambda r: r.key()):
            writer.writerow({
                "instance": r.instance, "family": r.family,
                "n_tasks": r.n_tasks, "seed": r.seed, "preset": r.preset,
                "bandwidth": r.bandwidth, "algorithm": r.algorithm,
                "feasible": r.feasible, "k_used": r.k_used,
                "makespan": r.makespan, "runtime_seconds": r.runtime,
                "note": r.note,
            })
    if len(report.bandwidths) > 1:
        paths["ratios"] = prefix + "-ratios.csv"
        ratios = report.ratios()
        instances = sorted({inst for inst, _ in ratios})
        with open(paths["ratios"], "w", newline="") as f:
            cols = ["instance"] + [f"ratio_beta_{bw}" for bw in report.bandwidths]
            writer = csv.writer(f)
            writer.writerow(cols)
            for inst in instances:
                writer.writerow(
                    [inst] + [ratios.get((inst, bw), "") for bw in report.bandwidths]
                )
    return paths
