"""Mapping results: the final block layout, assignment, makespan and checks.

``verify_mapping`` re-derives every feasibility claim from scratch through
the literal step-by-step memory evaluator, so tests and the result checker
do not share code paths with the heuristics that produced the mapping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .blockmem import BlockView, peak_for_order
from .cluster import ComputingSystem
from .makespan import bottom_weights
from .quotient import Partition, build_quotient, is_acyclic
from .workflow import WorkflowDag

REL_TOL = 1e-9

FORMAT_VERSION = 1


@dataclass
class BlockReport:
    id: int
    processor: str | None
    processor_memory: float | None
    processor_speed: float | None
    requirement: float
    fits: bool
    work: float
    tasks: list[str]
    order: list[str]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "processor": self.processor,
            "processor_memory": self.processor_memory,
            "processor_speed": self.processor_speed,
            "memory_requirement": self.requirement,
            "fits": self.fits,
            "work": self.work,
            "tasks": self.tasks,
            "order": self.order,
        }


@dataclass
class MappingResult:
    algorithm: str
    feasible: bool
    bandwidth: float
    diagnostic: str | None = None
    makespan: float | None = None
    blocks: list[BlockReport] = field(default_factory=list)
    critical_path: list[int] = field(default_factory=list)
    k_used: int | None = None
    seed: int | None = None
    step_trace: list[dict] = field(default_factory=list)
    runtime: float | None = None

    def assignment(self) -> dict[str, int]:
        return {tid: b.id for b in self.blocks for tid in b.tasks}

    def to_json_dict(self, include_timing: bool = False) -> dict:
        out = {
            "format": FORMAT_VERSION,
            "algorithm": self.algorithm,
            "feasible": self.feasible,
            "diagnostic": self.diagnostic,
            "bandwidth": self.bandwidth,
            "seed": self.seed,
            "k_used": self.k_used,
            "makespan": self.makespan,
            "critical_path": self.critical_path,
            "blocks": [b.to_dict() for b in self.blocks],
            "assignment": self.assignment(),
            "step_trace": self.step_trace,
        }
        if include_timing:
            out["runtime_seconds"] = self.runtime
        return out


def result_from_json_dict(data: dict) -> MappingResult:
    blocks = [
        BlockReport(
            b["id"], b["processor"], b["processor_memory"], b["processor_speed"],
            b["memory_requirement"], b["fits"], b["work"], list(b["tasks"]), list(b["order"]),
        )
        for b in data.get("blocks", [])
    ]
    return MappingResult(
        algorithm=data["algorithm"],
        feasible=data["feasible"],
        bandwidth=data["bandwidth"],
        diagnostic=data.get("diagnostic"),
        makespan=data.get("makespan"),
        blocks=blocks,
        critical_path=list(data.get("critical_path", [])),
        k_used=data.get("k_used"),
        seed=data.get("seed"),
        step_trace=list(data.get("step_trace", [])),
    )


def partition_of(result: MappingResult, dag: WorkflowDag) -> Partition:
    labels: dict[int, int] = {}
    blocks: dict[int, list[int]] = {}
    for b in result.blocks:
        members = [dag.index_of(t) for t in b.tasks]
        blocks[b.id] = members
        for u in members:
            labels[u] = b.id
    return Partition(labels, blocks)


def verify_mapping(result: MappingResult, dag: WorkflowDag,
                   system: ComputingSystem) -> list[str]:
    """Independent feasibility audit of a mapping; returns violations found.

    Checks coverage, distinct processors, quotient acyclicity, the memory
    bound of every block under its recorded traversal (via the literal
    stepwise evaluator), and consistency of the recorded makespan.
    """
    problems: list[str] = []
    if not result.feasible:
        problems.append("result is marked infeasible")
        return problems
    seen: dict[str, int] = {}
    for b in result.blocks:
        for tid in b.tasks:
            if tid in seen:
                problems.append(f"task {tid!r} appears in blocks {seen[tid]} and {b.id}")
            seen[tid] = b.id
    for tid in dag.ids:
        if tid not in seen:
            problems.append(f"task {tid!r} not covered by any block")
    procs = [b.processor for b in result.blocks if b.processor is not None]
    if len(procs) != len(result.blocks):
        problems.append("some blocks have no processor assigned")
    if len(set(procs)) != len(procs):
        problems.append("two blocks share a processor")
    if problems:
        return problems

    for b in result.blocks:
        view = BlockView.from_members(dag, b.tasks)
        peak, _ = peak_for_order(view, dag, b.order)
        mem = system.memory_of(b.processor)
        if peak > mem * (1.0 + REL_TOL):
            problems.append(
                f"block {b.id} peak {peak} exceeds memory {mem} of {b.processor!r}"
            )
        if not math.isclose(peak, b.requirement, rel_tol=1e-6, abs_tol=1e-9):
            # recorded requirement should describe the recorded order
            problems.append(
                f"block {b.id} recorded requirement {b.requirement} != recomputed {peak}"
            )

    part = partition_of(result, dag)
    q = build_quotient(dag, part)
    ok, cycle = is_acyclic(q)
    if not ok:
        problems.append(f"quotient graph is cyclic: {cycle}")
        return problems
    for b in result.blocks:
        q.verts[b.id].proc = b.processor
    bw = bottom_weights(q, system)
    if result.makespan is None or not math.isclose(
        bw.makespan, result.makespan, rel_tol=REL_TOL, abs_tol=1e-12
    ):
        problems.append(
            f"recorded makespan {result.makespan} != recomputed {bw.makespan}"
        )
    return problems
