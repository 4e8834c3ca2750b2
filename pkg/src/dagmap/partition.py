"""Acyclic k-way partitioning of a workflow (or of one block of it).

The built-in partitioner chunks a topological order into k contiguous,
weight-balanced pieces (trivially acyclic) and then improves the edge cut
with single-vertex moves that keep the part labels monotone along every
edge, which preserves acyclicity without any graph search.  An external
partitioning tool can be plugged in through a file-based exchange; its
output goes through the same coverage and acyclicity checks.
"""

from __future__ import annotations

import os
import subprocess
import tempfile
from dataclasses import dataclass

import numpy as np

from .quotient import Partition, build_quotient, is_acyclic
from .workflow import WorkflowDag

_REFINE_PASSES = 4


@dataclass
class PartitionRequest:
    parts: int
    epsilon: float = 0.1
    weight_kind: str = "work"  # "work" | "memory-requirement"
    seed: int = 0

    def __post_init__(self):
        if self.parts < 1:
            raise ValueError("parts must be >= 1")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.weight_kind not in ("work", "memory-requirement"):
            raise ValueError(f"unknown weight kind {self.weight_kind!r}")


def seeded_topo_order(dag: WorkflowDag, seed: int) -> list[int]:
    """A topological order with seed-controlled tie-breaking among ready tasks."""
    import heapq
    import random

    rank = list(range(dag.n))
    random.Random(seed).shuffle(rank)
    indeg = [len(p) for p in dag.pred]
    heap = [(rank[i], i) for i in range(dag.n) if indeg[i] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        _, u = heapq.heappop(heap)
        order.append(u)
        for w, _ in dag.succ[u]:
            indeg[w] -= 1
            if indeg[w] == 0:
                heapq.heappush(heap, (rank[w], w))
    if len(order) != dag.n:
        raise ValueError("workflow contains a cycle")
    return order


def _vertex_weights(dag: WorkflowDag, kind: str) -> list[float]:
    if kind == "work":
        return dag.work
    return dag.requirements()


def _chunk(order: list[int], weights: list[float], k: int) -> list[int]:
    """Part label per order position: contiguous chunks of near-equal weight."""
    n = len(order)
    cum = np.cumsum([weights[u] for u in order])
    total = float(cum[-1])
    seps: list[int] = []
    prev = 0
    for i in range(1, k):
        target = total * i / k
        s = int(np.searchsorted(cum, target, side="left")) + 1
        s = max(s, prev + 1)          # keep every part non-empty
        s = min(s, n - (k - i))       # leave room for the remaining parts
        seps.append(s)
        prev = s
    labels = [0] * n
    part = 0
    bounds = seps + [n]
    pos = 0
    for part, end in enumerate(bounds):
        while pos < end:
            labels[pos] = part
            pos += 1
    return labels


def _refine(dag: WorkflowDag, order: list[int], labels: dict[int, int],
            weights: list[float], k: int, epsilon: float, inside: set[int]) -> None:
    """Move single vertices between parts to reduce cut volume.

    A vertex may take any label between the largest label among its
    in-neighbours and the smallest among its out-neighbours; within that
    window every edge keeps tail-label <= head-label, so the induced
    quotient stays acyclic by construction.
    """
    ideal = sum(weights[u] for u in inside) / k
    cap = (1.0 + epsilon) * ideal
    part_weight = [0.0] * k
    part_size = [0] * k
    for u in inside:
        part_weight[labels[u]] += weights[u]
        part_size[labels[u]] += 1
    cap = max(cap, max((weights[u] for u in inside), default=0.0))
    for _ in range(_REFINE_PASSES):
        moved = False
        for u in order:
            p = labels[u]
            if part_size[p] <= 1:
                continue
            lo, hi = 0, k - 1
            volmap: dict[int, float] = {}
            for w, vol in dag.succ[u]:
                if w in inside:
                    lw = labels[w]
                    volmap[lw] = volmap.get(lw, 0.0) + vol
                    if lw < hi:
                        hi = lw
            for w, vol in dag.pred[u]:
                if w in inside:
                    lw = labels[w]
                    volmap[lw] = volmap.get(lw, 0.0) + vol
                    if lw > lo:
                        lo = lw
            if lo > hi or (lo == hi == p):
                continue
            here = volmap.get(p, 0.0)
            best_t, best_gain = p, 0.0
            for t, vol in volmap.items():
                if t == p or not lo <= t <= hi:
                    continue
                if part_weight[t] + weights[u] > cap:
                    continue
                gain = vol - here
                if gain > best_gain or (gain == best_gain and gain > 0 and t < best_t):
                    best_t, best_gain = t, gain
            if best_t != p:
                part_weight[p] -= weights[u]
                part_size[p] -= 1
                labels[u] = best_t
                part_weight[best_t] += weights[u]
                part_size[best_t] += 1
                moved = True
        if not moved:
            break


def _cut_volume(dag: WorkflowDag, labels: dict[int, int]) -> float:
    total = 0.0
    for u, lu in labels.items():
        for w, vol in dag.succ[u]:
            lw = labels.get(w)
            if lw is not None and lw != lu:
                total += vol
    return total


def partition(dag: WorkflowDag, request: PartitionRequest,
              members: list[int] | None = None,
              order: list[int] | None = None) -> Partition:
    """Partition the workflow (or the induced subgraph on ``members``).

    Guarantees: parts are non-empty and disjoint, they cover exactly the
    input vertex set, and the induced quotient graph is acyclic.  Balance to
    within ``(1 + epsilon) * total/k`` is best effort.  Deterministic for a
    fixed (input, request) pair.
    """
    if members is None:
        local_order = order if order is not None else seeded_topo_order(dag, request.seed)
        inside = set(range(dag.n))
    else:
        inside = set(members)
        if order is not None:
            local_order = [u for u in order if u in inside]
        else:
            full = seeded_topo_order(dag, request.seed)
            local_order = [u for u in full if u in inside]
    n = len(local_order)
    if request.parts > n:
        raise ValueError(f"cannot split {n} tasks into {request.parts} parts")
    weights = _vertex_weights(dag, request.weight_kind)
    pos_labels = _chunk(local_order, weights, request.parts)
    labels = {u: pos_labels[i] for i, u in enumerate(local_order)}
    if request.parts > 1:
        _refine(dag, local_order, labels, weights, request.parts, request.epsilon, inside)
    block_lists: list[list[int]] = [[] for _ in range(request.parts)]
    for u in local_order:
        block_lists[labels[u]].append(u)
    part = Partition.from_blocks(block_lists)
    part.cut_volume = _cut_volume(dag, part.labels)
    return part


class ExternalPartitionerError(ValueError):
    pass


class ExternalPartitioner:
    """Drives an external acyclic partitioning tool via files.

    The subgraph is written as DOT to a temporary file; the tool is invoked
    with the placeholders ``{input}``, ``{output}``, ``{parts}``,
    ``{epsilon}`` and ``{seed}`` substituted into its argument list, and must
    write one line per task, ``<task-id> <part-number>``, to the output
    file.  Results failing coverage or acyclicity checks are rejected.
    """

    def __init__(self, command: list[str]):
        if not command:
            raise ExternalPartitionerError("empty external partitioner command")
        exe = command[0]
        found = os.path.isfile(exe) or _which(exe)
        if not found:
            raise ExternalPartitionerError(f"external partitioner executable not found: {exe!r}")
        self.command = list(command)

    def partition(self, dag: WorkflowDag, request: PartitionRequest,
                  members: list[int] | None = None,
                  order: list[int] | None = None) -> Partition:
        from .dotio import serialize_workflow

        if members is None:
            members = list(range(dag.n))
        sub = _induced_subgraph(dag, members)
        with tempfile.TemporaryDirectory(prefix="dagmap-part-") as tmp:
            in_path = os.path.join(tmp, "graph.dot")
            out_path = os.path.join(tmp, "parts.txt")
            with open(in_path, "w") as f:
                f.write(serialize_workflow(sub))
            argv = [
                arg.format(input=in_path, output=out_path, parts=request.parts,
                           epsilon=request.epsilon, seed=request.seed)
                for arg in self.command
            ]
            proc = subprocess.run(argv, capture_output=True, text=True)
            if proc.returncode != 0:
                raise ExternalPartitionerError(
                    f"external partitioner failed (exit {proc.returncode}): {proc.stderr.strip()}"
                )
            if not os.path.exists(out_path):
                raise ExternalPartitionerError("external partitioner wrote no output file")
            with open(out_path) as f:
                assignment = _parse_part_file(f.read())
        return _validated_partition(dag, members, assignment)


def register_external_partitioner(command: list[str]) -> ExternalPartitioner:
    """Validate availability of an external tool and return a handle for it."""
    return ExternalPartitioner(command)


def _which(name: str) -> str | None:
    import shutil

    return shutil.which(name)


def _induced_subgraph(dag: WorkflowDag, members: list[int]) -> WorkflowDag:
    from .workflow import Edge, Task

    inside = set(members)
    tasks = [Task(dag.ids[u], dag.work[u], dag.memory[u]) for u in members]
    edges = [
        Edge(dag.ids[u], dag.ids[w], vol)
        for u in members
        for w, vol in dag.succ[u]
        if w in inside
    ]
    return WorkflowDag(tasks, edges)


def _parse_part_file(text: str) -> dict[str, int]:
    assignment: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        pieces = line.split()
        if len(pieces) != 2:
            raise ExternalPartitionerError(f"part file line {lineno}: expected '<task> <part>'")
        tid, part = pieces
        try:
            assignment[tid] = int(part)
        except ValueError:
            raise ExternalPartitionerError(f"part file line {lineno}: bad part number {part!r}") from None
    return assignment


def _validated_partition(dag: WorkflowDag, members: list[int],
                         assignment: dict[str, int]) -> Partition:
    inside = set(members)
    labels: dict[int, int] = {}
    for tid, part in assignment.items():
        idx = dag.index.get(tid)
        if idx is None or idx not in inside:
            raise ExternalPartitionerError(f"part file names unknown task {tid!r}")
        labels[idx] = part
    missing = [dag.ids[u] for u in members if u not in labels]
    if missing:
        raise ExternalPartitionerError(f"part file misses tasks: {missing[:5]}")
    part_ids = sorted(set(labels.values()))
    remap = {p: i for i, p in enumerate(part_ids)}
    blocks: dict[int, list[int]] = {i: [] for i in range(len(part_ids))}
    for u in members:
        blocks[remap[labels[u]]].append(u)
    result = Partition({u: remap[labels[u]] for u in members}, blocks)
    sub = _induced_subgraph(dag, members)
    sub_labels = {sub.index_of(dag.ids[u]): result.labels[u] for u in members}
    sub_part = Partition(sub_labels, {
        bid: [sub.index_of(dag.ids[u]) for u in mem] for bid, mem in blocks.items()
    })
    ok, cycle = is_acyclic(build_quotient(sub, sub_part))
    if not ok:
        raise ExternalPartitionerError(
            f"external partition induces a cyclic quotient (cycle through parts {cycle})"
        )
    result.cut_volume = _cut_volume(dag, result.labels)
    return result
