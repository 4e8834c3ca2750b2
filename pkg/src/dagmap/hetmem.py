"""Memory-aware baseline mapping.

Follow one memory-efficient traversal of the whole workflow and cut it
greedily into blocks: tasks join the current block while its peak memory
(under the traversal order) stays within the current processor's memory;
the overflowing task starts the next block on the next processor, working
through processors in descending memory order.  No makespan optimization is
attempted.
"""

from __future__ import annotations

from .blockmem import requirement_of_members
from .cluster import ComputingSystem, sort_by_memory_desc
from .makespan import bottom_weights
from .quotient import Partition, build_quotient, is_acyclic
from .result import BlockReport, MappingResult
from .workflow import WorkflowDag


def hetmem(dag: WorkflowDag, system: ComputingSystem) -> MappingResult:
    """Greedy memory-first mapping; returns an infeasible result when the
    platform cannot hold the workflow under this strategy."""
    if dag.n == 0:
        raise ValueError("cannot map an empty workflow")
    _, order, _ = requirement_of_members(dag, list(range(dag.n)))
    proc_ids = sort_by_memory_desc(system)
    mem_of = {p.id: p.memory for p in system.processors}

    blocks: list[tuple[list[int], float]] = []
    cursor = 0
    cur: list[int] = []
    cur_set: set[int] = set()
    live = 0.0
    peak = float("-inf")
    memory = dag.memory

    def close_block():
        nonlocal cur, cur_set, live, peak
        blocks.append((cur, peak))
        cur, cur_set, live, peak = [], set(), 0.0, float("-inf")

    for u in order:
        in_total = 0.0
        bin_u = 0.0
        for w, v in dag.pred[u]:
            in_total += v
            if w not in cur_set:
                bin_u += v
        out_total = sum(v for _, v in dag.succ[u])
        while True:
            cap = mem_of[proc_ids[cursor]]
            resident = live + bin_u + memory[u] + out_total
            new_peak = resident if not cur else max(peak + bin_u, resident)
            if new_peak <= cap:
                cur.append(u)
                cur_set.add(u)
                live += bin_u + out_total - in_total
                peak = new_peak
                break
            if not cur:
                # Alone it already overflows; later processors are no bigger.
                return MappingResult(
                    algorithm="hetmem", feasible=False, bandwidth=system.bandwidth,
                    diagnostic=(
                        f"task {dag.ids[u]!r} needs {resident} memory but the largest "
                        f"remaining processor {proc_ids[cursor]!r} has {cap}"
                    ),
                )
            close_block()
            cursor += 1
            if cursor >= len(proc_ids):
                return MappingResult(
                    algorithm="hetmem", feasible=False, bandwidth=system.bandwidth,
                    diagnostic=(
                        f"tasks remain (starting at {dag.ids[u]!r}) but all "
                        f"{len(proc_ids)} processors are occupied"
                    ),
                )
            bin_u = in_total  # fresh block: every parent is now outside
    close_block()

    part = Partition.from_blocks([members for members, _ in blocks])
    q = build_quotient(dag, part)
    ok, cycle = is_acyclic(q)
    if not ok:  # cannot happen for traversal segments; guard stays as a check
        raise AssertionError(f"traversal segments induced a cyclic quotient: {cycle}")
    reports = []
    for bid, (members, blk_peak) in enumerate(blocks):
        proc = system.processor(proc_ids[bid])
        q.verts[bid].proc = proc.id
        reports.append(BlockReport(
            id=bid, processor=proc.id, processor_memory=proc.memory,
            processor_speed=proc.speed, requirement=blk_peak,
            fits=blk_peak <= proc.memory, work=sum(dag.work[u] for u in members),
            tasks=[dag.ids[u] for u in members], order=[dag.ids[u] for u in members],
        ))
    bw = bottom_weights(q, system)
    return MappingResult(
        algorithm="hetmem", feasible=True, bandwidth=system.bandwidth,
        makespan=bw.makespan, blocks=reports, critical_path=bw.path,
        k_used=len(blocks),
        step_trace=[{"step": "traverse-and-cut", "blocks": len(blocks)}],
    )
