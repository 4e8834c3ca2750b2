"""Peak memory requirement of executing a block of tasks.

A block is executed sequentially in some topological order of its members.
The resident memory at a step is the running task's own memory plus every
live file:

* an internal edge is live from its tail's step through its head's step
  (a task holds its inputs while it runs);
* a boundary-in edge is live from block start until its consumer's step,
  inclusive;
* a boundary-out edge is live from its producer's step until block end
  (cross-block sends happen when the whole block is done).

With these rules a singleton block's only step costs exactly the task's
memory requirement (inputs + outputs + own memory).

The minimum peak over all topological orders is NP-hard to find in general;
:func:`block_memory_requirement` returns a valid order and an upper bound
(best of two greedy orders), while :func:`oracle_block_memory` computes the
exact optimum for small blocks by dynamic programming over executed sets.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .workflow import WorkflowDag


class BlockView:
    """A block's members plus its incident edges classified by locality.

    Edges are (tail index, head index, volume) triples; ``internal``,
    ``boundary_in`` and ``boundary_out`` are disjoint and together cover
    exactly the edges incident to the members.
    """

    def __init__(self, dag: WorkflowDag, member_indices: list[int]):
        if not member_indices:
            raise ValueError("a block must contain at least one task")
        self.members: list[int] = list(member_indices)
        self.member_ids: list[str] = [dag.ids[i] for i in self.members]
        inside = set(self.members)
        if len(inside) != len(self.members):
            raise ValueError("duplicate members in block")
        self.internal: list[tuple[int, int, float]] = []
        self.boundary_in: list[tuple[int, int, float]] = []
        self.boundary_out: list[tuple[int, int, float]] = []
        for u in self.members:
            for w, v in dag.succ[u]:
                if w in inside:
                    self.internal.append((u, w, v))
                else:
                    self.boundary_out.append((u, w, v))
            for w, v in dag.pred[u]:
                if w not in inside:
                    self.boundary_in.append((w, u, v))

    @classmethod
    def from_members(cls, dag: WorkflowDag, member_ids) -> "BlockView":
        return cls(dag, [dag.index_of(t) for t in member_ids])

    def __len__(self) -> int:
        return len(self.members)


@dataclass
class TraversalResult:
    order: list[str]
    peak: float
    peak_step: int


def _positions(block: BlockView, dag: WorkflowDag, order) -> dict[int, int]:
    pos = {dag.index_of(t): i for i, t in enumerate(order)}
    if len(pos) != len(block.members) or set(pos) != set(block.members):
        raise ValueError("order must be a permutation of the block members")
    for u, w, _ in block.internal:
        if pos[u] >= pos[w]:
            raise ValueError(
                f"order is not topological: {dag.ids[u]!r} must precede {dag.ids[w]!r}"
            )
    return pos


def resident_memory_at_step(block: BlockView, dag: WorkflowDag, order, t: int) -> float:
    """Resident memory at step ``t`` of executing ``block`` in ``order``.

    Evaluates the liveness rules literally, edge by edge.
    """
    pos = _positions(block, dag, order)
    if not 0 <= t < len(block.members):
        raise ValueError(f"step {t} out of range for a block of {len(block.members)} tasks")
    total = dag.memory[dag.index_of(order[t])]
    for u, w, v in block.internal:
        if pos[u] <= t <= pos[w]:
            total += v
    for _, w, v in block.boundary_in:
        if pos[w] >= t:
            total += v
    for u, _, v in block.boundary_out:
        if pos[u] <= t:
            total += v
    return total


def _block_tables(dag: WorkflowDag, members: list[int]):
    """Per-member totals used by the order heuristics and the fast evaluator.

    Returns (inside, in_total, out_total, bin_total, indeg_in, children_in)
    keyed by task index, where in/out totals count every incident volume and
    bin_total only the boundary-in part.
    """
    inside = set(members)
    in_total: dict[int, float] = {}
    out_total: dict[int, float] = {}
    bin_total: dict[int, float] = {}
    indeg_in: dict[int, int] = {}
    children_in: dict[int, list[int]] = {}
    for u in members:
        it = 0.0
        bt = 0.0
        deg = 0
        for w, v in dag.pred[u]:
            it += v
            if w in inside:
                deg += 1
            else:
                bt += v
        ot = 0.0
        kids = []
        for w, v in dag.succ[u]:
            ot += v
            if w in inside:
                kids.append(w)
        in_total[u] = it
        out_total[u] = ot
        bin_total[u] = bt
        indeg_in[u] = deg
        children_in[u] = kids
    return inside, in_total, out_total, bin_total, indeg_in, children_in


def _peak_of_order(dag, order, in_total, out_total, live0):
    """Peak and argmax step of an order, via the incremental live-volume recurrence."""
    live = live0
    peak = -1.0
    peak_step = 0
    mem = dag.memory
    for t, u in enumerate(order):
        resident = live + mem[u] + out_total[u]
        if resident > peak:
            peak = resident
            peak_step = t
        live += out_total[u] - in_total[u]
    return peak, peak_step


def _order_dfs(members, in_total, out_total, indeg_in, children_in):
    # Depth-first: after a task, prefer descending into the ready child that
    # frees the most volume (most negative growth out - in).
    indeg = dict(indeg_in)
    grow = {u: out_total[u] - in_total[u] for u in members}
    roots = [u for u in members if indeg[u] == 0]
    roots.sort(key=lambda u: (grow[u], u), reverse=True)
    stack = roots
    order = []
    while stack:
        u = stack.pop()
        order.append(u)
        fresh = []
        for w in children_in[u]:
            indeg[w] -= 1
            if indeg[w] == 0:
                fresh.append(w)
        fresh.sort(key=lambda w: (grow[w], w), reverse=True)
        stack.extend(fresh)
    return order


def _order_kahn(members, in_total, out_total, indeg_in, children_in):
    # Breadth-flavoured: always run the ready task with the smallest
    # resident-set growth next.
    indeg = dict(indeg_in)
    heap = [
        (out_total[u] - in_total[u], u) for u in members if indeg[u] == 0
    ]
    heapq.heapify(heap)
    order = []
    while heap:
        _, u = heapq.heappop(heap)
        order.append(u)
        for w in children_in[u]:
            indeg[w] -= 1
            if indeg[w] == 0:
                heapq.heappush(heap, (out_total[w] - in_total[w], w))
    return order


def requirement_of_members(dag: WorkflowDag, members: list[int]):
    """Heuristic block requirement on raw member indices.

    Returns (peak, order as indices, peak_step); the peak is an upper bound
    on the optimal minimum peak.  Used directly by the mapping heuristics to
    avoid building :class:`BlockView` objects in hot loops.
    """
    if not members:
        raise ValueError("a block must contain at least one task")
    _, in_total, out_total, bin_total, indeg_in, children_in = _block_tables(dag, members)
    live0 = sum(bin_total[u] for u in members)
    order_a = _order_dfs(members, in_total, out_total, indeg_in, children_in)
    if len(order_a) != len(members):
        raise ValueError("block members do not induce an acyclic subgraph")
    peak_a, step_a = _peak_of_order(dag, order_a, in_total, out_total, live0)
    order_b = _order_kahn(members, in_total, out_total, indeg_in, children_in)
    peak_b, step_b = _peak_of_order(dag, order_b, in_total, out_total, live0)
    if peak_b < peak_a:
        return peak_b, order_b, step_b
    return peak_a, order_a, step_a


def block_memory_requirement(block: BlockView, dag: WorkflowDag) -> TraversalResult:
    """Upper bound on the block's minimum peak memory, with the order achieving it."""
    peak, order, step = requirement_of_members(dag, block.members)
    return TraversalResult([dag.ids[u] for u in order], peak, step)


def peak_for_order(block: BlockView, dag: WorkflowDag, order) -> tuple[float, int]:
    """Peak resident memory of a given order, by stepwise literal evaluation."""
    best = -1.0
    best_step = 0
    for t in range(len(block.members)):
        r = resident_memory_at_step(block, dag, order, t)
        if r > best:
            best = r
            best_step = t
    return best, best_step


_ORACLE_LIMIT = 12


def oracle_block_memory(block: BlockView, dag: WorkflowDag) -> float:
    """Exact minimum peak over all topological orders of a small block.

    Dynamic program over executed subsets (which are always downsets): the
    live volume after executing a set depends only on the set, so the state
    space is at most 2^n for n members.
    """
    n = len(block.members)
    if n > _ORACLE_LIMIT:
        raise ValueError(f"oracle limited to blocks of {_ORACLE_LIMIT} tasks, got {n}")
    members = block.members
    local = {u: i for i, u in enumerate(members)}
    _, in_total, out_total, bin_total, indeg_in, children_in = _block_tables(dag, members)
    live0 = sum(bin_total[u] for u in members)
    parent_mask = [0] * n
    for u in members:
        for w in children_in[u]:
            parent_mask[local[w]] |= 1 << local[u]
    grow = [out_total[u] - in_total[u] for u in members]
    spike = [dag.memory[u] + out_total[u] for u in members]
    full = (1 << n) - 1
    INF = float("inf")
    dp = [INF] * (full + 1)
    live = [0.0] * (full + 1)
    dp[0] = 0.0
    live[0] = live0
    for mask in range(full + 1):
        if dp[mask] is INF or dp[mask] == INF:
            continue
        base = dp[mask]
        lv = live[mask]
        for i in range(n):
            bit = 1 << i
            if mask & bit or (parent_mask[i] & mask) != parent_mask[i]:
                continue
            nxt = mask | bit
            cand = base if base > lv + spike[i] else lv + spike[i]
            if cand < dp[nxt]:
                dp[nxt] = cand
                live[nxt] = lv + grow[i]
    return dp[full]
