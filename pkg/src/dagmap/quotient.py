"""Partitions of a workflow and the induced quotient graph.

The quotient graph has one vertex per block, vertex weight equal to the
block's total work, and one edge per ordered block pair carrying the summed
volume of all crossing workflow edges.  Merges are journaled so tentative
merges can be rolled back in O(1) structural work, which the merging stage
relies on heavily.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .blockmem import BlockView
from .workflow import WorkflowDag


class Partition:
    """Assignment of every covered task to exactly one block.

    ``labels`` maps dense task index to block id; ``blocks`` maps block id to
    its member indices.  A partition may cover only a subset of the workflow
    (used when re-partitioning a single block).
    """

    def __init__(self, labels: dict[int, int], blocks: dict[int, list[int]],
                 cut_volume: float | None = None):
        self.labels = labels
        self.blocks = blocks
        self.cut_volume = cut_volume

    @classmethod
    def from_blocks(cls, block_lists: list[list[int]], first_id: int = 0) -> "Partition":
        labels: dict[int, int] = {}
        blocks: dict[int, list[int]] = {}
        for off, members in enumerate(block_lists):
            bid = first_id + off
            blocks[bid] = list(members)
            for u in members:
                if u in labels:
                    raise ValueError(f"task index {u} present in two blocks")
                labels[u] = bid
        return cls(labels, blocks)

    @property
    def k(self) -> int:
        return len(self.blocks)

    def block_of(self, task_index: int) -> int:
        return self.labels[task_index]

    def block_of_id(self, dag: WorkflowDag, task_id: str) -> int:
        return self.labels[dag.index_of(task_id)]

    def view(self, dag: WorkflowDag, block_id: int) -> BlockView:
        return BlockView(dag, self.blocks[block_id])

    def validate(self, dag: WorkflowDag) -> None:
        covered = set(self.labels)
        for bid, members in self.blocks.items():
            if not members:
                raise ValueError(f"block {bid} is empty")
            for u in members:
                if self.labels.get(u) != bid:
                    raise ValueError(f"task index {u} inconsistent between labels and block {bid}")
        if len(covered) != sum(len(m) for m in self.blocks.values()):
            raise ValueError("blocks overlap")


@dataclass
class QuotientVertex:
    id: int
    weight: float
    members: list[int]
    proc: str | None = None
    counter: int = 0
    # cached block memory requirement, filled in lazily by the heuristics
    req: float | None = None
    req_order: list[int] | None = None

    def invalidate(self) -> None:
        self.req = None
        self.req_order = None


@dataclass
class _MergeRecord:
    merged: int
    a: int
    b: int
    va: QuotientVertex
    vb: QuotientVertex
    succ_a: dict[int, float]
    pred_a: dict[int, float]
    succ_b: dict[int, float]
    pred_b: dict[int, float]


class QuotientGraph:
    """Mutable quotient graph with an undo journal for merges.

    Single-owner: not safe for concurrent mutation.  Independent copies may
    be processed in parallel.
    """

    def __init__(self):
        self.verts: dict[int, QuotientVertex] = {}
        self.succ: dict[int, dict[int, float]] = {}
        self.pred: dict[int, dict[int, float]] = {}
        self._next_id = 0
        self._journal: list[_MergeRecord] = []

    # -- construction ------------------------------------------------------

    def add_vertex(self, weight: float, members: list[int], proc: str | None = None,
                   vid: int | None = None) -> int:
        if vid is None:
            vid = self._next_id
        if vid in self.verts:
            raise ValueError(f"vertex id {vid} already present")
        self._next_id = max(self._next_id, vid + 1)
        self.verts[vid] = QuotientVertex(vid, weight, list(members), proc)
        self.succ[vid] = {}
        self.pred[vid] = {}
        return vid

    def add_edge(self, a: int, b: int, volume: float) -> None:
        if a == b:
            raise ValueError("self-edges are not allowed in a quotient graph")
        self.succ[a][b] = self.succ[a].get(b, 0.0) + volume
        self.pred[b][a] = self.pred[b].get(a, 0.0) + volume

    def copy(self) -> "QuotientGraph":
        g = QuotientGraph()
        for vid, v in self.verts.items():
            g.verts[vid] = QuotientVertex(v.id, v.weight, list(v.members), v.proc,
                                          v.counter, v.req,
                                          list(v.req_order) if v.req_order else None)
            g.succ[vid] = dict(self.succ[vid])
            g.pred[vid] = dict(self.pred[vid])
        g._next_id = self._next_id
        return g

    # -- accessors ----------------------------------------------------------

    @property
    def vertex_ids(self) -> list[int]:
        return list(self.verts)

    def __len__(self) -> int:
        return len(self.verts)

    def total_weight(self) -> float:
        return sum(v.weight for v in self.verts.values())

    def total_edge_volume(self) -> float:
        return sum(v for d in self.succ.values() for v in d.values())

    def assigned(self) -> dict[int, str]:
        return {vid: v.proc for vid, v in self.verts.items() if v.proc is not None}

    def structure(self):
        """Content snapshot for structural-equality comparisons."""
        verts = {
            vid: (v.weight, tuple(sorted(v.members)), v.proc, v.counter)
            for vid, v in self.verts.items()
        }
        edges = {
            (a, b): vol for a, d in self.succ.items() for b, vol in d.items()
        }
        return verts, edges

    # -- merge / unmerge -----------------------------------------------------

    def merge(self, a: int, b: int) -> int:
        """Merge vertices ``a`` and ``b`` into a fresh vertex and return its id.

        External edges are united with parallel volumes summed; edges between
        ``a`` and ``b`` disappear.  The merged vertex inherits the processor
        of whichever operand was assigned (``a`` wins if both were) and a
        reset reinsert counter.  Reversible via :meth:`unmerge`.
        """
        if a == b:
            raise ValueError("cannot merge a vertex with itself")
        va = self.verts.pop(a)
        vb = self.verts.pop(b)
        succ_a, pred_a = self.succ.pop(a), self.pred.pop(a)
        succ_b, pred_b = self.succ.pop(b), self.pred.pop(b)
        for x in succ_a:
            if x != b:
                del self.pred[x][a]
        for x in pred_a:
            if x != b:
                del self.succ[x][a]
        for x in succ_b:
            if x != a:
                del self.pred[x][b]
        for x in pred_b:
            if x != a:
                del self.succ[x][b]
        mid = self._next_id
        self._next_id += 1
        proc = va.proc if va.proc is not None else vb.proc
        vm = QuotientVertex(mid, va.weight + vb.weight, va.members + vb.members, proc)
        self.verts[mid] = vm
        succ_m: dict[int, float] = {}
        pred_m: dict[int, float] = {}
        for src, skip in ((succ_a, b), (succ_b, a)):
            for x, vol in src.items():
                if x != skip:
                    succ_m[x] = succ_m.get(x, 0.0) + vol
        for src, skip in ((pred_a, b), (pred_b, a)):
            for x, vol in src.items():
                if x != skip:
                    pred_m[x] = pred_m.get(x, 0.0) + vol
        self.succ[mid] = succ_m
        self.pred[mid] = pred_m
        for x, vol in succ_m.items():
            self.pred[x][mid] = vol
        for x, vol in pred_m.items():
            self.succ[x][mid] = vol
        self._journal.append(_MergeRecord(mid, a, b, va, vb, succ_a, pred_a, succ_b, pred_b))
        return mid

    def unmerge(self, merged: int) -> None:
        """Undo the most recent merge, which must have produced ``merged``."""
        if not self._journal or self._journal[-1].merged != merged:
            raise ValueError(f"vertex {merged} is not the most recent merge product")
        rec = self._journal.pop()
        succ_m = self.succ.pop(merged)
        pred_m = self.pred.pop(merged)
        del self.verts[merged]
        for x in succ_m:
            del self.pred[x][merged]
        for x in pred_m:
            del self.succ[x][merged]
        self.verts[rec.a] = rec.va
        self.verts[rec.b] = rec.vb
        self.succ[rec.a], self.pred[rec.a] = rec.succ_a, rec.pred_a
        self.succ[rec.b], self.pred[rec.b] = rec.succ_b, rec.pred_b
        for x, vol in rec.succ_a.items():
            if x != rec.b:
                self.pred[x][rec.a] = vol
        for x, vol in rec.pred_a.items():
            if x != rec.b:
                self.succ[x][rec.a] = vol
        for x, vol in rec.succ_b.items():
            if x != rec.a:
                self.pred[x][rec.b] = vol
        for x, vol in rec.pred_b.items():
            if x != rec.a:
                self.succ[x][rec.b] = vol

    def journal_depth(self) -> int:
        return len(self._journal)

    # -- cycle queries ---------------------------------------------------------

    def two_cycle_partner(self, vid: int) -> int | None:
        """Smallest vertex forming a 2-cycle with ``vid``, if any."""
        both = set(self.succ[vid]) & set(self.pred[vid])
        return min(both) if both else None

    def has_cycle_through(self, vid: int) -> bool:
        """True iff some directed cycle passes through ``vid`` (BFS over successors)."""
        seen = set()
        frontier = list(self.succ[vid])
        while frontier:
            nxt = []
            for x in frontier:
                if x == vid:
                    return True
                if x in seen:
                    continue
                seen.add(x)
                nxt.extend(self.succ[x])
            frontier = nxt
        return False


def build_quotient(dag: WorkflowDag, partition: Partition) -> QuotientGraph:
    """Aggregate a partition into its quotient graph (which may be cyclic)."""
    q = QuotientGraph()
    work = dag.work
    for bid, members in partition.blocks.items():
        q.add_vertex(sum(work[u] for u in members), members, vid=bid)
    labels = partition.labels
    for u, bu in labels.items():
        su = q.succ[bu]
        for w, vol in dag.succ[u]:
            bw = labels.get(w)
            if bw is None or bw == bu:
                continue
            su[bw] = su.get(bw, 0.0) + vol
    for a, d in q.succ.items():
        for b, vol in d.items():
            q.pred[b][a] = vol
    return q


def is_acyclic(q: QuotientGraph) -> tuple[bool, list[int] | None]:
    """Topological check; on failure also return one shortest cycle found."""
    indeg = {vid: len(q.pred[vid]) for vid in q.verts}
    ready = sorted(vid for vid, d in indeg.items() if d == 0)
    done = 0
    stack = ready
    while stack:
        u = stack.pop()
        done += 1
        for w in q.succ[u]:
            indeg[w] -= 1
            if indeg[w] == 0:
                stack.append(w)
    if done == len(q.verts):
        return True, None
    residual = {vid for vid, d in indeg.items() if d > 0}
    return False, _shortest_cycle(q, residual)


def _shortest_cycle(q: QuotientGraph, residual: set[int]) -> list[int]:
    best: list[int] | None = None
    for start in sorted(residual):
        if best is not None and len(best) == 2:
            break
        parent = {start: None}
        frontier = [start]
        found = None
        while frontier and found is None:
            nxt = []
            for u in frontier:
                for w in q.succ[u]:
                    if w not in residual:
                        continue
                    if w == start:
                        found = u
                        break
                    if w not in parent:
                        parent[w] = u
                        nxt.append(w)
                if found is not None:
                    break
            frontier = nxt
        if found is None:
            continue
        path = [found]
        while parent[path[-1]] is not None:
            path.append(parent[path[-1]])
        path.reverse()
        if best is None or len(path) < len(best):
            best = path
    assert best is not None
    return best


def topological_vertices(q: QuotientGraph) -> list[int]:
    """Vertex ids in topological order (ascending-id ties); error on cycles."""
    import heapq as _hq

    indeg = {vid: len(q.pred[vid]) for vid in q.verts}
    heap = [vid for vid, d in indeg.items() if d == 0]
    _hq.heapify(heap)
    order = []
    while heap:
        u = _hq.heappop(heap)
        order.append(u)
        for w in q.succ[u]:
            indeg[w] -= 1
            if indeg[w] == 0:
                _hq.heappush(heap, w)
    if len(order) != len(q.verts):
        _, cycle = is_acyclic(q)
        raise ValueError(f"quotient graph is cyclic: {cycle}")
    return order
