"""Makespan of a mapped (or partially mapped) quotient graph.

The bottom weight of a vertex is its own compute time plus the heaviest
downstream chain of communication and compute; the makespan is the largest
bottom weight.  Vertices not yet assigned to a processor are evaluated at
speed 1, which yields the estimated makespan used while an assignment is
still being built.
"""

from __future__ import annotations

from dataclasses import dataclass

from .cluster import ComputingSystem
from .quotient import QuotientGraph, topological_vertices


@dataclass
class BottomWeights:
    values: dict[int, float]
    makespan: float
    path: list[int]


def _speed(system: ComputingSystem, proc: str | None) -> float:
    return 1.0 if proc is None else system.speed_of(proc)


def bottom_weights(q: QuotientGraph, system: ComputingSystem,
                   proc_map: dict[int, str | None] | None = None) -> BottomWeights:
    """Bottom weight of every vertex, the makespan, and the critical path.

    ``proc_map`` overrides the vertices' own assignments (used to evaluate
    candidate swaps without mutating the graph).
    """
    order = topological_vertices(q)
    beta = system.bandwidth
    speeds = {}
    for vid in order:
        proc = q.verts[vid].proc if proc_map is None else proc_map.get(vid)
        speeds[vid] = _speed(system, proc)
    b: dict[int, float] = {}
    for vid in reversed(order):
        own = q.verts[vid].weight / speeds[vid]
        children = q.succ[vid]
        if children:
            own += max(vol / beta + b[w] for w, vol in children.items())
        b[vid] = own
    mu = max(b.values())
    return BottomWeights(b, mu, _argmax_chain(q, system, b))


def _argmax_chain(q: QuotientGraph, system: ComputingSystem, b: dict[int, float]) -> list[int]:
    mu = max(b.values())
    start = min(vid for vid, val in b.items() if val == mu)
    beta = system.bandwidth
    path = [start]
    u = start
    while q.succ[u]:
        best_w = None
        best_val = None
        for w in sorted(q.succ[u]):
            val = q.succ[u][w] / beta + b[w]
            if best_val is None or val > best_val:
                best_val = val
                best_w = w
        path.append(best_w)
        u = best_w
    return path


def critical_path(bw: BottomWeights, q: QuotientGraph) -> list[int]:
    """The chain of vertices realizing the makespan (argmax child at each step)."""
    return list(bw.path)


def makespan(q: QuotientGraph, system: ComputingSystem,
             proc_map: dict[int, str | None] | None = None) -> float:
    return bottom_weights(q, system, proc_map).makespan


_ORACLE_LIMIT = 10


def oracle_makespan(q: QuotientGraph, system: ComputingSystem) -> float:
    """Exhaustive check value: heaviest source-to-sink path by enumeration."""
    if len(q.verts) > _ORACLE_LIMIT:
        raise ValueError(f"oracle limited to {_ORACLE_LIMIT} vertices, got {len(q.verts)}")
    topological_vertices(q)  # raises on cycles
    beta = system.bandwidth
    compute = {
        vid: v.weight / _speed(system, v.proc) for vid, v in q.verts.items()
    }
    best = 0.0
    sources = [vid for vid in q.verts if not q.pred[vid]]

    def walk(u: int, acc: float):
        nonlocal best
        acc += compute[u]
        if not q.succ[u]:
            if acc > best:
                best = acc
            return
        for w, vol in q.succ[u].items():
            walk(w, acc + vol / beta)

    for s in sources:
        walk(s, 0.0)
    return best
