"""Workflow DAGs: tasks, data-dependency edges, validation, traversal orders.

Task ids are opaque strings.  A dense integer index is assigned at
construction time so that the heavier algorithms can run on array-based
adjacency instead of string dictionaries.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field


@dataclass(frozen=True)
class Task:
    """One workflow task: abstract work amount plus its own memory footprint."""

    id: str
    work: float = 1.0
    memory: float = 0.0


@dataclass(frozen=True)
class Edge:
    """A data dependency: ``tail`` writes a file of size ``volume`` read by ``head``."""

    tail: str
    head: str
    volume: float = 0.0


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, kind: str, message: str) -> None:
        self.violations.append(Violation(kind, message))

    def kinds(self) -> list[str]:
        return [v.kind for v in self.violations]

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return "; ".join(f"{v.kind}: {v.message}" for v in self.violations)


class WorkflowDag:
    """A workflow graph.

    Construction is permissive: malformed input (cycles, dangling edge
    endpoints, negative weights, duplicates) is stored and reported by
    :func:`validate` rather than raised, so that callers can show every
    problem at once.  Operations that require a well-formed DAG raise
    ``ValueError`` on violations they cannot tolerate.

    Immutable after construction; safe to share between threads.
    """

    def __init__(self, tasks, edges):
        self.tasks: list[Task] = list(tasks)
        self.edges: list[Edge] = list(edges)
        self.ids: list[str] = [t.id for t in self.tasks]
        self.index: dict[str, int] = {}
        self._duplicate_tasks: list[str] = []
        for i, t in enumerate(self.tasks):
            if t.id in self.index:
                self._duplicate_tasks.append(t.id)
            else:
                self.index[t.id] = i
        n = len(self.tasks)
        self.work: list[float] = [float(t.work) for t in self.tasks]
        self.memory: list[float] = [float(t.memory) for t in self.tasks]
        # Adjacency over dense indices; parallel edges and self-loops are
        # kept out of it (they are validation errors, not data).
        self.succ: list[list[tuple[int, float]]] = [[] for _ in range(n)]
        self.pred: list[list[tuple[int, float]]] = [[] for _ in range(n)]
        self._dangling: list[Edge] = []
        self._duplicate_edges: list[Edge] = []
        self._self_loops: list[Edge] = []
        seen: set[tuple[int, int]] = set()
        for e in self.edges:
            ti = self.index.get(e.tail)
            hi = self.index.get(e.head)
            if ti is None or hi is None:
                self._dangling.append(e)
                continue
            if ti == hi:
                self._self_loops.append(e)
                continue
            key = (ti, hi)
            if key in seen:
                self._duplicate_edges.append(e)
                continue
            seen.add(key)
            v = float(e.volume)
            self.succ[ti].append((hi, v))
            self.pred[hi].append((ti, v))
        self._requirements: list[float] | None = None

    # -- basic accessors -------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.tasks)

    def id_of(self, i: int) -> str:
        return self.ids[i]

    def index_of(self, task_id: str) -> int:
        try:
            return self.index[task_id]
        except KeyError:
            raise ValueError(f"unknown task id {task_id!r}") from None

    def parents(self, task_id: str) -> list[str]:
        return [self.ids[i] for i, _ in self.pred[self.index_of(task_id)]]

    def children(self, task_id: str) -> list[str]:
        return [self.ids[i] for i, _ in self.succ[self.index_of(task_id)]]

    # -- memory requirement ----------------------------------------------

    def requirement_index(self, i: int) -> float:
        """Memory requirement of task ``i``: input volumes + output volumes + own memory."""
        return (
            sum(v for _, v in self.pred[i])
            + sum(v for _, v in self.succ[i])
            + self.memory[i]
        )

    def requirements(self) -> list[float]:
        """Per-task memory requirements, cached."""
        if self._requirements is None:
            self._requirements = [self.requirement_index(i) for i in range(self.n)]
        return self._requirements

    # -- traversal --------------------------------------------------------

    def topo_indices(self) -> list[int]:
        """Topological order over dense indices, ties broken by ascending task id."""
        n = self.n
        indeg = [len(p) for p in self.pred]
        ready = [(self.ids[i], i) for i in range(n) if indeg[i] == 0]
        heapq.heapify(ready)
        order: list[int] = []
        while ready:
            _, u = heapq.heappop(ready)
            order.append(u)
            for w, _ in self.succ[u]:
                indeg[w] -= 1
                if indeg[w] == 0:
                    heapq.heappush(ready, (self.ids[w], w))
        if len(order) != n:
            cycle = self._find_cycle(set(range(n)) - set(order))
            names = [self.ids[i] for i in cycle]
            raise ValueError(f"workflow contains a cycle: {' -> '.join(names)}")
        return order

    def _find_cycle(self, residual: set[int]) -> list[int]:
        # Every residual vertex lies on or leads into a cycle; walk successors
        # restricted to the residual set until a vertex repeats.
        start = min(residual)
        seen: dict[int, int] = {}
        path: list[int] = []
        u = start
        while u not in seen:
            seen[u] = len(path)
            path.append(u)
            u = next(w for w, _ in self.succ[u] if w in residual)
        return path[seen[u]:] + [u]


def validate(dag: WorkflowDag) -> ValidationReport:
    """Check every structural invariant; violations are data, not failures."""
    report = ValidationReport()
    for tid in dag._duplicate_tasks:
        report.add("duplicate-task", f"task id {tid!r} defined more than once")
    for e in dag._dangling:
        missing = e.tail if e.tail not in dag.index else e.head
        report.add("dangling", f"edge ({e.tail!r} -> {e.head!r}) references unknown task {missing!r}")
    for e in dag._self_loops:
        report.add("self-loop", f"edge ({e.tail!r} -> {e.head!r}) is a self-loop")
    for e in dag._duplicate_edges:
        report.add("duplicate-edge", f"edge ({e.tail!r} -> {e.head!r}) appears more than once")
    for t in dag.tasks:
        if t.work < 0:
            report.add("negative", f"task {t.id!r} has negative work {t.work}")
        if t.memory < 0:
            report.add("negative", f"task {t.id!r} has negative memory {t.memory}")
    for e in dag.edges:
        if e.volume < 0:
            report.add("negative", f"edge ({e.tail!r} -> {e.head!r}) has negative volume {e.volume}")
    try:
        dag.topo_indices()
    except ValueError as exc:
        report.add("cycle", str(exc))
    return report


def task_memory_requirement(dag: WorkflowDag, task_id: str) -> float:
    """Memory needed to run one task: all input files, all output files, own memory."""
    return dag.requirement_index(dag.index_of(task_id))


def topological_order(dag: WorkflowDag) -> list[str]:
    """Task ids in topological order, deterministic (ties by ascending id)."""
    return [dag.ids[i] for i in dag.topo_indices()]
