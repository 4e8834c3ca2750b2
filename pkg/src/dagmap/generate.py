"""Synthetic workflow generation.

Four structural families spanning the range from no parallelism to maximal
fanout.  Task work is drawn uniformly from [1, 1000], task memory from
[1, 192] and edge volumes from [1, 10]; all draws are controlled by the
seed, so identical calls yield identical graphs.
"""

from __future__ import annotations

import hashlib
import math
import random

from .workflow import Edge, Task, WorkflowDag

FAMILIES = ("fork-join", "chain-of-stages", "fanout", "diamond-mesh")

WORK_RANGE = (1.0, 1000.0)
MEMORY_RANGE = (1.0, 192.0)
VOLUME_RANGE = (1.0, 10.0)


def _rng(family: str, n_tasks: int, seed: int) -> random.Random:
    material = f"{family}:{n_tasks}:{seed}".encode()
    digest = hashlib.sha256(material).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def _task_names(n: int) -> list[str]:
    width = len(str(max(n - 1, 1)))
    return [f"t{i:0{width}d}" for i in range(n)]


def _fanout_edges(n: int) -> list[tuple[int, int]]:
    if n == 1:
        return []
    if n == 2:
        return [(0, 1)]
    sink = n - 1
    edges = [(0, i) for i in range(1, sink)]
    edges += [(i, sink) for i in range(1, sink)]
    return edges


def _fork_join_edges(n: int, rng: random.Random) -> list[tuple[int, int]]:
    # alternating join vertices and fans: j0 -> fan -> j1 -> fan -> ...
    edges = []
    joint = 0
    nxt = 1
    while nxt < n:
        remaining = n - nxt
        if remaining == 1:
            edges.append((joint, nxt))
            joint = nxt
            nxt += 1
            continue
        width = rng.randint(2, min(8, remaining - 1)) if remaining > 2 else 1
        fan = list(range(nxt, nxt + width))
        nxt += width
        if nxt >= n:
            for b in fan:
                edges.append((joint, b))
            joint = fan[-1]
            break
        join = nxt
        nxt += 1
        for b in fan:
            edges.append((joint, b))
            edges.append((b, join))
        joint = join
    return edges


def _chain_of_stages_edges(n: int, rng: random.Random) -> list[tuple[int, int]]:
    stages: list[list[int]] = []
    nxt = 0
    while nxt < n:
        width = min(rng.choice((1, 1, 2, 2, 3)), n - nxt)
        stages.append(list(range(nxt, nxt + width)))
        nxt += width
    edges = []
    for prev, cur in zip(stages, stages[1:]):
        for b in cur:
            for a in prev:
                edges.append((a, b))
    return edges


def _diamond_mesh_edges(n: int) -> list[tuple[int, int]]:
    width = max(1, int(math.isqrt(n)))
    edges = []
    for i in range(n):
        row, col = divmod(i, width)
        below = i + width
        if below < n:
            edges.append((i, below))
        diag = i + width + 1
        if col + 1 < width and diag < n:
            edges.append((i, diag))
    return edges


def generate_workflow(family: str, n_tasks: int, seed: int = 0) -> WorkflowDag:
    """Generate an acyclic workflow of the requested family and exact size."""
    if n_tasks < 1:
        raise ValueError("n_tasks must be >= 1")
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; expected one of {', '.join(FAMILIES)}")
    rng = _rng(family, n_tasks, seed)
    if family == "fanout":
        pairs = _fanout_edges(n_tasks)
    elif family == "fork-join":
        pairs = _fork_join_edges(n_tasks, rng)
    elif family == "chain-of-stages":
        pairs = _chain_of_stages_edges(n_tasks, rng)
    else:
        pairs = _diamond_mesh_edges(n_tasks)
    names = _task_names(n_tasks)
    tasks = [
        Task(names[i], rng.uniform(*WORK_RANGE), rng.uniform(*MEMORY_RANGE))
        for i in range(n_tasks)
    ]
    edges = [
        Edge(names[a], names[b], rng.uniform(*VOLUME_RANGE)) for a, b in pairs
    ]
    return WorkflowDag(tasks, edges)
