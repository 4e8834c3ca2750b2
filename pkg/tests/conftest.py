import random

import pytest

from dagmap import ComputingSystem, Edge, Processor, Task, WorkflowDag
from dagmap.quotient import Partition

# Nine-task example graph used throughout: one source (1), one target (9),
# task 6 has parents {3, 4} and children {7, 8}.  Unit work and unit edge
# volumes; task 6 carries memory 2, the rest memory 1.
FIG_EDGES = [
    ("1", "2"), ("1", "3"), ("2", "4"), ("2", "5"), ("3", "6"), ("4", "6"),
    ("5", "7"), ("5", "9"), ("6", "7"), ("6", "8"), ("7", "8"), ("8", "9"),
]
FIG_BLOCKS = [["1", "2", "3", "4"], ["5"], ["6", "7", "8"], ["9"]]


@pytest.fixture
def fig_dag() -> WorkflowDag:
    tasks = [
        Task(str(i), work=1.0, memory=2.0 if i == 6 else 1.0) for i in range(1, 10)
    ]
    edges = [Edge(a, b, 1.0) for a, b in FIG_EDGES]
    return WorkflowDag(tasks, edges)


@pytest.fixture
def fig_partition(fig_dag) -> Partition:
    return Partition.from_blocks(
        [[fig_dag.index_of(t) for t in block] for block in FIG_BLOCKS]
    )


def uniform_system(k: int, memory: float, speed: float = 1.0,
                   bandwidth: float = 1.0) -> ComputingSystem:
    return ComputingSystem(
        [Processor(f"p{i}", memory, speed) for i in range(k)], bandwidth
    )


def random_dag(rng: random.Random, n: int, edge_prob: float = 0.3,
               max_volume: float = 10.0, max_memory: float = 20.0) -> WorkflowDag:
    """Random DAG over a random topological order of n tasks."""
    perm = list(range(n))
    rng.shuffle(perm)
    tasks = [
        Task(f"t{i}", rng.uniform(0.0, 100.0), rng.uniform(0.0, max_memory))
        for i in range(n)
    ]
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < edge_prob:
                edges.append(
                    Edge(f"t{perm[i]}", f"t{perm[j]}", rng.uniform(0.0, max_volume))
                )
    return WorkflowDag(tasks, edges)
