import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dagmap import (
    BlockView,
    Edge,
    Task,
    WorkflowDag,
    block_memory_requirement,
    oracle_block_memory,
    peak_for_order,
    resident_memory_at_step,
    task_memory_requirement,
)

from conftest import random_dag


def all_topological_orders(view, dag):
    ids = view.member_ids
    internal = [(dag.ids[u], dag.ids[w]) for u, w, _ in view.internal]
    for perm in itertools.permutations(ids):
        pos = {t: i for i, t in enumerate(perm)}
        if all(pos[a] < pos[b] for a, b in internal):
            yield list(perm)


def brute_force_min_peak(view, dag):
    return min(
        peak_for_order(view, dag, order)[0]
        for order in all_topological_orders(view, dag)
    )


class TestResidentMemory:
    def test_singleton_equals_task_requirement(self, fig_dag):
        for tid in fig_dag.ids:
            view = BlockView.from_members(fig_dag, [tid])
            assert resident_memory_at_step(view, fig_dag, [tid], 0) == pytest.approx(
                task_memory_requirement(fig_dag, tid)
            )

    def test_chain_block_both_steps(self):
        dag = WorkflowDag(
            [Task("a", memory=1.0), Task("b", memory=1.0)], [Edge("a", "b", 3.0)]
        )
        view = BlockView.from_members(dag, ["a", "b"])
        # the producer holds its output, the consumer holds its input
        assert resident_memory_at_step(view, dag, ["a", "b"], 0) == 4.0
        assert resident_memory_at_step(view, dag, ["a", "b"], 1) == 4.0

    def test_boundary_out_resident_from_production(self):
        dag = WorkflowDag(
            [Task("u", memory=1.0), Task("y")], [Edge("u", "y", 7.0)]
        )
        view = BlockView.from_members(dag, ["u"])
        assert resident_memory_at_step(view, dag, ["u"], 0) == 8.0

    def test_non_topological_order_rejected(self):
        dag = WorkflowDag([Task("a"), Task("b")], [Edge("a", "b", 1.0)])
        view = BlockView.from_members(dag, ["a", "b"])
        with pytest.raises(ValueError, match="not topological"):
            resident_memory_at_step(view, dag, ["b", "a"], 0)

    def test_step_out_of_range(self):
        dag = WorkflowDag([Task("a")], [])
        view = BlockView.from_members(dag, ["a"])
        with pytest.raises(ValueError, match="out of range"):
            resident_memory_at_step(view, dag, ["a"], 1)


class TestBlockMemoryRequirement:
    def test_singleton(self, fig_dag):
        view = BlockView.from_members(fig_dag, ["6"])
        result = block_memory_requirement(view, fig_dag)
        assert result.peak == pytest.approx(6.0)
        assert result.order == ["6"]

    def test_fork_matches_brute_force(self):
        dag = WorkflowDag(
            [Task(t, memory=1.0) for t in "abc"],
            [Edge("a", "b", 1.0), Edge("a", "c", 1.0)],
        )
        view = BlockView.from_members(dag, ["a", "b", "c"])
        result = block_memory_requirement(view, dag)
        assert result.peak == pytest.approx(3.0)
        assert brute_force_min_peak(view, dag) == pytest.approx(3.0)

    def test_returned_order_achieves_returned_peak(self):
        rng = random.Random(3)
        for _ in range(30):
            dag = random_dag(rng, rng.randint(1, 9), edge_prob=0.4)
            view = BlockView.from_members(dag, dag.ids)
            result = block_memory_requirement(view, dag)
            peak, step = peak_for_order(view, dag, result.order)
            assert peak == pytest.approx(result.peak)
            assert step == result.peak_step

    def test_empty_block_rejected(self, fig_dag):
        with pytest.raises(ValueError):
            BlockView.from_members(fig_dag, [])


class TestOracle:
    def test_singleton(self, fig_dag):
        view = BlockView.from_members(fig_dag, ["9"])
        assert oracle_block_memory(view, fig_dag) == pytest.approx(
            task_memory_requirement(fig_dag, "9")
        )

    def test_independent_pair_max(self):
        dag = WorkflowDag([Task("x", memory=10.0), Task("y", memory=2.0)], [])
        view = BlockView.from_members(dag, ["x", "y"])
        assert oracle_block_memory(view, dag) == pytest.approx(10.0)

    def test_diamond_enumeration(self):
        dag = WorkflowDag(
            [Task(t, work=1.0, memory=1.0) for t in "1234"],
            [Edge("1", "2", 1.0), Edge("1", "3", 1.0),
             Edge("2", "4", 1.0), Edge("3", "4", 1.0)],
        )
        view = BlockView.from_members(dag, ["1", "2", "3", "4"])
        assert len(list(all_topological_orders(view, dag))) == 2
        assert oracle_block_memory(view, dag) == pytest.approx(
            brute_force_min_peak(view, dag)
        )

    def test_matches_enumeration_on_random_blocks(self):
        rng = random.Random(17)
        for _ in range(40):
            dag = random_dag(rng, rng.randint(1, 6), edge_prob=0.4)
            members = rng.sample(dag.ids, rng.randint(1, dag.n))
            view = BlockView.from_members(dag, members)
            assert oracle_block_memory(view, dag) == pytest.approx(
                brute_force_min_peak(view, dag)
            )

    def test_size_limit(self):
        dag = WorkflowDag([Task(f"t{i}") for i in range(13)], [])
        with pytest.raises(ValueError, match="limited"):
            oracle_block_memory(BlockView.from_members(dag, dag.ids), dag)


class TestProperties:
    def test_heuristic_upper_bounds_oracle(self):
        rng = random.Random(23)
        for _ in range(60):
            dag = random_dag(rng, rng.randint(2, 14), edge_prob=0.3)
            size = rng.randint(1, min(10, dag.n))
            members = rng.sample(dag.ids, size)
            view = BlockView.from_members(dag, members)
            heur = block_memory_requirement(view, dag).peak
            exact = oracle_block_memory(view, dag)
            assert heur >= exact - 1e-9

    def test_equality_on_chains(self):
        rng = random.Random(29)
        for _ in range(20):
            n = rng.randint(1, 10)
            ids = [f"c{i}" for i in range(n)]
            dag = WorkflowDag(
                [Task(t, memory=rng.uniform(0, 5)) for t in ids],
                [Edge(a, b, rng.uniform(0, 5)) for a, b in zip(ids, ids[1:])],
            )
            view = BlockView.from_members(dag, ids)
            assert block_memory_requirement(view, dag).peak == pytest.approx(
                oracle_block_memory(view, dag)
            )

    def test_peak_monotone_in_edge_volumes(self):
        rng = random.Random(31)
        for _ in range(20):
            dag = random_dag(rng, 6, edge_prob=0.5)
            if not dag.edges:
                continue
            members = rng.sample(dag.ids, 4)
            view = BlockView.from_members(dag, members)
            order = block_memory_requirement(view, dag).order
            base = peak_for_order(view, dag, order)[0]
            k = rng.randrange(len(dag.edges))
            bumped_edges = [
                Edge(e.tail, e.head, e.volume + 5.0) if i == k else e
                for i, e in enumerate(dag.edges)
            ]
            dag2 = WorkflowDag(dag.tasks, bumped_edges)
            view2 = BlockView.from_members(dag2, members)
            assert peak_for_order(view2, dag2, order)[0] >= base - 1e-12

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_literal_steps_match_incremental_peak(self, seed):
        rng = random.Random(seed)
        dag = random_dag(rng, rng.randint(1, 10), edge_prob=0.35)
        members = rng.sample(dag.ids, rng.randint(1, dag.n))
        view = BlockView.from_members(dag, members)
        result = block_memory_requirement(view, dag)
        stepwise = [
            resident_memory_at_step(view, dag, result.order, t)
            for t in range(len(members))
        ]
        assert max(stepwise) == pytest.approx(result.peak)
        assert stepwise.index(max(stepwise)) == result.peak_step
