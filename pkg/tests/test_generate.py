import pytest

from dagmap import generate_workflow, serialize_workflow, validate
from dagmap.generate import FAMILIES


class TestGenerate:
    @pytest.mark.parametrize("family", FAMILIES)
    @pytest.mark.parametrize("n", [1, 2, 3, 17, 200])
    def test_exact_size_and_acyclic(self, family, n):
        dag = generate_workflow(family, n, seed=4)
        assert dag.n == n
        assert validate(dag).ok

    def test_weight_ranges(self):
        dag = generate_workflow("chain-of-stages", 200, seed=7)
        assert all(1.0 <= w <= 1000.0 for w in dag.work)
        assert all(1.0 <= m <= 192.0 for m in dag.memory)
        assert all(1.0 <= e.volume <= 10.0 for e in dag.edges)

    def test_same_seed_identical(self):
        a = generate_workflow("fork-join", 120, seed=9)
        b = generate_workflow("fork-join", 120, seed=9)
        assert serialize_workflow(a) == serialize_workflow(b)

    def test_different_seed_differs(self):
        a = generate_workflow("fork-join", 120, seed=9)
        b = generate_workflow("fork-join", 120, seed=10)
        assert serialize_workflow(a) != serialize_workflow(b)

    def test_single_task(self):
        dag = generate_workflow("fanout", 1, seed=0)
        assert dag.n == 1 and not dag.edges

    def test_fanout_is_maximally_wide(self):
        dag = generate_workflow("fanout", 100, seed=1)
        out_degrees = [len(s) for s in dag.succ]
        assert max(out_degrees) == 98
        in_degrees = [len(p) for p in dag.pred]
        assert max(in_degrees) == 98

    def test_chain_of_stages_is_narrow(self):
        dag = generate_workflow("chain-of-stages", 100, seed=1)
        assert max(len(s) for s in dag.succ) <= 3

    def test_diamond_mesh_degrees(self):
        dag = generate_workflow("diamond-mesh", 100, seed=1)
        assert max(len(s) for s in dag.succ) <= 2
        assert max(len(p) for p in dag.pred) <= 2

    def test_unknown_family(self):
        with pytest.raises(ValueError, match="unknown family"):
            generate_workflow("star", 10, seed=0)

    def test_bad_size(self):
        with pytest.raises(ValueError):
            generate_workflow("fanout", 0, seed=0)
