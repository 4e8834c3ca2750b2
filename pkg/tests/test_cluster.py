import pytest

from dagmap import (
    ComputingSystem,
    Processor,
    preset,
    scale_memories_to_fit,
    sort_by_memory_desc,
)


class TestPresets:
    def test_default_shape(self):
        system = preset("default", 1.0)
        assert system.k == 36
        assert max(p.memory for p in system) == 192.0
        assert max(p.speed for p in system) == 32.0

    def test_small_and_large_counts(self):
        assert preset("small", 1.0).k == 18
        assert preset("large", 1.0).k == 60

    def test_nohet_uniform(self):
        system = preset("nohet", 1.0)
        assert system.k == 36
        assert {(p.speed, p.memory) for p in system} == {(32.0, 192.0)}

    def test_morehet_extremes(self):
        pairs = {(p.speed, p.memory) for p in preset("morehet", 1.0)}
        assert (64.0, 384.0) in pairs
        assert (4.0, 4.0) in pairs

    def test_lesshet_max_memory_stays(self):
        assert max(p.memory for p in preset("lesshet", 1.0)) == 192.0

    def test_unknown_preset(self):
        with pytest.raises(ValueError, match="unknown preset"):
            preset("huge", 1.0)

    def test_bandwidth_is_independent(self):
        assert preset("default", 0.25).bandwidth == 0.25


class TestSortByMemoryDesc:
    def test_default_head_is_c2(self):
        system = preset("default", 1.0)
        order = sort_by_memory_desc(system)
        assert system.memory_of(order[0]) == 192.0
        memories = [system.memory_of(p) for p in order]
        assert memories == sorted(memories, reverse=True)

    def test_memory_tie_falls_back_to_speed(self):
        system = ComputingSystem(
            [Processor("slow", 10.0, 1.0), Processor("fast", 10.0, 5.0)], 1.0
        )
        assert sort_by_memory_desc(system) == ["fast", "slow"]

    def test_full_tie_falls_back_to_id(self):
        system = ComputingSystem(
            [Processor("b", 10.0, 1.0), Processor("a", 10.0, 1.0)], 1.0
        )
        assert sort_by_memory_desc(system) == ["a", "b"]

    def test_singleton(self):
        system = ComputingSystem([Processor("only", 1.0, 1.0)], 1.0)
        assert sort_by_memory_desc(system) == ["only"]


class TestInvariants:
    def test_positive_fields_enforced(self):
        with pytest.raises(ValueError):
            Processor("p", 0.0, 1.0)
        with pytest.raises(ValueError):
            Processor("p", 1.0, -1.0)
        with pytest.raises(ValueError):
            ComputingSystem([], 1.0)
        with pytest.raises(ValueError):
            ComputingSystem([Processor("p", 1.0, 1.0)], 0.0)

    def test_scale_memories_to_fit(self):
        system = preset("default", 1.0)
        scaled = scale_memories_to_fit(system, 500.0)
        assert max(p.memory for p in scaled) >= 500.0
        # relative shape preserved
        base = sorted(p.memory for p in system)
        new = sorted(p.memory for p in scaled)
        ratios = {round(n / b, 9) for n, b in zip(new, base)}
        assert len(ratios) == 1
        # no scaling needed when the largest memory already suffices
        assert scale_memories_to_fit(system, 100.0) is system
