"""Heterogeneous computing systems: processors with individual memory and speed.

All processors share one communication bandwidth.  The named presets model
six machine kinds and the variants used in the experimental sweeps.
"""

from __future__ import annotations

from dataclasses import dataclass

# (kind, speed, memory) rows for the base cluster and its more/less
# heterogeneous variants.  The "lesshet" largest memory stays at 192 so the
# most demanding tasks still fit somewhere.
_DEFAULT_KINDS = [
    ("local", 4.0, 16.0),
    ("A1", 32.0, 32.0),
    ("A2", 6.0, 64.0),
    ("N1", 12.0, 16.0),
    ("N2", 8.0, 8.0),
    ("C2", 32.0, 192.0),
]
_MOREHET_KINDS = [
    ("local", 2.0, 8.0),
    ("A1", 64.0, 64.0),
    ("A2", 3.0, 128.0),
    ("N1", 24.0, 8.0),
    ("N2", 4.0, 4.0),
    ("C2", 64.0, 384.0),
]
_LESSHET_KINDS = [
    ("local", 8.0, 64.0),
    ("A1", 16.0, 64.0),
    ("A2", 12.0, 128.0),
    ("N1", 12.0, 64.0),
    ("N2", 16.0, 32.0),
    ("C2", 16.0, 192.0),
]

PRESET_NAMES = ("default", "small", "large", "morehet", "lesshet", "nohet")


@dataclass(frozen=True)
class Processor:
    id: str
    memory: float
    speed: float
    kind: str | None = None

    def __post_init__(self):
        if self.memory <= 0:
            raise ValueError(f"processor {self.id!r}: memory must be positive")
        if self.speed <= 0:
            raise ValueError(f"processor {self.id!r}: speed must be positive")


class ComputingSystem:
    """An immutable set of processors plus the shared bandwidth."""

    def __init__(self, processors, bandwidth: float):
        self.processors: list[Processor] = list(processors)
        if not self.processors:
            raise ValueError("a computing system needs at least one processor")
        if bandwidth <= 0:
            raise ValueError("bandwidth must be positive")
        self.bandwidth = float(bandwidth)
        self._by_id = {p.id: p for p in self.processors}
        if len(self._by_id) != len(self.processors):
            raise ValueError("duplicate processor ids")

    @property
    def k(self) -> int:
        return len(self.processors)

    def __iter__(self):
        return iter(self.processors)

    def processor(self, proc_id: str) -> Processor:
        try:
            return self._by_id[proc_id]
        except KeyError:
            raise ValueError(f"unknown processor id {proc_id!r}") from None

    def speed_of(self, proc_id: str) -> float:
        return self.processor(proc_id).speed

    def memory_of(self, proc_id: str) -> float:
        return self.processor(proc_id).memory

    def with_memories_scaled(self, factor: float) -> "ComputingSystem":
        return ComputingSystem(
            [Processor(p.id, p.memory * factor, p.speed, p.kind) for p in self.processors],
            self.bandwidth,
        )


def preset(name: str, bandwidth: float) -> ComputingSystem:
    """Build one of the named cluster configurations.

    default/small/large use the base machine kinds with 6/3/10 copies each;
    morehet and lesshet stretch or compress the spread of speeds and
    memories; nohet is 36 copies of the largest machine.
    """
    if name == "default":
        kinds, copies = _DEFAULT_KINDS, 6
    elif name == "small":
        kinds, copies = _DEFAULT_KINDS, 3
    elif name == "large":
        kinds, copies = _DEFAULT_KINDS, 10
    elif name == "morehet":
        kinds, copies = _MOREHET_KINDS, 6
    elif name == "lesshet":
        kinds, copies = _LESSHET_KINDS, 6
    elif name == "nohet":
        kinds, copies = [("C2", 32.0, 192.0)], 36
    else:
        raise ValueError(f"unknown preset {name!r}; expected one of {', '.join(PRESET_NAMES)}")
    procs = [
        Processor(f"{kind}-{i}", mem, speed, kind)
        for kind, speed, mem in kinds
        for i in range(copies)
    ]
    return ComputingSystem(procs, bandwidth)


def sort_by_memory_desc(system: ComputingSystem) -> list[str]:
    """Processor ids by descending memory; ties by descending speed, then id."""
    return [
        p.id
        for p in sorted(system.processors, key=lambda p: (-p.memory, -p.speed, p.id))
    ]


def scale_memories_to_fit(system: ComputingSystem, max_requirement: float) -> ComputingSystem:
    """Grow every memory proportionally until the most demanding single task fits.

    Mirrors the normalization applied to generated workflows: memories are
    relative values, so they are scaled up together until the task with the
    biggest memory requirement still has a processor it can run on.  A tiny
    headroom keeps the boundary case robust to rounding.
    """
    biggest = max(p.memory for p in system.processors)
    if max_requirement <= biggest:
        return system
    factor = (max_requirement / biggest) * (1.0 + 1e-9)
    return system.with_memories_scaled(factor)
