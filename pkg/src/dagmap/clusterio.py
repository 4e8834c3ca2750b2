"""Cluster configuration files (JSON).

Schema: ``{"bandwidth": <number>, "processors": [{"id", "memory", "speed",
"kind"?}, ...]}``.  Presets expand to exactly this shape.
"""

from __future__ import annotations

import json

from .cluster import ComputingSystem, Processor


def system_to_dict(system: ComputingSystem) -> dict:
    return {
        "bandwidth": system.bandwidth,
        "processors": [
            {"id": p.id, "memory": p.memory, "speed": p.speed, "kind": p.kind}
            for p in system.processors
        ],
    }


def system_from_dict(data: dict) -> ComputingSystem:
    try:
        bandwidth = float(data["bandwidth"])
        procs = [
            Processor(str(p["id"]), float(p["memory"]), float(p["speed"]),
                      p.get("kind"))
            for p in data["processors"]
        ]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed cluster configuration: {exc}") from exc
    return ComputingSystem(procs, bandwidth)


def load_cluster(path: str) -> ComputingSystem:
    with open(path) as f:
        return system_from_dict(json.load(f))


def save_cluster(system: ComputingSystem, path: str) -> None:
    with open(path, "w") as f:
        json.dump(system_to_dict(system), f, indent=2)
        f.write("\n")
