"""dagmap: partition DAG workflows into blocks and map them onto
heterogeneous processors, minimizing makespan under per-processor memory
limits."""

from .blockmem import (
    BlockView,
    TraversalResult,
    block_memory_requirement,
    oracle_block_memory,
    peak_for_order,
    requirement_of_members,
    resident_memory_at_step,
)
from .cluster import (
    ComputingSystem,
    Processor,
    preset,
    scale_memories_to_fit,
    sort_by_memory_desc,
)
from .clusterio import load_cluster, save_cluster, system_from_dict, system_to_dict
from .dotio import parse_workflow, parse_workflow_text, serialize_workflow, write_workflow
from .generate import FAMILIES, generate_workflow
from .hetmem import hetmem
from .hetpart import (
    AssignmentState,
    InfeasibleBlockError,
    MergeInfeasibleError,
    biggest_assign,
    find_ms_opt_merge,
    fit_block,
    hetpart,
    merge_unassigned_to_assigned,
    move_to_idle,
    swap_until_best,
)
from .makespan import BottomWeights, bottom_weights, critical_path, makespan, oracle_makespan
from .partition import (
    ExternalPartitioner,
    ExternalPartitionerError,
    PartitionRequest,
    partition,
    register_external_partitioner,
    seeded_topo_order,
)
from .quotient import Partition, QuotientGraph, QuotientVertex, build_quotient, is_acyclic
from .result import BlockReport, MappingResult, result_from_json_dict, verify_mapping
from .workflow import (
    Edge,
    Task,
    ValidationReport,
    WorkflowDag,
    task_memory_requirement,
    topological_order,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "AssignmentState",
    "BlockReport",
    "BlockView",
    "BottomWeights",
    "ComputingSystem",
    "Edge",
    "ExternalPartitioner",
    "ExternalPartitionerError",
    "FAMILIES",
    "InfeasibleBlockError",
    "MappingResult",
    "MergeInfeasibleError",
    "Partition",
    "PartitionRequest",
    "Processor",
    "QuotientGraph",
    "QuotientVertex",
    "Task",
    "TraversalResult",
    "ValidationReport",
    "WorkflowDag",
    "biggest_assign",
    "block_memory_requirement",
    "bottom_weights",
    "build_quotient",
    "critical_path",
    "find_ms_opt_merge",
    "fit_block",
    "generate_workflow",
    "hetmem",
    "hetpart",
    "is_acyclic",
    "load_cluster",
    "makespan",
    "merge_unassigned_to_assigned",
    "move_to_idle",
    "oracle_block_memory",
    "oracle_makespan",
    "parse_workflow",
    "parse_workflow_text",
    "partition",
    "peak_for_order",
    "preset",
    "register_external_partitioner",
    "requirement_of_members",
    "resident_memory_at_step",
    "result_from_json_dict",
    "save_cluster",
    "scale_memories_to_fit",
    "seeded_topo_order",
    "serialize_workflow",
    "sort_by_memory_desc",
    "swap_until_best",
    "system_from_dict",
    "system_to_dict",
    "task_memory_requirement",
    "topological_order",
    "validate",
    "verify_mapping",
    "write_workflow",
]
