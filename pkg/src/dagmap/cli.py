"""Command-line interface.

Subcommands: ``map`` (run one algorithm on one workflow), ``generate``
(write a synthetic workflow), ``bench`` (grid comparison of both
algorithms), ``check`` (re-verify a result file against its inputs).

Exit codes: 0 success/feasible, 2 input error, 3 infeasible mapping,
1 failed check.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from .bench import FULL_SCALE_REFERENCE_RATIO, run_bench, write_report
from .cluster import PRESET_NAMES, preset, scale_memories_to_fit
from .clusterio import load_cluster
from .dotio import parse_workflow, write_workflow
from .generate import FAMILIES, generate_workflow
from .hetmem import hetmem
from .hetpart import hetpart
from .result import result_from_json_dict, verify_mapping

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT_ERROR = 2
EXIT_INFEASIBLE = 3


def _system_from_args(args):
    if getattr(args, "cluster", None):
        system = load_cluster(args.cluster)
        if args.bandwidth is not None:
            system = type(system)(system.processors, args.bandwidth)
        return system
    if getattr(args, "preset", None):
        return preset(args.preset, args.bandwidth if args.bandwidth is not None else 1.0)
    raise ValueError("either --preset or --cluster is required")


def _add_cluster_args(p):
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--preset", help=f"named cluster: {', '.join(PRESET_NAMES)}")
    group.add_argument("--cluster", help="cluster configuration JSON file")
    p.add_argument("--bandwidth", type=float, default=None,
                   help="shared bandwidth (default 1.0 for presets)")


def _cmd_map(args) -> int:
    dag = parse_workflow(args.workflow)
    system = _system_from_args(args)
    if args.fit_memories:
        system = scale_memories_to_fit(system, max(dag.requirements()))
    start = time.perf_counter()
    if args.algorithm == "hetmem":
        result = hetmem(dag, system)
    else:
        result = hetpart(dag, system, seed=args.seed, epsilon=args.epsilon,
                         stride=args.stride)
    result.runtime = time.perf_counter() - start
    payload = result.to_json_dict(include_timing=args.timing)
    with open(args.output, "w") as f:
        json.dump(payload, f, indent=2)
        f.write("\n")
    if not result.feasible:
        print(f"infeasible: {result.diagnostic}", file=sys.stderr)
        return EXIT_INFEASIBLE
    print(
        f"{args.algorithm}: makespan {result.makespan} on {result.k_used} blocks "
        f"({result.runtime:.3f}s); result written to {args.output}",
        file=sys.stderr,
    )
    return EXIT_OK


def _cmd_generate(args) -> int:
    dag = generate_workflow(args.family, args.n_tasks, args.seed)
    write_workflow(dag, args.output, name=f"{args.family.replace('-', '_')}_{args.n_tasks}")
    print(f"wrote {args.family} workflow with {dag.n} tasks to {args.output}",
          file=sys.stderr)
    return EXIT_OK


def _parse_list(raw: str, conv):
    return [conv(x) for x in raw.split(",") if x.strip()]


def _cmd_bench(args) -> int:
    families = _parse_list(args.families, str)
    for fam in families:
        if fam not in FAMILIES:
            raise ValueError(f"unknown family {fam!r}")
    sizes = _parse_list(args.sizes, int)
    seeds = _parse_list(args.seeds, int)
    if args.bandwidth_sweep:
        bandwidths = _parse_list(args.bandwidth_sweep, float)
    else:
        bandwidths = [args.bandwidth if args.bandwidth is not None else 1.0]
    report = run_bench(
        families, sizes, seeds, preset_name=args.preset,
        bandwidths=bandwidths, fit_memories=not args.no_fit_memories,
        epsilon=args.epsilon, stride=args.stride,
    )
    paths = write_report(report, args.report)
    overall = report.geomean_ratio()
    shown = f"{overall:.4f}" if overall is not None else "n/a (no comparable rows)"
    print(
        f"geometric-mean makespan ratio hetpart/hetmem: {shown} "
        f"(full-scale reference: {FULL_SCALE_REFERENCE_RATIO})",
        file=sys.stderr,
    )
    print("report files: " + ", ".join(sorted(paths.values())), file=sys.stderr)
    return EXIT_OK


def _cmd_check(args) -> int:
    with open(args.result) as f:
        result = result_from_json_dict(json.load(f))
    dag = parse_workflow(args.workflow)
    system = _system_from_args(args)
    if args.fit_memories:
        system = scale_memories_to_fit(system, max(dag.requirements()))
    if not result.feasible:
        print("result is marked infeasible; nothing to verify", file=sys.stderr)
        return EXIT_OK
    problems = verify_mapping(result, dag, system)
    if problems:
        for p in problems:
            print(f"violation: {p}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    print("result is self-consistent: memory bounds, coverage, acyclicity "
          "and makespan all verified", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dagmap",
        description="Partition and map DAG workflows onto heterogeneous clusters.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_map = sub.add_parser("map", help="map one workflow onto a cluster")
    p_map.add_argument("--workflow", required=True, help="workflow DOT file")
    _add_cluster_args(p_map)
    p_map.add_argument("--algorithm", choices=("hetmem", "hetpart"),
                       default="hetpart")
    p_map.add_argument("--seed", type=int, default=0)
    p_map.add_argument("--epsilon", type=float, default=0.1,
                       help="partitioner balance tolerance")
    p_map.add_argument("--stride", type=int, default=None,
                       help="thin the block-count sweep (speed knob)")
    p_map.add_argument("--fit-memories", action="store_true",
                       help="scale processor memories so the largest task fits")
    p_map.add_argument("--timing", action="store_true",
                       help="include wall-clock runtime in the result JSON")
    p_map.add_argument("--output", default="result.json")
    p_map.set_defaults(func=_cmd_map)

    p_gen = sub.add_parser("generate", help="write a synthetic workflow")
    p_gen.add_argument("--family", choices=FAMILIES, required=True)
    p_gen.add_argument("--n-tasks", type=int, required=True)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--output", required=True)
    p_gen.set_defaults(func=_cmd_generate)

    p_bench = sub.add_parser("bench", help="compare both algorithms over a grid")
    p_bench.add_argument("--families", default=",".join(FAMILIES))
    p_bench.add_argument("--sizes", default="50,200")
    p_bench.add_argument("--seeds", default="1,2,3")
    p_bench.add_argument("--preset", default="default",
                         choices=PRESET_NAMES)
    p_bench.add_argument("--bandwidth", type=float, default=None)
    p_bench.add_argument("--bandwidth-sweep", default=None,
                         help="comma-separated bandwidths, e.g. 0.1,1,5")
    p_bench.add_argument("--no-fit-memories", action="store_true")
    p_bench.add_argument("--epsilon", type=float, default=0.1)
    p_bench.add_argument("--stride", type=int, default=None)
    p_bench.add_argument("--report", required=True,
                         help="output path prefix for report files")
    p_bench.set_defaults(func=_cmd_bench)

    p_check = sub.add_parser("check", help="re-verify a result file")
    p_check.add_argument("--result", required=True)
    p_check.add_argument("--workflow", required=True)
    _add_cluster_args(p_check)
    p_check.add_argument("--fit-memories", action="store_true")
    p_check.set_defaults(func=_cmd_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
