"""Four-step partitioning-based mapping heuristic.

Step 1 partitions the workflow into k' blocks optimizing edge cut (the
whole pipeline is swept over k' = 1..k and the best feasible makespan
wins).  Step 2 assigns blocks to processors largest-first, splitting
blocks that do not fit.  Step 3 merges still-unassigned quotient vertices
into assigned ones, steering by estimated makespan and preferring partners
off the critical path.  Step 4 is local search: best-improving block swaps,
then moves of critical-path blocks to faster idle processors.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field

from .blockmem import requirement_of_members
from .cluster import ComputingSystem, sort_by_memory_desc
from .makespan import bottom_weights
from .partition import PartitionRequest, partition, seeded_topo_order
from .quotient import Partition, QuotientGraph, build_quotient, is_acyclic
from .result import BlockReport, MappingResult
from .workflow import WorkflowDag

INF = float("inf")


class InfeasibleBlockError(Exception):
    """A block cannot be split further and does not fit its target processor."""


class MergeInfeasibleError(Exception):
    """An unassigned vertex has no feasible merge and no reinsertion left."""


@dataclass
class _Block:
    bid: int
    members: list[int]
    req: float
    order: list[int]
    work: float
    min_id: str


@dataclass
class AssignmentState:
    """Working state of the assignment step.

    ``queue`` is a max-priority queue over blocks keyed by memory
    requirement (ties: larger total work, then smallest member id);
    ``free`` lists free processors in descending memory order.
    """

    dag: WorkflowDag
    system: ComputingSystem
    epsilon: float
    seed: int
    order: list[int]
    partitioner: object | None = None
    blocks: dict[int, _Block] = field(default_factory=dict)
    queue: list[tuple[float, float, str, int]] = field(default_factory=list)
    free: deque = field(default_factory=deque)
    assigned: dict[int, str] = field(default_factory=dict)
    next_bid: int = 0

    @classmethod
    def from_partition(cls, dag: WorkflowDag, part: Partition,
                       system: ComputingSystem, epsilon: float, seed: int,
                       order: list[int], partitioner=None) -> "AssignmentState":
        state = cls(dag, system, epsilon, seed, order, partitioner)
        state.free = deque(sort_by_memory_desc(system))
        for members in part.blocks.values():
            state.add_block(members)
        return state

    def add_block(self, members: list[int]) -> int:
        bid = self.next_bid
        self.next_bid += 1
        req, blk_order, _ = requirement_of_members(self.dag, members)
        blk = _Block(
            bid, list(members), req, blk_order,
            sum(self.dag.work[u] for u in members),
            min(self.dag.ids[u] for u in members),
        )
        self.blocks[bid] = blk
        heapq.heappush(self.queue, (-req, -blk.work, blk.min_id, bid))
        return bid

    def pop_block(self) -> int:
        return heapq.heappop(self.queue)[3]

    def split_block(self, bid: int) -> None:
        blk = self.blocks.pop(bid)
        request = PartitionRequest(2, self.epsilon, "memory-requirement", self.seed)
        if self.partitioner is not None:
            sub = self.partitioner.partition(self.dag, request, blk.members, order=self.order)
        else:
            sub = partition(self.dag, request, blk.members, order=self.order)
        parts = list(sub.blocks.values())
        if len(parts) <= 1:
            raise InfeasibleBlockError(
                f"block of tasks {[self.dag.ids[u] for u in blk.members[:5]]} cannot be split further"
            )
        for members in parts:
            self.add_block(members)


def fit_block(state: AssignmentState, bid: int, proc_id: str, do_map: bool) -> int | None:
    """Place ``bid`` on ``proc_id`` if it fits; otherwise split and re-enqueue.

    Returns the placed block id, or None when nothing was placed.  Raises
    :class:`InfeasibleBlockError` for an unsplittable block that does not
    fit (a single task larger than the processor's memory).
    """
    blk = state.blocks[bid]
    cap = state.system.memory_of(proc_id)
    if blk.req <= cap:
        if do_map:
            state.assigned[bid] = proc_id
            return bid
        return None
    if len(blk.members) == 1:
        tid = state.dag.ids[blk.members[0]]
        raise InfeasibleBlockError(
            f"task {tid!r} needs {blk.req} memory but processor {proc_id!r} has {cap}"
        )
    state.split_block(bid)
    return None


def biggest_assign(state: AssignmentState) -> AssignmentState:
    """Assign the largest blocks to the largest-memory free processors.

    When processors run out, remaining blocks are split (without mapping)
    until each fits the smallest memory in the system, so that the merging
    step has small unassigned pieces to work with.
    """
    while state.queue and state.free:
        bid = state.pop_block()
        placed = fit_block(state, bid, state.free[0], True)
        if placed is not None:
            state.free.popleft()
    if state.queue:
        p_min = sort_by_memory_desc(state.system)[-1]
        while state.queue:
            bid = state.pop_block()
            fit_block(state, bid, p_min, False)
    return state


def quotient_from_state(state: AssignmentState) -> QuotientGraph:
    part = Partition(
        {u: bid for bid, blk in state.blocks.items() for u in blk.members},
        {bid: blk.members for bid, blk in state.blocks.items()},
    )
    q = build_quotient(state.dag, part)
    for bid, blk in state.blocks.items():
        q.verts[bid].req = blk.req
        q.verts[bid].req_order = blk.order
        proc = state.assigned.get(bid)
        if proc is not None:
            q.verts[bid].proc = proc
    return q


def find_ms_opt_merge(q: QuotientGraph, dag: WorkflowDag, system: ComputingSystem,
                      nu: int, candidates: set[int]):
    """Best merge partner for ``nu`` among its neighbours in ``candidates``.

    Tentatively merges ``nu`` with each admissible parent or child; a merge
    creating a 2-cycle tries absorbing the third vertex, any other cycle
    disqualifies the candidate.  Among candidates whose merged block fits
    the partner's processor memory, the one with the lowest estimated
    makespan wins.  The graph is left exactly as it was found.

    Returns (makespan, partner or None, optional third vertex).
    """
    neighbours = sorted((set(q.succ[nu]) | set(q.pred[nu])) & candidates)
    best_mu, best_partner, best_third = INF, None, None
    for pv in neighbours:
        partner_proc = q.verts[pv].proc
        m1 = q.merge(nu, pv)
        m_final = m1
        m2 = None
        third = None
        viable = True
        if q.has_cycle_through(m1):
            other = q.two_cycle_partner(m1)
            if other is None:
                viable = False
            else:
                m2 = q.merge(m1, other)
                if q.has_cycle_through(m2):
                    q.unmerge(m2)
                    m2 = None
                    viable = False
                else:
                    third = other
                    m_final = m2
        if viable:
            req, _, _ = requirement_of_members(dag, q.verts[m_final].members)
            if req <= system.memory_of(partner_proc):
                mu = bottom_weights(q, system).makespan
                if mu <= best_mu:
                    best_mu, best_partner, best_third = mu, pv, third
        if m2 is not None:
            q.unmerge(m2)
        q.unmerge(m1)
    return best_mu, best_partner, best_third


def merge_unassigned_to_assigned(q: QuotientGraph, dag: WorkflowDag,
                                 system: ComputingSystem,
                                 events: list | None = None) -> QuotientGraph:
    """Merge every unassigned quotient vertex into an assigned one.

    Partners off the critical path are preferred; a vertex with no feasible
    partner is retried later if it still has unassigned neighbours (at most
    two reinsertions), otherwise the instance is infeasible.
    """
    assigned = {vid for vid, v in q.verts.items() if v.proc is not None}
    unassigned = sorted(vid for vid, v in q.verts.items() if v.proc is None)
    if not unassigned:
        return q
    if not assigned:
        raise MergeInfeasibleError("no block could be assigned to any processor")
    crit = set(bottom_weights(q, system).path)
    worklist = deque(unassigned)
    while worklist:
        nu = worklist.popleft()
        if nu not in q.verts:
            continue  # absorbed as a third vertex of an earlier merge
        mu, partner, third = find_ms_opt_merge(q, dag, system, nu, assigned - crit)
        if partner is None:
            mu, partner, third = find_ms_opt_merge(q, dag, system, nu, assigned)
        if partner is not None:
            merged = q.merge(nu, partner)
            if third is not None:
                merged = q.merge(merged, third)
            assigned.discard(partner)
            assigned.discard(third)
            assigned.add(merged)
            crit = set(bottom_weights(q, system).path)
            if events is not None:
                events.append({
                    "step": "merge", "vertex": nu, "partner": partner,
                    "third": third, "makespan_est": mu,
                })
        else:
            v = q.verts[nu]
            has_open_neighbour = any(
                q.verts[x].proc is None for x in list(q.succ[nu]) + list(q.pred[nu])
            )
            if has_open_neighbour and v.counter <= 1:
                v.counter += 1
                worklist.append(nu)
            else:
                names = [dag.ids[u] for u in v.members[:5]]
                raise MergeInfeasibleError(
                    f"no feasible merge for unassigned block {nu} (tasks {names})"
                )
    return q


def _vertex_requirements(q: QuotientGraph, dag: WorkflowDag) -> dict[int, float]:
    reqs = {}
    for vid, v in q.verts.items():
        if v.req is None:
            v.req, v.req_order, _ = requirement_of_members(dag, v.members)
        reqs[vid] = v.req
    return reqs


def swap_until_best(q: QuotientGraph, dag: WorkflowDag, system: ComputingSystem,
                    events: list | None = None) -> QuotientGraph:
    """Execute the best strictly-improving feasible block swap until none exists."""
    reqs = _vertex_requirements(q, dag)
    proc_of = {vid: v.proc for vid, v in q.verts.items()}
    mem_of = {vid: system.memory_of(p) for vid, p in proc_of.items()}
    current = bottom_weights(q, system).makespan
    ids = sorted(q.verts)
    while True:
        best_pair = None
        best_mu = current
        scratch = dict(proc_of)
        for i, a in enumerate(ids):
            for b in ids[i + 1:]:
                if reqs[a] > mem_of[b] or reqs[b] > mem_of[a]:
                    continue
                scratch[a], scratch[b] = proc_of[b], proc_of[a]
                mu = bottom_weights(q, system, scratch).makespan
                scratch[a], scratch[b] = proc_of[a], proc_of[b]
                if mu < best_mu:
                    best_mu = mu
                    best_pair = (a, b)
        if best_pair is None:
            break
        a, b = best_pair
        proc_of[a], proc_of[b] = proc_of[b], proc_of[a]
        mem_of[a], mem_of[b] = mem_of[b], mem_of[a]
        q.verts[a].proc, q.verts[b].proc = proc_of[a], proc_of[b]
        current = best_mu
        if events is not None:
            events.append({"step": "swap", "a": a, "b": b, "makespan": current})
    return q


def move_to_idle(q: QuotientGraph, dag: WorkflowDag, system: ComputingSystem,
                 events: list | None = None) -> QuotientGraph:
    """Move critical-path blocks to strictly faster idle processors that fit them.

    Only runs when idle processors exist.  Speeding up a block never
    increases any bottom weight, so the makespan is non-increasing.
    """
    used = {v.proc for v in q.verts.values()}
    idle = {p.id: p for p in system.processors if p.id not in used}
    if not idle:
        return q
    reqs = _vertex_requirements(q, dag)
    considered: set[int] = set()
    while True:
        bw = bottom_weights(q, system)
        target = next((vid for vid in bw.path if vid not in considered), None)
        if target is None:
            break
        considered.add(target)
        v = q.verts[target]
        speed_now = system.speed_of(v.proc)
        options = [
            p for p in idle.values()
            if p.speed > speed_now and p.memory >= reqs[target]
        ]
        if not options:
            continue
        options.sort(key=lambda p: (-p.speed, -p.memory, p.id))
        chosen = options[0]
        del idle[chosen.id]
        idle[v.proc] = system.processor(v.proc)
        v.proc = chosen.id
        if events is not None:
            mu = bottom_weights(q, system).makespan
            events.append({"step": "move", "vertex": target, "to": chosen.id,
                           "makespan": mu})
    return q


@dataclass
class _Candidate:
    k_requested: int
    quotient: QuotientGraph
    makespan: float
    path: list[int]
    events: list


def _run_candidate(dag, system, k_parts, seed, epsilon, order, partitioner) -> _Candidate:
    events: list[dict] = []
    request = PartitionRequest(k_parts, epsilon, "work", seed)
    if partitioner is not None:
        part = partitioner.partition(dag, request, order=order)
    else:
        part = partition(dag, request, order=order)
    events.append({"step": "partition", "k": k_parts, "blocks": part.k,
                   "cut_volume": part.cut_volume})
    state = AssignmentState.from_partition(dag, part, system, epsilon, seed,
                                           order, partitioner)
    biggest_assign(state)
    events.append({
        "step": "assign",
        "assigned": len(state.assigned),
        "unassigned": len(state.blocks) - len(state.assigned),
    })
    q = quotient_from_state(state)
    ok, cycle = is_acyclic(q)
    if not ok:
        raise AssertionError(f"assignment produced a cyclic quotient: {cycle}")
    merge_unassigned_to_assigned(q, dag, system, events)
    events.append({"step": "step4-start",
                   "makespan": bottom_weights(q, system).makespan})
    swap_until_best(q, dag, system, events)
    move_to_idle(q, dag, system, events)
    bw = bottom_weights(q, system)
    return _Candidate(k_parts, q, bw.makespan, bw.path, events)


def hetpart(dag: WorkflowDag, system: ComputingSystem, seed: int = 0,
            epsilon: float = 0.1, stride: int | None = None,
            partitioner=None) -> MappingResult:
    """Run the full pipeline for every candidate block count and keep the best.

    Candidate counts are 1..min(k, n); ``stride`` thins the sweep (keeping 1
    and the maximum) as an opt-in speedup.  Deterministic for fixed inputs
    and seed.
    """
    if dag.n == 0:
        raise ValueError("cannot map an empty workflow")
    kmax = min(system.k, dag.n)
    if stride is not None and stride > 1:
        k_values = sorted(set(range(1, kmax + 1, stride)) | {1, kmax})
    else:
        k_values = list(range(1, kmax + 1))
    order = seeded_topo_order(dag, seed)
    trace: list[dict] = []
    best: _Candidate | None = None
    last_reason = "no candidate block count produced a feasible mapping"
    for kp in k_values:
        try:
            cand = _run_candidate(dag, system, kp, seed, epsilon, order, partitioner)
        except (InfeasibleBlockError, MergeInfeasibleError) as exc:
            last_reason = str(exc)
            trace.append({"step": "candidate", "k": kp, "feasible": False,
                          "reason": last_reason})
            continue
        for ev in cand.events:
            ev["k"] = kp
        trace.extend(cand.events)
        trace.append({"step": "candidate", "k": kp, "feasible": True,
                      "makespan": cand.makespan})
        if best is None or cand.makespan < best.makespan:
            best = cand
    if best is None:
        return MappingResult(algorithm="hetpart", feasible=False,
                             bandwidth=system.bandwidth, seed=seed,
                             diagnostic=last_reason, step_trace=trace)
    q = best.quotient
    reports = []
    for vid in sorted(q.verts):
        v = q.verts[vid]
        req, blk_order, _ = requirement_of_members(dag, v.members)
        proc = system.processor(v.proc)
        reports.append(BlockReport(
            id=vid, processor=proc.id, processor_memory=proc.memory,
            processor_speed=proc.speed, requirement=req,
            fits=req <= proc.memory, work=v.weight,
            tasks=[dag.ids[u] for u in v.members],
            order=[dag.ids[u] for u in blk_order],
        ))
    return MappingResult(
        algorithm="hetpart", feasible=True, bandwidth=system.bandwidth,
        makespan=best.makespan, blocks=reports, critical_path=best.path,
        k_used=len(q.verts), seed=seed, step_trace=trace,
    )
