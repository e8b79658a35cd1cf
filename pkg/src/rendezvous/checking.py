"""Verdict machinery: certificates, bounded exploration, and sweeps.

A run that keeps the robots apart forever is witnessed finitely by a scaling
certificate: a schedule segment after which the whole joint state is an exact
affine copy of what it was, distances multiplied by a fixed factor. Repeating
the segment forever yields a fair schedule along which the distance is c^k * d,
never zero. Rigid runs admit a converse search: because the dynamics commute
with affine maps, the reachable states collapse to finitely many canonical
shapes, and a cycle through them at positive distance is exactly such a
certificate, while acyclicity (of the fair part) proves gathering.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil
from typing import Iterable, Sequence

from .adversaries import (
    DrivePlan,
    drive_to_config,
    lemma16_schedule,
    lemma17_schedule,
    lemma18_schedule,
    lemma19_schedule,
    lemma23_schedule,
    lockstep_two_rounds,
    one_color_asynch,
    rigid_drive_all_to_other,
    symmetric_fsynch,
)
from .algorithms import class_l_count, class_l_table_at, swap_ab
from .model import (
    AnyTable,
    Color,
    Configuration,
    Event,
    FinishCompute,
    FinishMove,
    Look,
    MidCompute,
    Moving,
    RIGID,
    Round,
    RuleTable,
    SchedulerKind,
    TerminatedPhase,
    Wait,
    format_table,
    initial_configuration,
    non_rigid,
    round_event,
)
from .model import Rule
from .scalar import HALF, ONE, ZERO, convex_point, format_scalar
from .schedule import ScheduleScript
from .semantics import (
    _fire_rule,
    apply_event,
    both_terminated,
    completes_cycle,
    gathered_stable,
    run_events,
    scale_configuration,
    swap_event,
    swap_robots,
)

logger = logging.getLogger(__name__)


class UnsupportedModelError(Exception):
    """Exploration asked for a setting it cannot decide (non-rigid moves)."""


class DispatchGapError(Exception):
    """No schedule builder in the library matches the table."""


class CertificateRejected(Exception):
    """A candidate period fails the self-similarity conditions."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


# --- state fingerprints ---------------------------------------------------------------


def _phase_fingerprint(phase) -> tuple:
    if isinstance(phase, Wait):
        return ("wait",)
    if isinstance(phase, MidCompute):
        snap = phase.snapshot
        return ("compute", snap.my_color, snap.other_color, snap.my_position, snap.other_position)
    if isinstance(phase, Moving):
        return ("moving", phase.destination, phase.start)
    return ("terminated",)


def state_fingerprint(config: Configuration) -> tuple:
    """Everything that determines future behavior: positions, lights, phase
    payloads. Cycle counters are bookkeeping and deliberately excluded."""
    return tuple(
        (robot.position, robot.light, _phase_fingerprint(robot.phase))
        for robot in config.robots
    )


def _reduced_phase(robot, table: AnyTable) -> tuple:
    """Phase summary keeping only what rigid dynamics read: a mid-compute
    snapshot is resolved to the (color, destination) it will commit, and a
    pending move is just its destination (rigid moves ignore the start)."""
    phase = robot.phase
    if isinstance(phase, Wait):
        return ("wait",)
    if isinstance(phase, MidCompute):
        outcome = _fire_rule(table, phase.snapshot)
        if not isinstance(outcome, Rule):
            return ("compute-terminate",)
        snap = phase.snapshot
        dest = convex_point(snap.my_position, snap.other_position, outcome.lam)
        return ("compute", outcome.next_color, dest)
    if isinstance(phase, Moving):
        return ("moving", phase.destination)
    return ("terminated",)


def reduced_fingerprint(config: Configuration, table: AnyTable) -> tuple:
    return tuple(
        (robot.position, robot.light, _reduced_phase(robot, table))
        for robot in config.robots
    )


# --- scaling certificates --------------------------------------------------------------


@dataclass(frozen=True)
class ScalingCertificate:
    """Witness that repeating `period` forever never gathers the robots.

    The end state is the start state pushed through x -> alpha*x + offset
    (robots swapped first when `swap`), so distances shrink or grow by exactly
    `factor` = |alpha| per period while colors and phases recur.
    """

    period: tuple[Event, ...]
    factor: Fraction
    alpha: Fraction
    offset: Fraction
    swap: bool
    start_distance: Fraction
    start_colors: tuple[Color, Color]
    start_phases: tuple[str, str]
    completions: tuple[int, int]


def _similarity(
    start: Configuration, end: Configuration, swap: bool
) -> tuple[Fraction, Fraction] | None:
    """Exact (alpha, offset) mapping start onto end (robot i compared against
    start robot 1-i when swap), or None."""
    source = swap_robots(start) if swap else start
    s0, s1 = (r.position for r in source.robots)
    e0, e1 = (r.position for r in end.robots)
    if s0 == s1:
        return None
    alpha = (e1 - e0) / (s1 - s0)
    if alpha == 0:
        return None
    offset = e0 - alpha * s0
    mapped = scale_configuration(source, alpha, offset)
    if state_fingerprint(mapped) == state_fingerprint(end):
        return alpha, offset
    return None


def _mismatch_reason(start: Configuration, end: Configuration) -> str:
    starts, ends = start.robots, end.robots
    if any(s.terminated != e.terminated for s, e in zip(starts, ends)):
        return "terminated mismatch"
    if any(s.light != e.light for s, e in zip(starts, ends)):
        return "color mismatch"
    if any(
        type(s.phase).__name__ != type(e.phase).__name__ for s, e in zip(starts, ends)
    ):
        return "phase mismatch"
    return "position mismatch"


def check_certificate(
    table: AnyTable,
    config: Configuration,
    period: Sequence[Event],
    replay_periods: int = 3,
) -> ScalingCertificate:
    """Validate a candidate period from `config` and return its certificate.

    Tries the direct similarity first, then the robot-swapped one. Fairness:
    without a swap each robot must complete a cycle inside the period; with a
    swap one completion suffices, because consecutive (swapped) repetitions
    alternate which physical robot it lands on. The accepted certificate is
    re-verified by replaying `replay_periods` repetitions exactly.
    """
    period = tuple(period)
    if not period:
        raise CertificateRejected("empty period")
    if config.distance == 0:
        raise CertificateRejected("zero distance")
    completions = [0, 0]
    current = config
    for event in period:
        current = apply_event(current, table, event)
        for robot in (0, 1):
            if completes_cycle(event, current, robot):
                completions[robot] += 1
    end = current
    if end.distance == 0:
        raise CertificateRejected("zero distance")
    if gathered_stable(end) or both_terminated(end):
        raise CertificateRejected("zero distance")

    chosen: tuple[bool, Fraction, Fraction] | None = None
    direct = _similarity(config, end, swap=False)
    if direct is not None and min(completions) >= 1:
        chosen = (False, *direct)
    if chosen is None:
        swapped = _similarity(config, end, swap=True)
        if swapped is not None and sum(completions) >= 1:
            chosen = (True, *swapped)
    if chosen is None:
        if direct is None and _similarity(config, end, swap=True) is None:
            raise CertificateRejected(_mismatch_reason(config, end))
        raise CertificateRejected("no full cycle")
    swap, alpha, offset = chosen

    # soundness replay: k repetitions land exactly on the k-th iterate
    expected = config
    actual = config
    for k in range(replay_periods):
        script = period if not (swap and k % 2 == 1) else tuple(swap_event(e) for e in period)
        for event in script:
            actual = apply_event(actual, table, event)
        source = swap_robots(expected) if swap else expected
        expected = scale_configuration(source, alpha, offset)
        if state_fingerprint(actual) != state_fingerprint(expected):
            raise CertificateRejected(f"replay diverged at period {k + 1}")

    return ScalingCertificate(
        period=period,
        factor=abs(alpha),
        alpha=alpha,
        offset=offset,
        swap=swap,
        start_distance=config.distance,
        start_colors=tuple(r.light for r in config.robots),
        start_phases=tuple(_phase_fingerprint(r.phase)[0] for r in config.robots),
        completions=tuple(completions),
    )


def try_certificate(
    table: AnyTable,
    config: Configuration,
    period: Sequence[Event],
    replay_periods: int = 3,
) -> ScalingCertificate | None:
    try:
        return check_certificate(table, config, period, replay_periods)
    except CertificateRejected:
        return None


# --- verdicts ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GathersProven:
    states_explored: int


@dataclass(frozen=True)
class GathersObserved:
    trace: object


@dataclass(frozen=True)
class NonGathering:
    certificate: ScalingCertificate


@dataclass(frozen=True)
class Defeated:
    adversary: str
    certificate: ScalingCertificate


@dataclass(frozen=True)
class Unknown:
    states_explored: int
    reason: str = ""


Verdict = GathersProven | GathersObserved | NonGathering | Defeated | Unknown


# --- bounded exploration of rigid models -----------------------------------------------


def _normalize(config: Configuration, table: AnyTable) -> Configuration:
    """Affine-map a configuration to canonical scale: robot 0 at 0 and robot 1
    at 1 when apart; when coincident, translate to 0 and rescale so the first
    nonzero pending destination is exactly +1 (fixing scale and reflection)."""
    p0 = config.robot(0).position
    p1 = config.robot(1).position
    if p0 != p1:
        alpha = 1 / (p1 - p0)
        return scale_configuration(config, alpha, -p0 * alpha)
    shifted = scale_configuration(config, ONE, -p0) if p0 != 0 else config
    unit: Fraction | None = None
    for robot in shifted.robots:
        for value in _reduced_phase(robot, table)[1:]:
            if isinstance(value, Fraction) and value != 0:
                unit = value
                break
        if unit is not None:
            break
    if unit is None:
        return shifted
    return scale_configuration(shifted, 1 / unit, ZERO)


def canonicalize(
    config: Configuration, table: AnyTable
) -> tuple[tuple, Configuration, bool]:
    """Canonical key, representative, and whether the robots were swapped."""
    direct = _normalize(config, table)
    flipped = _normalize(swap_robots(config), table)
    key_d = reduced_fingerprint(direct, table)
    key_f = reduced_fingerprint(flipped, table)
    if key_d <= key_f:
        return key_d, direct, False
    return key_f, flipped, True


def _branch_events(config: Configuration, model: str) -> list[Event]:
    live = [r.ident for r in config.robots if not r.terminated]
    if not live:
        return []
    if model == SchedulerKind.ASYNCH:
        events: list[Event] = []
        for ident in live:
            phase = config.robot(ident).phase
            if isinstance(phase, Wait):
                events.append(Look(ident))
            elif isinstance(phase, MidCompute):
                events.append(FinishCompute(ident))
            else:
                events.append(FinishMove(ident))
        return events
    if model == SchedulerKind.FSYNCH:
        return [round_event(tuple(live))]
    subsets = [(ident,) for ident in live]
    if len(live) > 1:
        subsets.append(tuple(live))
    return [round_event(s) for s in subsets]


@dataclass(frozen=True)
class _Edge:
    # one scheduling choice; two events when a commit resolves to a move that
    # goes nowhere, which is finished immediately (holding it changes nothing
    # either robot can observe)
    events: tuple[Event, ...]
    dst: int
    swapped: bool
    completions: tuple[int, ...]


def _tarjan_sccs(nodes: list, successors) -> list[list]:
    """Iterative Tarjan; returns SCCs as lists of nodes."""
    index: dict = {}
    low: dict = {}
    on_stack: set = set()
    stack: list = []
    sccs: list[list] = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(successors(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for nxt in it:
                if nxt not in index:
                    index[nxt] = low[nxt] = counter
                    counter += 1
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(successors(nxt))))
                    advanced = True
                    break
                if nxt in on_stack:
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                component = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    component.append(member)
                    if member == node:
                        break
                sccs.append(component)
    return sccs


def _shortest_path(start, goals, successors) -> list | None:
    """BFS returning the edge list of a shortest path from start into goals."""
    if start in goals:
        return []
    seen = {start}
    frontier = [(start, [])]
    while frontier:
        nxt_frontier = []
        for node, path in frontier:
            for edge, dst in successors(node):
                if dst in seen:
                    continue
                new_path = path + [(node, edge)]
                if dst in goals:
                    return new_path
                seen.add(dst)
                nxt_frontier.append((dst, new_path))
        frontier = nxt_frontier
    return None


def bounded_explore_rigid(
    table: AnyTable,
    start_colors: tuple[Color, Color],
    model: str = SchedulerKind.ASYNCH,
    depth: int = 200,
    rigidity=RIGID,
) -> Verdict:
    """Decide gathering for a rigid model by exhausting canonical states.

    Explores every schedule choice over the canonical quotient (scale,
    translation, reflection, robot relabeling). Gathering is proven when the
    explored graph is complete and no cycle among live states lets both robots
    keep completing cycles; such a cycle, when found, is extracted and
    validated as a NonGathering certificate.
    """
    if rigidity.delta is not None:
        raise UnsupportedModelError("exploration relies on scale invariance; moves must be rigid")
    start = initial_configuration(start_colors, (ZERO, ONE), rigidity=RIGID, model=model)
    start_key, start_rep, _ = canonicalize(start, table)
    # canonical keys are interned to dense ints; the graph algorithms below
    # hash node ids millions of times
    ids: dict[tuple, int] = {start_key: 0}
    reps: dict[int, Configuration] = {0: start_rep}
    edges: dict[int, list[_Edge]] = {}
    frontier = [0]
    truncated = False
    while frontier:
        if len(edges) >= depth:
            truncated = True
            break
        key = frontier.pop()
        if key in edges:
            continue
        rep = reps[key]
        if gathered_stable(rep) or both_terminated(rep):
            edges[key] = []
            continue
        out = []
        for event in _branch_events(rep, model):
            nxt = apply_event(rep, table, event)
            chain = (event,)
            if isinstance(event, FinishCompute):
                mover = nxt.robot(event.robot)
                if isinstance(mover.phase, Moving) and mover.phase.destination == mover.position:
                    follow = FinishMove(event.robot)
                    nxt = apply_event(nxt, table, follow)
                    chain = (event, follow)
            completions = tuple(
                r for r in (0, 1) if any(completes_cycle(ev, nxt, r) for ev in chain)
            )
            nxt_key, nxt_rep, swapped = canonicalize(nxt, table)
            nid = ids.get(nxt_key)
            if nid is None:
                nid = len(ids)
                ids[nxt_key] = nid
                reps[nid] = nxt_rep
                frontier.append(nid)
            out.append(_Edge(chain, nid, swapped, completions))
        edges[key] = out
    states = len(reps)

    # double cover: nodes carry the parity of accumulated robot swaps so that
    # completion labels can be read off for the physical robots
    def successors(node):
        key, parity = node
        for edge in edges.get(key, ()):
            yield (edge.dst, parity ^ edge.swapped)

    def edge_successors(node):
        key, parity = node
        for edge in edges.get(key, ()):
            yield edge, (edge.dst, parity ^ edge.swapped)

    all_nodes = [(key, parity) for key in edges for parity in (0, 1)]
    sccs = _tarjan_sccs(all_nodes, successors)
    for component in sccs:
        members = set(component)
        if all(reps[key].distance == 0 for key, _ in members):
            # robots coincident throughout: an execution looping here stays
            # gathered forever (possibly re-looking and committing null
            # moves), which is a success, not a defeat
            continue
        seen_robots: set[int] = set()
        for key, parity in component:
            for edge in edges.get(key, ()):
                if (edge.dst, parity ^ edge.swapped) not in members:
                    continue
                seen_robots.update(r ^ parity for r in edge.completions)
        if seen_robots != {0, 1}:
            continue
        cycle = _extract_fair_cycle(members, edge_successors)
        if cycle is None:
            continue
        verdict = _cycle_certificate(table, reps, cycle)
        if verdict is not None:
            return verdict
        return Unknown(states, "fair cycle found but certificate extraction failed")
    if truncated:
        return Unknown(states, "state budget exhausted")
    return GathersProven(states)


def _extract_fair_cycle(members: set, edge_successors) -> list | None:
    """A shortest cycle inside the SCC containing a completion for each
    physical robot, as a list of (node, edge) pairs. Deterministic: candidate
    completion edges are scanned in sorted order."""

    def internal(node):
        for edge, dst in edge_successors(node):
            if dst in members:
                yield edge, dst

    def completion_edges(robot):
        found = []
        for node in members:
            key, parity = node
            for edge, dst in internal(node):
                if any(r ^ parity == robot for r in edge.completions):
                    found.append((node, edge, dst))
        found.sort(key=repr)
        return found

    def path_between(src, dst):
        if src == dst:
            return []
        return _shortest_path(src, {dst}, internal)

    def hop_counts(src):
        dist = {src: 0}
        frontier = [src]
        while frontier:
            nxt = []
            for node in frontier:
                for _, dst in internal(node):
                    if dst not in dist:
                        dist[dst] = dist[node] + 1
                        nxt.append(dst)
            frontier = nxt
        return dist

    comp0 = completion_edges(0)
    comp1 = completion_edges(1)
    hops: dict = {}
    for _, _, dst in comp0 + comp1:
        if dst not in hops:
            hops[dst] = hop_counts(dst)
    best = None
    for cand0 in comp0:
        for cand1 in comp1:
            leg0 = hops[cand0[2]].get(cand1[0])
            leg1 = hops[cand1[2]].get(cand0[0])
            if leg0 is None or leg1 is None:
                continue
            length = leg0 + leg1 + 2
            if best is None or length < best[0]:
                best = (length, cand0, cand1)
    if best is None:
        return None
    _, (node0, edge0, dst0), (node1, edge1, dst1) = best
    mid = path_between(dst0, node1)
    back = path_between(dst1, node0)
    if mid is None or back is None:  # pragma: no cover - hop table said reachable
        return None
    return [(node0, edge0)] + mid + [(node1, edge1)] + back


def _cycle_certificate(
    table: AnyTable, reps: dict, cycle: list
) -> NonGathering | None:
    """Rebuild the concrete period along the cycle and validate it."""
    # rotate the cycle to start at a node whose representative is apart,
    # preferring one with no snapshot in flight (exact replay then recurs
    # through states the reduced key describes completely)
    offset = None
    fallback = None
    for i, (node, _) in enumerate(cycle):
        rep = reps[node[0]]
        if rep.distance == 0:
            continue
        if not any(isinstance(r.phase, MidCompute) for r in rep.robots):
            offset = i
            break
        if fallback is None:
            fallback = i
    if offset is None:
        offset = fallback
    if offset is None:
        return None
    rotated = cycle[offset:] + cycle[:offset]
    start_rep = reps[rotated[0][0][0]]
    parity0 = rotated[0][0][1]
    events = []
    for node, edge in rotated:
        _, parity = node
        relative = parity ^ parity0
        for ev in edge.events:
            events.append(swap_event(ev) if relative else ev)
    cert = try_certificate(table, start_rep, events)
    if cert is None:
        logger.debug("extracted cycle failed certificate validation")
        return None
    return NonGathering(cert)


# --- the two-color sweeps ----------------------------------------------------------------


@dataclass(frozen=True)
class DefeatPlan:
    lemma: str
    start_colors: tuple[Color, Color]
    script: ScheduleScript
    expected_factor: Fraction


def _one_color_factor(lam: Fraction) -> Fraction:
    return HALF if lam == HALF else abs(1 - 2 * lam)


def dispatch_arbitrary(table: RuleTable) -> DefeatPlan:
    """Pick the schedule builder whose hypothesis the table satisfies, for
    defeats allowed to start from any color pair. Total on two-color tables."""
    a, b = table.palette
    r_aa, r_ab = table.entries[(a, a)], table.entries[(a, b)]
    r_ba, r_bb = table.entries[(b, a)], table.entries[(b, b)]
    if r_aa.next_color == a:
        return DefeatPlan(
            "one_color_fixed_point", (a, a), one_color_asynch(r_aa.lam), _one_color_factor(r_aa.lam)
        )
    if r_bb.next_color == b:
        return DefeatPlan(
            "one_color_fixed_point", (b, b), one_color_asynch(r_bb.lam), _one_color_factor(r_bb.lam)
        )
    if r_aa.lam != HALF and r_bb.lam != HALF:
        factor = abs(1 - 2 * r_aa.lam) * abs(1 - 2 * r_bb.lam)
        return DefeatPlan("lockstep_two_rounds", (a, a), lockstep_two_rounds(table), factor)
    if r_aa.lam != HALF:
        # then the B(B) rule is the midpoint rule; swap color names and retry
        plan = dispatch_arbitrary(swap_ab(table))
        mapping = {a: b, b: a}
        colors = tuple(mapping[c] for c in plan.start_colors)
        return DefeatPlan(plan.lemma + "/relabeled", colors, plan.script, plan.expected_factor)
    # now A(A) -> (B, 1/2)
    if r_bb.next_color == a and r_bb.lam != ZERO:
        return DefeatPlan(
            "lemma19", (a, a), lemma19_schedule(r_bb.lam, table=table), abs(r_bb.lam) / 2
        )
    if r_ba.next_color == a:
        factor = HALF if r_ba.lam == ONE else abs(1 - r_ba.lam) / 2
        return DefeatPlan("lemma16", (a, a), lemma16_schedule(r_ba.lam, table=table), factor)
    # now B(B) -> (A, 0) and B(A) -> (B, lam)
    if r_ba.lam != ZERO:
        return DefeatPlan(
            "lemma17", (a, a), lemma17_schedule(r_ba.lam, table=table), abs(r_ba.lam) / 2
        )
    if r_ab.next_color == b:
        case = "to_B_1" if r_ab.lam == ONE else "to_B_not1"
        factor = HALF if r_ab.lam == ONE else abs(1 - r_ab.lam) / 2
        return DefeatPlan(
            f"lemma18/{case}", (a, a), lemma18_schedule(r_ab.lam, case, table=table), factor
        )
    if r_ab.lam != ONE:
        return DefeatPlan(
            "lemma18/stays_A",
            (a, a),
            lemma18_schedule(r_ab.lam, "stays_A", table=table),
            abs(1 - r_ab.lam),
        )
    # all cells pinned: A(A)=(B,1/2), A(B)=(A,1), B(A)=(B,0), B(B)=(A,0)
    return DefeatPlan("lemma23", (b, b), lemma23_schedule(table=table), HALF)


def dispatch_preset_aa(table: RuleTable) -> DefeatPlan | None:
    """Like dispatch_arbitrary, but defeats may only start from color pairs
    reachable from the all-A start under rigid moves. Returns None for tables
    the library cannot defeat under that restriction (the survivor family)."""
    a, b = table.palette
    r_aa, r_ab = table.entries[(a, a)], table.entries[(a, b)]
    r_ba, r_bb = table.entries[(b, a)], table.entries[(b, b)]
    if r_aa.next_color == a:
        return DefeatPlan(
            "one_color_fixed_point", (a, a), one_color_asynch(r_aa.lam), _one_color_factor(r_aa.lam)
        )
    if r_aa.lam != HALF:
        # the all-B pair is reachable by one joint full cycle
        if r_bb.next_color == b:
            return DefeatPlan(
                "one_color_fixed_point/driven",
                (b, b),
                one_color_asynch(r_bb.lam),
                _one_color_factor(r_bb.lam),
            )
        if r_bb.lam != HALF:
            factor = abs(1 - 2 * r_aa.lam) * abs(1 - 2 * r_bb.lam)
            return DefeatPlan("lockstep_two_rounds", (a, a), lockstep_two_rounds(table), factor)
        plan = dispatch_arbitrary(swap_ab(table))
        mapping = {a: b, b: a}
        colors = tuple(mapping[c] for c in plan.start_colors)
        suffix = "/driven" if colors == (b, b) else ""
        return DefeatPlan(plan.lemma + "/relabeled" + suffix, colors, plan.script, plan.expected_factor)
    # A(A) -> (B, 1/2): the all-B pair is rigidly unreachable, so only
    # schedules starting at the all-A pair (or via their own prefixes) apply
    if r_bb.next_color == a and r_bb.lam != ZERO:
        return DefeatPlan(
            "lemma19", (a, a), lemma19_schedule(r_bb.lam, table=table), abs(r_bb.lam) / 2
        )
    if r_ba.next_color == a:
        factor = HALF if r_ba.lam == ONE else abs(1 - r_ba.lam) / 2
        return DefeatPlan("lemma16", (a, a), lemma16_schedule(r_ba.lam, table=table), factor)
    if r_bb.next_color == a and r_bb.lam == ZERO and r_ba.lam != ZERO:
        return DefeatPlan(
            "lemma17", (a, a), lemma17_schedule(r_ba.lam, table=table), abs(r_ba.lam) / 2
        )
    if r_bb.next_color == a and r_bb.lam == ZERO and r_ba.lam == ZERO and r_ab.next_color == b:
        case = "to_B_1" if r_ab.lam == ONE else "to_B_not1"
        factor = HALF if r_ab.lam == ONE else abs(1 - r_ab.lam) / 2
        return DefeatPlan(
            f"lemma18/{case}", (a, a), lemma18_schedule(r_ab.lam, case, table=table), factor
        )
    if r_ba.next_color == b and r_ba.lam == ZERO and r_ab.next_color == a and r_ab.lam != ONE:
        # the pinned-chaser schedule touches neither same-color cell, so it
        # applies whatever the B(B) rule says
        return DefeatPlan(
            "lemma18/stays_A",
            (a, a),
            lemma18_schedule(r_ab.lam, "stays_A", table=table),
            abs(1 - r_ab.lam),
        )
    return None


def structural_preset_survivors(grid: Sequence[Fraction]) -> set[int]:
    """Indices the preset-start sweep is expected to leave undefeated, derived
    from the dispatch conditions alone (no simulation). Mirrors
    dispatch_preset_aa case by case; tests assert the sweep agrees exactly."""
    survivors = set()
    for index in range(class_l_count(2, tuple(grid))):
        table = class_l_table_at(index, 2, tuple(grid))
        a, b = table.palette
        r_aa, r_ab = table.entries[(a, a)], table.entries[(a, b)]
        r_ba, r_bb = table.entries[(b, a)], table.entries[(b, b)]
        if r_aa.next_color != b or r_aa.lam != HALF:
            continue  # defeated at the all-A pair or after a drive to all-B
        if r_bb.next_color == a and r_bb.lam != ZERO:
            continue  # lemma19
        if r_ba.next_color == a:
            continue  # lemma16
        if r_bb.next_color == a and r_ba.lam != ZERO:
            continue  # lemma17 (the B(B) rule is (A, 0) past the lemma19 case)
        if r_bb.next_color == a and r_ba.lam == ZERO and r_ab.next_color == b:
            continue  # lemma18, chaser changes color
        if r_ba.lam == ZERO and r_ab.next_color == a and r_ab.lam != ONE:
            continue  # lemma18, chaser keeps its color
        survivors.add(index)
    return survivors


@dataclass(frozen=True)
class SweepRecord:
    index: int
    rules: str
    verdict: str
    lemma: str | None = None
    factor: Fraction | None = None
    start_colors: tuple[Color, Color] | None = None
    drive_initial_distance: Fraction | None = None
    drive_target_distance: Fraction | None = None

    def to_json_dict(self) -> dict:
        data: dict = {"index": self.index, "rules": self.rules, "verdict": self.verdict}
        if self.lemma is not None:
            data["lemma"] = self.lemma
        if self.factor is not None:
            data["factor"] = format_scalar(self.factor)
        if self.start_colors is not None:
            data["start_colors"] = list(self.start_colors)
        if self.drive_initial_distance is not None:
            data["drive_initial_distance"] = format_scalar(self.drive_initial_distance)
        if self.drive_target_distance is not None:
            data["drive_target_distance"] = format_scalar(self.drive_target_distance)
        return data


@dataclass
class SweepReport:
    mode: str
    grid: tuple[Fraction, ...]
    records: list[SweepRecord]

    @property
    def survivors(self) -> list[int]:
        return [r.index for r in self.records if r.verdict == "survived"]

    @property
    def total(self) -> int:
        return len(self.records)

    def to_json_dict(self) -> dict:
        return {
            "mode": self.mode,
            "grid": [format_scalar(v) for v in self.grid],
            "total": self.total,
            "survivors": self.survivors,
            "records": [r.to_json_dict() for r in sorted(self.records, key=lambda r: r.index)],
        }

    def summary(self) -> str:
        survivors = self.survivors
        lines = [
            f"mode: {self.mode}",
            f"grid: {{{', '.join(format_scalar(v) for v in self.grid)}}}",
            f"{len(survivors)}/{self.total} survive",
        ]
        if survivors:
            lines.append("surviving indices: " + ", ".join(str(i) for i in survivors))
        return "\n".join(lines)


def _compact_rules(table: RuleTable) -> str:
    cells = []
    for (me, other), rule in sorted(table.entries.items()):
        cells.append(f"{me}{other}->{rule.next_color}:{format_scalar(rule.lam)}")
    return " ".join(cells)


SWEEP_MODES = ("rigid-asynch-arbitrary", "rigid-asynch-preset-aa", "nonrigid-asynch-preset")


def _defeat_record_rigid(table: RuleTable, index: int, plan: DefeatPlan, driven: bool) -> SweepRecord:
    prefix_events: list[Event] = []
    config = initial_configuration(plan.start_colors, (ZERO, ONE), rigidity=RIGID)
    if driven:
        drive_script, drive_factor = rigid_drive_all_to_other(table)
        a, _ = table.palette
        config = initial_configuration((a, a), (ZERO, ONE), rigidity=RIGID)
        prefix_events.extend(drive_script.events())
    prefix_events.extend(plan.script.prefix)
    if prefix_events:
        trace = run_events(config, table, prefix_events, stop_when_settled=False)
        config = trace.final
    cert = check_certificate(table, config, plan.script.period)
    if cert.factor != plan.expected_factor:
        raise DispatchGapError(
            f"table {index}: {plan.lemma} produced factor {cert.factor}, "
            f"expected {plan.expected_factor}"
        )
    return SweepRecord(
        index=index,
        rules=_compact_rules(table),
        verdict="defeated",
        lemma=plan.lemma,
        factor=cert.factor,
        start_colors=plan.start_colors,
    )


def _sweep_one(index: int, grid: tuple[Fraction, ...], mode: str, delta: Fraction) -> SweepRecord:
    table = class_l_table_at(index, 2, grid)
    if mode == "rigid-asynch-arbitrary":
        plan = dispatch_arbitrary(table)
        return _defeat_record_rigid(table, index, plan, driven=False)
    if mode == "rigid-asynch-preset-aa":
        plan = dispatch_preset_aa(table)
        if plan is None:
            return SweepRecord(index=index, rules=_compact_rules(table), verdict="survived")
        driven = plan.lemma.endswith("/driven")
        return _defeat_record_rigid(table, index, plan, driven=driven)
    if mode == "nonrigid-asynch-preset":
        plan = dispatch_arbitrary(table)
        drive = drive_to_config(table, plan.start_colors, ONE, delta)
        a, _ = table.palette
        config = initial_configuration(
            (a, a), (ZERO, drive.initial_distance), rigidity=non_rigid(delta)
        )
        drive_events = list(drive.script.prefix) + list(drive.script.period)
        if drive_events:
            trace = run_events(config, table, drive_events, stop_when_settled=False)
            config = trace.final
        reached = tuple(r.light for r in config.robots)
        if reached != plan.start_colors or config.distance != drive.target_distance:
            raise DispatchGapError(
                f"table {index}: drive reached {reached} at {config.distance}, "
                f"wanted {plan.start_colors} at {drive.target_distance}"
            )
        if plan.script.prefix:
            trace = run_events(config, table, list(plan.script.prefix), stop_when_settled=False)
            config = trace.final
        cert = check_certificate(table, config, plan.script.period)
        if cert.factor != plan.expected_factor:
            raise DispatchGapError(
                f"table {index}: {plan.lemma} produced factor {cert.factor}, "
                f"expected {plan.expected_factor}"
            )
        return SweepRecord(
            index=index,
            rules=_compact_rules(table),
            verdict="defeated",
            lemma=plan.lemma,
            factor=cert.factor,
            start_colors=plan.start_colors,
            drive_initial_distance=drive.initial_distance,
            drive_target_distance=drive.target_distance,
        )
    raise ValueError(f"unknown sweep mode {mode!r}; expected one of {SWEEP_MODES}")


def _sweep_chunk(args: tuple) -> list[SweepRecord]:
    indices, grid, mode, delta = args
    return [_sweep_one(i, grid, mode, delta) for i in indices]


def sweep_two_colors(
    grid: tuple[Fraction, ...],
    mode: str = "rigid-asynch-arbitrary",
    jobs: int = 1,
    delta: Fraction = ONE,
) -> SweepReport:
    """Run the dispatched adversary against every two-color table on the grid."""
    if mode not in SWEEP_MODES:
        raise ValueError(f"unknown sweep mode {mode!r}; expected one of {SWEEP_MODES}")
    total = class_l_count(2, grid)
    indices = list(range(total))
    if jobs <= 1:
        records = [_sweep_one(i, grid, mode, delta) for i in indices]
    else:
        chunks = [
            (indices[k::jobs], grid, mode, delta) for k in range(jobs) if indices[k::jobs]
        ]
        records = []
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for part in pool.map(_sweep_chunk, chunks):
                records.extend(part)
        records.sort(key=lambda r: r.index)
    logger.info("sweep %s: %d/%d survive", mode, total - sum(
        1 for r in records if r.verdict == "defeated"), total)
    return SweepReport(mode=mode, grid=tuple(grid), records=records)


def sweep_one_color(
    grid: tuple[Fraction, ...], model: str = SchedulerKind.SSYNCH
) -> SweepReport:
    """Defeat every single-light table with the joint/lone-round schedule."""
    records = []
    for index in range(class_l_count(1, grid)):
        table = class_l_table_at(index, 1, grid)
        script = symmetric_fsynch(table)
        config = initial_configuration(("A", "A"), (ZERO, ONE), rigidity=RIGID, model=model)
        cert = check_certificate(table, config, script.period)
        records.append(
            SweepRecord(
                index=index,
                rules=_compact_rules(table),
                verdict="defeated",
                lemma="symmetric_rounds",
                factor=cert.factor,
                start_colors=("A", "A"),
            )
        )
    return SweepReport(mode=f"one-color-{model}", grid=tuple(grid), records=records)


# --- trace-level bound checks -------------------------------------------------------------


class WrongRigidityError(Exception):
    """A bound check was handed a trace from the wrong movement model."""


GATHERING_SLACK_CYCLES = 8  # covers the bounded color-churn prefix before progress


def check_gathering_bound(trace, delta: Fraction, d0: Fraction) -> bool:
    """True iff the trace gathers within the movement-derived budget.

    After the last event that changes a light, each robot may complete at most
    ceil(d0/delta) + slack cycles before the run is stably gathered; along the
    way the distance must never increase across a round event.
    """
    if trace.initial.rigidity.delta is None:
        raise WrongRigidityError("gathering bound applies to bounded-advance moves only")
    if trace.initial.rigidity.delta != delta:
        raise WrongRigidityError(
            f"trace was produced with delta={trace.initial.rigidity.delta}, not {delta}"
        )
    if not gathered_stable(trace.final):
        return False
    previous = trace.initial
    last_color_change = -1
    for i, (event, config) in enumerate(trace.steps):
        if isinstance(event, Round) and config.distance > previous.distance:
            return False
        if any(
            config.robot(r).light != previous.robot(r).light for r in (0, 1)
        ):
            last_color_change = i
        previous = config
    budget = ceil(d0 / delta) + GATHERING_SLACK_CYCLES
    base = trace.steps[last_color_change][1] if last_color_change >= 0 else trace.initial
    final = trace.final
    for robot in (0, 1):
        completed = final.robot(robot).cycles_completed - base.robot(robot).cycles_completed
        if completed > budget:
            return False
    return True


def check_termination(trace) -> bool:
    """True iff both robots terminate, together, and never at a distance."""
    final = trace.final
    if not both_terminated(final):
        return False
    if final.robot(0).position != final.robot(1).position:
        return False
    previous = trace.initial
    for event, config in trace.steps:
        for robot in (0, 1):
            if config.robot(robot).terminated and not previous.robot(robot).terminated:
                if config.distance != 0:
                    return False
        previous = config
    return True


def stationary_while_lit(trace, color: Color = "C") -> bool:
    """No robot showing `color` ever holds a destination away from itself, and
    terminated robots never move again."""
    for config in trace.configurations():
        for robot in config.robots:
            if robot.light == color and isinstance(robot.phase, Moving):
                if robot.phase.destination != robot.position:
                    return False
    previous = trace.initial
    for _, config in trace.steps:
        for robot in (0, 1):
            if previous.robot(robot).terminated:
                if config.robot(robot).position != previous.robot(robot).position:
                    return False
        previous = config
    return True


def colors_freeze_after_split(trace, table: AnyTable) -> bool:
    """Once the two lights differ and neither robot is mid-compute about to
    change color, no light ever changes again."""
    from .semantics import _fire_rule
    from .model import Rule, Snapshot

    frozen_from = None
    configs = list(trace.configurations())
    for i, config in enumerate(configs):
        lights = [r.light for r in config.robots]
        if lights[0] == lights[1]:
            continue
        pending_change = False
        for robot in config.robots:
            if isinstance(robot.phase, MidCompute):
                rule = _fire_rule(table, robot.phase.snapshot)
                if isinstance(rule, Rule) and rule.next_color != robot.light:
                    pending_change = True
        if not pending_change:
            frozen_from = i
            break
    if frozen_from is None:
        return True
    lights = tuple(r.light for r in configs[frozen_from].robots)
    return all(
        tuple(r.light for r in config.robots) == lights for config in configs[frozen_from:]
    )
