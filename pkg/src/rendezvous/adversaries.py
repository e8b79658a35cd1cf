"""Adversarial schedules that defeat specific families of rule tables.

Each builder encodes one hand-constructed schedule from the impossibility
analysis: run against any table satisfying the builder's hypothesis, the
returned script's period maps the configuration onto a scaled copy of itself,
so repeating it forever keeps the robots apart while staying fair. Scripts
mention robots only by index, never by light, so a color-relabeled table is
defeated by the very same script (only the start colors move).

Robot 0 plays the schedule's first-acting robot; robot 1 the other.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .model import (
    AnyTable,
    Color,
    Configuration,
    Event,
    FinishCompute,
    FinishMove,
    Look,
    Moving,
    Rule,
    RuleTable,
    SchedulerKind,
    Snapshot,
    Terminate,
    round_event,
)
from .scalar import HALF, ONE, ZERO, convex_point
from .schedule import ScheduleScript
from .semantics import FairnessPolicy, _fire_rule


class PreconditionMismatch(Exception):
    """Builder applied to a table that does not satisfy its hypothesis."""


class UnreachableTarget(Exception):
    """drive_to_config asked for colors the table cannot produce."""


def _expect(
    table: RuleTable,
    me: Color,
    other: Color,
    next_color: Color | None = None,
    lam: Fraction | None = None,
) -> Rule:
    rule = table.entries[(me, other)]
    if next_color is not None and rule.next_color != next_color:
        raise PreconditionMismatch(
            f"need {me}({other}) -> ({next_color}, ...), table has {rule}"
        )
    if lam is not None and rule.lam != lam:
        raise PreconditionMismatch(f"need {me}({other}) with lambda={lam}, table has {rule}")
    return rule


def _two_colors(table: RuleTable) -> tuple[Color, Color]:
    if len(table.palette) != 2:
        raise PreconditionMismatch(f"two-color table required, palette is {table.palette}")
    return table.palette  # type: ignore[return-value]


def _cycle(robot: int) -> list[Event]:
    return [Look(robot), FinishCompute(robot), FinishMove(robot)]


# --- one-color and lockstep schedules ------------------------------------------------


def symmetric_fsynch(table: RuleTable) -> ScheduleScript:
    """Defeat any single-light table with joint activations.

    Both robots activated together make mirror-image moves around their
    midpoint and never meet unless the rule is exactly the midpoint rule; in
    that case activating exactly one robot per round halves the distance
    instead (the certificate alternates which robot via relabeling).
    """
    if len(table.palette) != 1:
        raise PreconditionMismatch("symmetric_fsynch handles single-light tables only")
    (color,) = table.palette
    lam = table.entries[(color, color)].lam
    if lam == HALF:
        period: tuple[Event, ...] = (round_event((0,)),)
    else:
        period = (round_event((0, 1)),)
    return ScheduleScript((), period, None)


def one_color_asynch(lam: Fraction, table: RuleTable | None = None) -> ScheduleScript:
    """The same defeat re-expressed with fine-grained events, for tables whose
    reachable snapshots all fire one fixed (next = same color) rule."""
    if table is not None:
        colors = table.palette
        same = [table.entries[(c, c)] for c in colors]
        if not any(r == Rule(c, lam) for c, r in zip(colors, same)):
            raise PreconditionMismatch(f"no same-color fixed point with lambda={lam}")
    if lam == HALF:
        period = tuple(_cycle(0))
    else:
        period = (Look(0), Look(1), FinishCompute(0), FinishCompute(1), FinishMove(0), FinishMove(1))
    return ScheduleScript((), period, None)


def lockstep_two_rounds(table: RuleTable | None = None) -> ScheduleScript:
    """Joint full cycles, twice: colors go all-A -> all-B -> all-A while the
    distance picks up the exact factor |1-2*lam| per round. Defeats every
    two-color table in which neither same-color rule aims at the midpoint."""
    if table is not None:
        a, b = _two_colors(table)
        _expect(table, a, a, next_color=b)
        _expect(table, b, b, next_color=a)
        if table.entries[(a, a)].lam == HALF or table.entries[(b, b)].lam == HALF:
            raise PreconditionMismatch("a same-color rule aims at the midpoint")
    joint = (Look(0), Look(1), FinishCompute(0), FinishCompute(1), FinishMove(0), FinishMove(1))
    return ScheduleScript((), joint + joint, None)


# --- the staggered-cycle schedules ---------------------------------------------------


def lemma16_schedule(lam: Fraction, table: RuleTable | None = None) -> ScheduleScript:
    """For tables with A(A) -> (B, 1/2) and B(A) -> (A, lam).

    lam != 1: one robot runs two full cycles (turn B at the midpoint, then back
    to A moving by lam past it); distance gains the exact factor |1-lam|/2 and
    the roles swap. lam = 1: the second robot sneaks two full cycles in while
    the first is still heading for the other's old position; factor 1/2.
    """
    if table is not None:
        a, b = _two_colors(table)
        _expect(table, a, a, next_color=b, lam=HALF)
        _expect(table, b, a, next_color=a, lam=lam)
    if lam != ONE:
        period = tuple(_cycle(0) + _cycle(0))
        return ScheduleScript((), period, None)
    period = (
        Look(0), FinishCompute(0), FinishMove(0),
        Look(0), FinishCompute(0),
        Look(1), FinishCompute(1), FinishMove(1),
        Look(1), FinishCompute(1), FinishMove(1),
        FinishMove(0),
    )
    return ScheduleScript((), period, None)


def lemma19_schedule(lam: Fraction, table: RuleTable | None = None) -> ScheduleScript:
    """For tables with A(A) -> (B, 1/2) and B(B) -> (A, lam), lam != 0.

    Both robots look together and commit to the midpoint; one finishes and
    re-looks while the other still shows B, so it backs away from the meeting
    point by lam times the half-distance. Exact factor |lam|/2.
    """
    if lam == ZERO:
        raise PreconditionMismatch("lam = 0 leaves nothing to exploit")
    if table is not None:
        a, b = _two_colors(table)
        _expect(table, a, a, next_color=b, lam=HALF)
        _expect(table, b, b, next_color=a, lam=lam)
    period = (
        Look(0), Look(1), FinishCompute(0), FinishCompute(1),
        FinishMove(0),
        Look(0),
        FinishMove(1),
        Look(1), FinishCompute(1), FinishMove(1),
        FinishCompute(0), FinishMove(0),
    )
    return ScheduleScript((), period, None)


def lemma17_schedule(lam: Fraction, table: RuleTable | None = None) -> ScheduleScript:
    """For tables with A(A) -> (B, 1/2), B(B) -> (A, 0), B(A) -> (B, lam != 0).

    The first robot reaches the midpoint, re-looks while the other still shows
    A, and drifts lam past it while keeping light B; a final joint cycle resets
    both lights to A. Exact factor |lam|/2.
    """
    if lam == ZERO:
        raise PreconditionMismatch("lam = 0 leaves nothing to exploit")
    if table is not None:
        a, b = _two_colors(table)
        _expect(table, a, a, next_color=b, lam=HALF)
        _expect(table, b, b, next_color=a, lam=ZERO)
        _expect(table, b, a, next_color=b, lam=lam)
    period = (
        Look(0), Look(1),
        FinishCompute(0), FinishMove(0),
        Look(0), FinishCompute(0), FinishMove(0),
        FinishCompute(1), FinishMove(1),
        Look(0), Look(1), FinishCompute(0), FinishCompute(1), FinishMove(0), FinishMove(1),
    )
    return ScheduleScript((), period, None)


LEMMA18_CASES = ("to_B_not1", "to_B_1", "stays_A")


def lemma18_schedule(
    lam: Fraction, case: str, table: RuleTable | None = None
) -> ScheduleScript:
    """For tables with A(A) -> (B, 1/2) and B(A) -> (B, 0), split on A(B).

    to_B_not1: A(B) -> (B, lam != 1); staggered single cycles then a joint
    reset via B(B) -> (A, 0); factor |1-lam|/2. to_B_1: A(B) -> (B, 1); the
    second robot lands exactly on the first mid-move, which then slips away to
    the midpoint; factor 1/2. stays_A: A(B) -> (A, lam != 1); the B robot is
    pinned forever and the chaser contracts by |1-lam| per cycle without ever
    arriving (a fixed-point chase rather than a role swap).
    """
    if case not in LEMMA18_CASES:
        raise PreconditionMismatch(f"unknown case {case!r}, expected one of {LEMMA18_CASES}")
    if case == "to_B_1" and lam != ONE:
        raise PreconditionMismatch("case to_B_1 requires lam = 1")
    if case != "to_B_1" and lam == ONE:
        raise PreconditionMismatch(f"case {case} requires lam != 1")
    if table is not None:
        a, b = _two_colors(table)
        _expect(table, a, a, next_color=b, lam=HALF)
        if case in ("to_B_not1", "to_B_1"):
            _expect(table, b, b, next_color=a, lam=ZERO)
            _expect(table, a, b, next_color=b, lam=lam)
        else:
            _expect(table, b, a, next_color=b, lam=ZERO)
            _expect(table, a, b, next_color=a, lam=lam)
    joint = (Look(0), Look(1), FinishCompute(0), FinishCompute(1), FinishMove(0), FinishMove(1))
    if case == "to_B_not1":
        period = tuple(_cycle(0) + _cycle(1)) + joint
        return ScheduleScript((), period, None)
    if case == "to_B_1":
        period = (
            Look(0), FinishCompute(0),
            Look(1), FinishCompute(1), FinishMove(1),
            FinishMove(0),
        ) + joint
        return ScheduleScript((), period, None)
    prefix = tuple(_cycle(0))
    period = tuple(_cycle(1) + _cycle(0))
    return ScheduleScript(prefix, period, None)


def lemma23_schedule(table: RuleTable | None = None) -> ScheduleScript:
    """Defeat alg1 itself from the all-B start under rigid asynchrony.

    Both robots look (planning the B(B) light reset); robot 0 finishes and
    re-looks, committing to chase; robot 1 finishes and re-looks, committing to
    the midpoint; robot 0 completes the chase plus one whole extra cycle, then
    robot 1 finally walks to the stale midpoint. Distance exactly halves with
    both robots back on B.
    """
    if table is not None:
        a, b = _two_colors(table)
        _expect(table, a, a, next_color=b, lam=HALF)
        _expect(table, a, b, next_color=a, lam=ONE)
        _expect(table, b, a, next_color=b, lam=ZERO)
        _expect(table, b, b, next_color=a, lam=ZERO)
    period = (
        Look(0), Look(1),
        FinishCompute(0), FinishMove(0),
        Look(0),
        FinishCompute(1), FinishMove(1),
        Look(1),
        FinishCompute(0), FinishMove(0),
        Look(0), FinishCompute(0), FinishMove(0),
        FinishCompute(1), FinishMove(1),
    )
    return ScheduleScript((), period, None)


# --- driving the all-A start to other color pairs ------------------------------------


@dataclass(frozen=True)
class DrivePlan:
    """Exact recipe reaching (target colors, target distance) from an all-A
    start: place the robots `initial_distance` apart (robot 0 at 0, robot 1 at
    +initial_distance) and play `script`."""

    initial_distance: Fraction
    script: ScheduleScript
    target_colors: tuple[Color, Color]
    target_distance: Fraction


def drive_to_config(
    table: RuleTable,
    target_colors: tuple[Color, Color],
    target_distance: Fraction,
    delta: Fraction,
) -> DrivePlan:
    """Reach a wanted color pair at an exact distance under non-rigid moves.

    Same-color target: both robots run one joint cycle; if the A(A) rule is the
    midpoint rule they start target + 2*delta apart and are each stopped after
    exactly delta, otherwise they start target/|1-2*lam| apart and move fully.
    Opposite-color target: a single robot runs one cycle, stopped after delta
    from distance target + delta when that is legal, else moved fully from
    distance target/|1-lam|.
    """
    a, b = _two_colors(table)
    if target_distance <= 0:
        raise UnreachableTarget("target distance must be positive")
    if delta <= 0:
        raise UnreachableTarget("non-rigid delta must be positive")
    d = target_distance
    if target_colors == (a, a):
        return DrivePlan(d, ScheduleScript(), target_colors, d)
    rule = table.entries[(a, a)]
    if rule.next_color != b:
        raise UnreachableTarget(f"{a}({a}) keeps light {a}; cannot leave the all-{a} start")
    lam = rule.lam
    joint_looks = (Look(0), Look(1), FinishCompute(0), FinishCompute(1))
    if target_colors == (b, b):
        if lam == HALF:
            initial = d + 2 * delta
            events = joint_looks + (FinishMove(0, delta), FinishMove(1, initial - delta))
        else:
            initial = d / abs(1 - 2 * lam)
            events = joint_looks + (FinishMove(0), FinishMove(1))
        return DrivePlan(initial, ScheduleScript(events), target_colors, d)
    if set(target_colors) != {a, b}:
        raise UnreachableTarget(f"unknown target colors {target_colors}")
    mover = 0 if target_colors == (b, a) else 1
    if lam > 0 and lam * (d + delta) >= delta:
        initial = d + delta
        stop = delta if mover == 0 else initial - delta
        events: tuple[Event, ...] = (Look(mover), FinishCompute(mover), FinishMove(mover, stop))
    elif lam != ONE:
        initial = d / abs(1 - lam)
        events = (Look(mover), FinishCompute(mover), FinishMove(mover))
    else:  # pragma: no cover - lam = 1 always satisfies the truncation test
        raise UnreachableTarget("no exact construction for this rule")
    return DrivePlan(initial, ScheduleScript(events), target_colors, d)


def rigid_drive_all_to_other(table: RuleTable) -> tuple[ScheduleScript, Fraction]:
    """Rigid counterpart for the all-B target: one joint full cycle, legal only
    when the A(A) rule is not the midpoint rule. Returns (script, the exact
    factor the distance is multiplied by)."""
    a, b = _two_colors(table)
    rule = table.entries[(a, a)]
    if rule.next_color != b:
        raise UnreachableTarget(f"{a}({a}) keeps light {a}")
    if rule.lam == HALF:
        raise UnreachableTarget("joint midpoint cycle would gather; rigid drive impossible")
    events = (Look(0), Look(1), FinishCompute(0), FinishCompute(1), FinishMove(0), FinishMove(1))
    return ScheduleScript(events), abs(1 - 2 * rule.lam)


# --- reactive fair schedulers ---------------------------------------------------------


class AlternatingSsynch:
    """Semi-synchronous rounds activating one robot at a time, alternating.

    With `with_exception`, a scheduled robot whose pending rule would walk it
    exactly onto the other robot (lam = 1) is never activated alone: both act
    that round, so their snapshots are taken at the same instant.
    """

    def __init__(self, table: AnyTable, with_exception: bool = True):
        self.table = table
        self.with_exception = with_exception
        self._turn = 0

    def next_events(self, config: Configuration) -> Sequence[Event]:
        live = [r.ident for r in config.robots if not r.terminated]
        if not live:
            return ()
        robot = self._turn if self._turn in live else live[0]
        self._turn = 1 - robot
        active: tuple[int, ...] = (robot,)
        if self.with_exception and len(live) == 2:
            me = config.robot(robot)
            other = config.other(robot)
            rule = _fire_rule(
                self.table,
                Snapshot(me.light, other.light, me.position, other.position),
            )
            if isinstance(rule, Rule) and rule.lam == ONE:
                active = (0, 1)
        return (round_event(active),)


def alternating_ssynch(table: AnyTable, with_exception: bool = True) -> AlternatingSsynch:
    return AlternatingSsynch(table, with_exception)


TRUNCATION_MODES = ("always_full", "always_delta", "uniform")

# interleavings of one full cycle per robot; completions land late enough that
# any 8-event window catches one completion of each robot
_BLOCKS = (
    ("l0", "l1", "c0", "c1", "e0", "e1"),
    ("l0", "c0", "l1", "e0", "c1", "e1"),
    ("l0", "l1", "c0", "e0", "c1", "e1"),
    ("l0", "c0", "l1", "c1", "e0", "e1"),
)


class RandomFairAsynch:
    """Seeded random fine-grained scheduler with a guaranteed fairness window.

    Events come from randomly chosen interleavings of one full cycle per robot
    (roles shuffled per block), so each robot finishes a cycle at most 8 events
    after its previous one. Move endpoints follow the truncation mode.
    """

    def __init__(
        self,
        seed: int,
        fairness: FairnessPolicy = FairnessPolicy(8),
        truncation: str = "uniform",
        granularity: int = 4,
    ):
        if truncation not in TRUNCATION_MODES:
            raise ValueError(f"unknown truncation mode {truncation!r}")
        if fairness.window < 8:
            raise ValueError(
                "the asynchronous generator interleaves two 3-event cycles; "
                f"windows below 8 are not schedulable, got {fairness.window}"
            )
        self.rng = random.Random(seed)
        self.fairness = fairness
        self.truncation = truncation
        self.granularity = granularity
        self._queue: list[tuple[str, int]] = []

    def _refill(self, config: Configuration) -> None:
        live = [r.ident for r in config.robots if not r.terminated]
        if not live:
            return
        if len(live) == 1:
            self._queue = [("l", live[0]), ("c", live[0]), ("e", live[0])]
            return
        block = self.rng.choice(_BLOCKS)
        roles = {"0": 0, "1": 1} if self.rng.random() < 0.5 else {"0": 1, "1": 0}
        self._queue = [(item[0], roles[item[1]]) for item in block]

    def _endpoint(self, config: Configuration, robot: int) -> Fraction | None:
        phase = config.robot(robot).phase
        assert isinstance(phase, Moving)
        start, dest = phase.start, phase.destination
        length = abs(dest - start)
        delta = config.rigidity.delta
        if self.truncation == "always_full" or delta is None or length <= delta:
            return None
        minimum = min(delta, length)
        if self.truncation == "always_delta":
            advance = minimum
        else:
            j = self.rng.randint(0, self.granularity)
            advance = minimum + (length - minimum) * Fraction(j, self.granularity)
        direction = 1 if dest >= start else -1
        return start + direction * advance

    def next_events(self, config: Configuration) -> Sequence[Event]:
        while True:
            if not self._queue:
                self._refill(config)
                if not self._queue:
                    return ()
            kind, robot = self._queue.pop(0)
            if config.robot(robot).terminated:
                continue  # terminated mid-block; drop its leftover events
            if kind == "l":
                return (Look(robot),)
            if kind == "c":
                return (FinishCompute(robot),)
            return (FinishMove(robot, self._endpoint(config, robot)),)


class RandomFairRounds:
    """Seeded random round scheduler (semi- or fully synchronous).

    A robot may sit out at most window-2 consecutive rounds, so a window of 2
    degenerates to joint activation every round.
    """

    def __init__(
        self,
        table: AnyTable,
        seed: int,
        model: str,
        fairness: FairnessPolicy = FairnessPolicy(8),
        truncation: str = "uniform",
        granularity: int = 4,
    ):
        if truncation not in TRUNCATION_MODES:
            raise ValueError(f"unknown truncation mode {truncation!r}")
        if model not in SchedulerKind.ROUND_BASED:
            raise ValueError(f"round scheduler asked for model {model!r}")
        self.table = table
        self.rng = random.Random(seed)
        self.model = model
        self.fairness = fairness
        self.truncation = truncation
        self.granularity = granularity
        self._misses = {0: 0, 1: 0}

    def _pick_active(self, live: list[int]) -> list[int]:
        if self.model == SchedulerKind.FSYNCH or len(live) == 1:
            return live
        allowed_misses = self.fairness.window - 2
        active = [
            r
            for r in live
            if self._misses[r] >= allowed_misses or self.rng.random() < 0.5
        ]
        if not active:
            active = [self.rng.choice(live)]
        return sorted(active)

    def _truncations(self, config: Configuration, active: list[int]):
        delta = config.rigidity.delta
        if delta is None or self.truncation == "always_full":
            return {}
        trunc = {}
        for robot in active:
            me, other = config.robot(robot), config.other(robot)
            rule = _fire_rule(
                self.table, Snapshot(me.light, other.light, me.position, other.position)
            )
            if isinstance(rule, Terminate):
                continue
            dest = convex_point(me.position, other.position, rule.lam)
            length = abs(dest - me.position)
            if length <= delta:
                continue
            if self.truncation == "always_delta":
                advance = delta
            else:
                j = self.rng.randint(0, self.granularity)
                advance = delta + (length - delta) * Fraction(j, self.granularity)
                if advance == length:
                    continue
            direction = 1 if dest >= me.position else -1
            trunc[robot] = me.position + direction * advance
        return trunc

    def next_events(self, config: Configuration) -> Sequence[Event]:
        live = [r.ident for r in config.robots if not r.terminated]
        if not live:
            return ()
        active = self._pick_active(live)
        for r in live:
            self._misses[r] = 0 if r in active else self._misses[r] + 1
        trunc = self._truncations(config, active)
        return (round_event(active, trunc),)


def random_fair(
    table: AnyTable,
    seed: int,
    model: str = SchedulerKind.ASYNCH,
    fairness: FairnessPolicy = FairnessPolicy(8),
    truncation: str = "uniform",
):
    """A deterministic, seed-driven fair adversary for the given model."""
    if model == SchedulerKind.ASYNCH:
        return RandomFairAsynch(seed, fairness, truncation)
    return RandomFairRounds(table, seed, model, fairness, truncation)
