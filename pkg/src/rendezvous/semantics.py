"""Operational semantics: fine-grained asynchronous events and joint rounds.

The asynchronous adversary drives each robot through Look -> FinishCompute ->
(MoveStep)* -> FinishMove; a Look is instantaneous and the light only changes
when FinishCompute fires, so other robots observe stale colors and positions in
between. Round-based models (fully and semi-synchronous) activate a subset of
robots jointly on a common snapshot of the pre-round state.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .model import (
    AnyTable,
    Configuration,
    Event,
    ExtendedRuleTable,
    FinishCompute,
    FinishMove,
    Look,
    MidCompute,
    MoveStep,
    Moving,
    RobotState,
    Round,
    Rule,
    RuleTable,
    SchedulerKind,
    Snapshot,
    TERMINATED,
    Terminate,
    Wait,
    WAIT,
    lookup,
    lookup_extended,
)
from .scalar import convex_point, format_scalar, on_segment
from .schedule import SchedulePolicy, ScheduleScript, format_event


class SimulationError(Exception):
    """Base class for rejected events."""


class IllegalEventError(SimulationError):
    """Event does not match the robot's phase or the configuration's model."""


class TerminatedRobotError(SimulationError):
    """Event addressed to a robot that has switched off."""


class InvalidMoveError(SimulationError):
    """A move point off the segment toward the destination."""


class DeltaViolationError(SimulationError):
    """A move stopped before the guaranteed minimum advance."""


def _fire_rule(table: AnyTable, snapshot: Snapshot) -> Rule | Terminate:
    if isinstance(table, RuleTable):
        return lookup(table, snapshot.my_color, snapshot.other_color)
    return lookup_extended(
        table, snapshot.my_color, snapshot.other_color, snapshot.coincident
    )


def _check_stop_point(
    config: Configuration, robot: RobotState, final: Fraction, destination: Fraction, start: Fraction
) -> None:
    if not on_segment(final, robot.position, destination):
        raise InvalidMoveError(
            f"robot {robot.ident} stop point {final} not between {robot.position} and {destination}"
        )
    if final == destination:
        return
    if config.rigidity.is_rigid:
        raise DeltaViolationError(
            f"rigid move of robot {robot.ident} stopped at {final} short of {destination}"
        )
    delta = config.rigidity.delta
    assert delta is not None
    if abs(final - start) < min(delta, abs(destination - start)):
        raise DeltaViolationError(
            f"robot {robot.ident} advanced {abs(final - start)} < min(delta={delta}, "
            f"move length {abs(destination - start)})"
        )


def apply_asynch(config: Configuration, table: AnyTable, event: Event) -> Configuration:
    """Apply one fine-grained event under the asynchronous model."""
    if config.model != SchedulerKind.ASYNCH:
        raise IllegalEventError(f"fine-grained event in a {config.model} configuration")
    if isinstance(event, Round):
        raise IllegalEventError("round event under the asynchronous model")
    if event.robot not in (0, 1):
        raise IllegalEventError(f"unknown robot {event.robot}")
    robot = config.robot(event.robot)
    other = config.other(event.robot)
    if robot.terminated:
        raise TerminatedRobotError(f"robot {robot.ident} has terminated")

    if isinstance(event, Look):
        if not isinstance(robot.phase, Wait):
            raise IllegalEventError(f"Look while robot {robot.ident} is {robot.phase}")
        snapshot = Snapshot(robot.light, other.light, robot.position, other.position)
        return config.replace_robot(replace(robot, phase=MidCompute(snapshot)))

    if isinstance(event, FinishCompute):
        if not isinstance(robot.phase, MidCompute):
            raise IllegalEventError(f"FinishCompute while robot {robot.ident} is {robot.phase}")
        snapshot = robot.phase.snapshot
        rule = _fire_rule(table, snapshot)
        if isinstance(rule, Terminate):
            return config.replace_robot(replace(robot, phase=TERMINATED))
        destination = convex_point(snapshot.my_position, snapshot.other_position, rule.lam)
        return config.replace_robot(
            replace(robot, light=rule.next_color, phase=Moving(destination, robot.position))
        )

    if isinstance(event, MoveStep):
        if not isinstance(robot.phase, Moving):
            raise IllegalEventError(f"MoveStep while robot {robot.ident} is {robot.phase}")
        if not on_segment(event.point, robot.position, robot.phase.destination):
            raise InvalidMoveError(
                f"robot {robot.ident} step to {event.point} not between "
                f"{robot.position} and {robot.phase.destination}"
            )
        return config.replace_robot(replace(robot, position=event.point))

    if isinstance(event, FinishMove):
        if not isinstance(robot.phase, Moving):
            raise IllegalEventError(f"FinishMove while robot {robot.ident} is {robot.phase}")
        destination, start = robot.phase.destination, robot.phase.start
        final = destination if event.point is None else event.point
        _check_stop_point(config, robot, final, destination, start)
        return config.replace_robot(
            replace(
                robot,
                position=final,
                phase=WAIT,
                cycles_completed=robot.cycles_completed + 1,
            )
        )

    raise IllegalEventError(f"unknown event {event!r}")


def apply_round(config: Configuration, table: AnyTable, event: Round) -> Configuration:
    """Apply one joint activation round under a round-based model."""
    if config.model not in SchedulerKind.ROUND_BASED:
        raise IllegalEventError(f"round event in a {config.model} configuration")
    active = event.active
    if not active:
        raise IllegalEventError("empty activation set")
    if any(i not in (0, 1) for i in active):
        raise IllegalEventError(f"unknown robots in activation set {active}")
    live = tuple(r.ident for r in config.robots if not r.terminated)
    for i in active:
        if config.robot(i).terminated:
            raise TerminatedRobotError(f"robot {i} has terminated")
        if not isinstance(config.robot(i).phase, Wait):
            raise IllegalEventError(f"robot {i} not waiting at round start")
    if config.model == SchedulerKind.FSYNCH and set(active) != set(live):
        raise IllegalEventError(
            f"fully synchronous rounds activate every live robot: {active} != {live}"
        )
    truncation = event.truncation_map()
    if not set(truncation) <= set(active):
        raise InvalidMoveError(f"truncation for inactive robots: {sorted(set(truncation) - set(active))}")

    # simultaneous snapshots of the pre-round state
    snapshots = {
        i: Snapshot(
            config.robot(i).light,
            config.other(i).light,
            config.robot(i).position,
            config.other(i).position,
        )
        for i in active
    }
    new_robots = list(config.robots)
    for i in active:
        robot = config.robot(i)
        rule = _fire_rule(table, snapshots[i])
        if isinstance(rule, Terminate):
            if i in truncation:
                raise InvalidMoveError(f"truncation for terminating robot {i}")
            new_robots[i] = replace(robot, phase=TERMINATED)
            continue
        destination = convex_point(
            snapshots[i].my_position, snapshots[i].other_position, rule.lam
        )
        final = truncation.get(i, destination)
        _check_stop_point(config, robot, final, destination, robot.position)
        new_robots[i] = replace(
            robot,
            position=final,
            light=rule.next_color,
            cycles_completed=robot.cycles_completed + 1,
        )
    return Configuration(tuple(new_robots), config.rigidity, config.model)  # type: ignore[arg-type]


def apply_event(config: Configuration, table: AnyTable, event: Event) -> Configuration:
    if isinstance(event, Round):
        return apply_round(config, table, event)
    return apply_asynch(config, table, event)


# --- stability ------------------------------------------------------------------


def _pending_escape(robot: RobotState) -> bool:
    """True if the robot is committed (or about to commit) to leave its spot."""
    if isinstance(robot.phase, Moving):
        return robot.phase.destination != robot.position
    if isinstance(robot.phase, MidCompute):
        # With coincident snapshot positions every rule's destination is the
        # point itself; a stale non-coincident snapshot can still order a move.
        return not robot.phase.snapshot.coincident
    return False


def gathered_stable(config: Configuration) -> bool:
    """Both robots at the same point with no committed escape move.

    Absorbing for every rule table: destinations are affine combinations of
    snapshot positions, so once both snapshots and positions agree the point is
    fixed (lights may keep churning in place).
    """
    r0, r1 = config.robots
    if r0.position != r1.position:
        return False
    return not _pending_escape(r0) and not _pending_escape(r1)


def both_terminated(config: Configuration) -> bool:
    return all(r.terminated for r in config.robots)


def settled(config: Configuration) -> bool:
    return gathered_stable(config) or both_terminated(config)


# --- traces ---------------------------------------------------------------------


@dataclass
class Trace:
    initial: Configuration
    steps: list[tuple[Event, Configuration]] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @property
    def final(self) -> Configuration:
        return self.steps[-1][1] if self.steps else self.initial

    @property
    def stop_reason(self) -> str:
        return self.metadata.get("stop_reason", "unknown")

    def configurations(self) -> Iterator[Configuration]:
        yield self.initial
        for _, config in self.steps:
            yield config

    def __len__(self) -> int:
        return len(self.steps)


def _phase_name(robot: RobotState) -> str:
    if isinstance(robot.phase, Wait):
        return "wait"
    if isinstance(robot.phase, MidCompute):
        return "compute"
    if isinstance(robot.phase, Moving):
        return "moving"
    return "terminated"


def _robot_json(robot: RobotState) -> dict:
    data = {
        "id": robot.ident,
        "pos": format_scalar(robot.position),
        "light": robot.light,
        "phase": _phase_name(robot),
    }
    if isinstance(robot.phase, Moving):
        data["dest"] = format_scalar(robot.phase.destination)
    return data


def trace_to_jsonl(trace: Trace) -> str:
    """One JSON object per event step: {index, event, robots, distance}."""
    lines = []
    for index, (event, config) in enumerate(trace.steps):
        record = {
            "index": index,
            "event": format_event(event),
            "robots": [_robot_json(r) for r in config.robots],
            "distance": format_scalar(config.distance),
        }
        lines.append(json.dumps(record, sort_keys=True))
    return "\n".join(lines) + ("\n" if lines else "")


# --- execution --------------------------------------------------------------------


def _stop_now(config: Configuration, stop_when_settled: bool) -> bool:
    # termination always ends a run (no further event is legal for either
    # robot); stable gathering ends it only when the caller wants that
    return both_terminated(config) or (stop_when_settled and gathered_stable(config))


def run_events(
    config: Configuration,
    table: AnyTable,
    events: Iterable[Event],
    budget: int = 10_000,
    stop_when_settled: bool = True,
) -> Trace:
    """Apply events in order, stopping early once gathered or both terminated."""
    trace = Trace(config)
    current = config
    if _stop_now(current, stop_when_settled):
        trace.metadata["stop_reason"] = "settled"
        return trace
    for event in events:
        if len(trace.steps) >= budget:
            trace.metadata["stop_reason"] = "budget-exhausted"
            return trace
        current = apply_event(current, table, event)
        trace.steps.append((event, current))
        if _stop_now(current, stop_when_settled):
            trace.metadata["stop_reason"] = "settled"
            return trace
    trace.metadata["stop_reason"] = "script-exhausted"
    return trace


def run_schedule(
    config: Configuration,
    table: AnyTable,
    script: ScheduleScript,
    budget: int = 10_000,
    stop_when_settled: bool = True,
) -> Trace:
    max_periods = None
    if script.periodic and script.repeats is None:
        max_periods = budget // max(1, len(script.period)) + 1
    return run_events(
        config, table, script.events(max_periods=max_periods), budget, stop_when_settled
    )


def run_policy(
    config: Configuration,
    table: AnyTable,
    policy: SchedulePolicy,
    budget: int = 10_000,
    stop_when_settled: bool = True,
) -> Trace:
    """Drive a reactive adversary until it stops, the budget runs out, or the
    run settles."""
    trace = Trace(config)
    current = config
    while len(trace.steps) < budget:
        if _stop_now(current, stop_when_settled):
            trace.metadata["stop_reason"] = "settled"
            return trace
        batch = policy.next_events(current)
        if not batch:
            trace.metadata["stop_reason"] = "schedule-ended"
            return trace
        for event in batch:
            if len(trace.steps) >= budget:
                break
            current = apply_event(current, table, event)
            trace.steps.append((event, current))
            if _stop_now(current, stop_when_settled):
                trace.metadata["stop_reason"] = "settled"
                return trace
    trace.metadata["stop_reason"] = "budget-exhausted"
    return trace


# --- similarity transforms ---------------------------------------------------------


def scale_configuration(
    config: Configuration, factor: Fraction, offset: Fraction = Fraction(0)
) -> Configuration:
    """Apply x -> factor*x + offset to every positional quantity.

    With factor != 0 this is a similarity of the line; the class of rule-table
    dynamics commutes with it, which the equivariance tests check and the
    scaling certificates exploit.
    """
    if factor == 0:
        raise ValueError("similarity factor must be nonzero")

    def mapped(x: Fraction) -> Fraction:
        return factor * x + offset

    def map_robot(robot: RobotState) -> RobotState:
        phase = robot.phase
        if isinstance(phase, MidCompute):
            snap = phase.snapshot
            phase = MidCompute(
                Snapshot(snap.my_color, snap.other_color, mapped(snap.my_position), mapped(snap.other_position))
            )
        elif isinstance(phase, Moving):
            phase = Moving(mapped(phase.destination), mapped(phase.start))
        return replace(robot, position=mapped(robot.position), phase=phase)

    return Configuration(
        tuple(map_robot(r) for r in config.robots), config.rigidity, config.model  # type: ignore[arg-type]
    )


def scale_event(event: Event, factor: Fraction, offset: Fraction = Fraction(0)) -> Event:
    """Map an event's positional payload through the same similarity."""
    if isinstance(event, MoveStep):
        return MoveStep(event.robot, factor * event.point + offset)
    if isinstance(event, FinishMove) and event.point is not None:
        return FinishMove(event.robot, factor * event.point + offset)
    if isinstance(event, Round) and event.truncation:
        return Round(
            event.active,
            tuple((i, factor * p + offset) for i, p in event.truncation),
        )
    return event


def swap_robots(config: Configuration) -> Configuration:
    """Exchange the two robots' identities (positions, lights, phases move along)."""
    r0, r1 = config.robots
    return Configuration(
        (replace(r1, ident=0), replace(r0, ident=1)), config.rigidity, config.model
    )


def swap_event(event: Event) -> Event:
    """Rewrite an event to address the relabeled robots."""
    if isinstance(event, Look):
        return Look(1 - event.robot)
    if isinstance(event, FinishCompute):
        return FinishCompute(1 - event.robot)
    if isinstance(event, MoveStep):
        return MoveStep(1 - event.robot, event.point)
    if isinstance(event, FinishMove):
        return FinishMove(1 - event.robot, event.point)
    return Round(
        tuple(sorted(1 - i for i in event.active)),
        tuple(sorted((1 - i, p) for i, p in event.truncation)),
    )


# --- fairness ------------------------------------------------------------------------


@dataclass(frozen=True)
class FairnessPolicy:
    """Finite surrogate for 'no robot stays inactive forever': in every window
    of `window` consecutive events, each robot alive throughout the window
    finishes at least one cycle (asynchronous) or is activated at least once
    (round-based)."""

    window: int = 8

    def __post_init__(self) -> None:
        if self.window < 2:
            raise ValueError(f"fairness window must be at least 2, got {self.window}")


def completes_cycle(event: Event, config_after: Configuration, robot: int) -> bool:
    """Did this event finish a cycle of `robot` (or terminate it)?"""
    if isinstance(event, FinishMove) and event.robot == robot:
        return True
    if isinstance(event, FinishCompute) and event.robot == robot:
        return config_after.robot(robot).terminated
    if isinstance(event, Round):
        return robot in event.active
    return False


def fairness_violations(trace: Trace, policy: FairnessPolicy) -> list[int]:
    """Start indices of windows violating the policy (empty list = fair)."""
    window = policy.window
    steps = trace.steps
    violations = []
    for start in range(0, len(steps) - window + 1):
        chunk = steps[start : start + window]
        for robot in (0, 1):
            if chunk[-1][1].robot(robot).terminated:
                continue
            if not any(completes_cycle(event, cfg, robot) for event, cfg in chunk):
                violations.append(start)
                break
    return violations
