"""Core state model: lights, rule tables, robot phases, configurations, events.

Robots are points on the rational line carrying a visible light. A rule table
maps the pair of observed lights to (next light, lambda); the robot's
destination is the affine point (1-lambda)*me + lambda*other computed from its
snapshot. Extended tables additionally branch on whether the snapshot saw the
two robots coincident, and may order termination.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, Union

from .scalar import format_scalar, scalar

Color = str


class ModelError(Exception):
    """Base class for model-level rejections."""


class PaletteError(ModelError):
    """A color outside the table's palette, or a malformed palette."""


class TableError(ModelError):
    """A rule table that is not total or not well formed."""


def palette(size: int) -> tuple[Color, ...]:
    """Canonical palette of the given size: 'A', 'B', 'C', ..."""
    if not 1 <= size <= 26:
        raise PaletteError(f"palette size must be in 1..26, got {size}")
    return tuple(string.ascii_uppercase[:size])


@dataclass(frozen=True)
class Rule:
    """One table entry: the light to show next and the move coefficient."""

    next_color: Color
    lam: Fraction


@dataclass(frozen=True)
class Terminate:
    """Sentinel rule: switch off and never act again."""

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        return "TERMINATE"


TERMINATE = Terminate()

RuleOrTerminate = Union[Rule, Terminate]


def _check_palette(colors: tuple[Color, ...]) -> None:
    if not colors:
        raise PaletteError("palette must be nonempty")
    if len(set(colors)) != len(colors):
        raise PaletteError(f"palette has duplicate colors: {colors}")
    for c in colors:
        if not c or any(ch.isspace() for ch in c):
            raise PaletteError(f"bad color name: {c!r}")


@dataclass(frozen=True)
class RuleTable:
    """Total map (my light, other light) -> Rule over a fixed palette."""

    palette: tuple[Color, ...]
    entries: Mapping[tuple[Color, Color], Rule]

    def __post_init__(self) -> None:
        _check_palette(self.palette)
        expected = {(a, b) for a in self.palette for b in self.palette}
        if set(self.entries) != expected:
            missing = expected - set(self.entries)
            extra = set(self.entries) - expected
            raise TableError(f"table not total: missing={sorted(missing)} extra={sorted(extra)}")
        for key, rule in self.entries.items():
            if rule.next_color not in self.palette:
                raise TableError(f"entry {key} maps to color {rule.next_color!r} outside palette")

    def key(self) -> tuple:
        """Hashable canonical form (palette order, entries in palette order)."""
        return (
            self.palette,
            tuple(self.entries[(a, b)] for a in self.palette for b in self.palette),
        )


@dataclass(frozen=True)
class ExtendedRuleTable:
    """Total map (my light, other light, coincident) -> Rule | TERMINATE.

    TERMINATE is only legal on coincident entries: switching off away from the
    other robot can never be part of a correct rendezvous algorithm, and the
    trace checker treats it as a safety violation anyway.
    """

    palette: tuple[Color, ...]
    entries: Mapping[tuple[Color, Color, bool], RuleOrTerminate]

    def __post_init__(self) -> None:
        _check_palette(self.palette)
        expected = {
            (a, b, coincident)
            for a in self.palette
            for b in self.palette
            for coincident in (False, True)
        }
        if set(self.entries) != expected:
            missing = expected - set(self.entries)
            extra = set(self.entries) - expected
            raise TableError(f"table not total: missing={sorted(missing)} extra={sorted(extra)}")
        for key, rule in self.entries.items():
            if isinstance(rule, Terminate):
                if not key[2]:
                    raise TableError(f"TERMINATE on non-coincident entry {key}")
            elif rule.next_color not in self.palette:
                raise TableError(f"entry {key} maps to color {rule.next_color!r} outside palette")


AnyTable = Union[RuleTable, ExtendedRuleTable]


def lookup(table: RuleTable, me: Color, other: Color) -> Rule:
    """The rule fired by a robot lit `me` observing the other robot lit `other`."""
    if me not in table.palette or other not in table.palette:
        raise PaletteError(f"colors ({me!r}, {other!r}) outside palette {table.palette}")
    return table.entries[(me, other)]


def lookup_extended(
    table: ExtendedRuleTable, me: Color, other: Color, coincident: bool
) -> RuleOrTerminate:
    """Extended lookup, further keyed by the snapshot's coincidence predicate."""
    if me not in table.palette or other not in table.palette:
        raise PaletteError(f"colors ({me!r}, {other!r}) outside palette {table.palette}")
    return table.entries[(me, other, coincident)]


# --- phases -----------------------------------------------------------------


@dataclass(frozen=True)
class Snapshot:
    """What a Look records: both positions and both lights, instantaneously."""

    my_color: Color
    other_color: Color
    my_position: Fraction
    other_position: Fraction

    @property
    def coincident(self) -> bool:
        return self.my_position == self.other_position


@dataclass(frozen=True)
class Wait:
    """Idle between cycles."""


@dataclass(frozen=True)
class MidCompute:
    """Look done; the rule has not fired yet, so the light is still the old one."""

    snapshot: Snapshot


@dataclass(frozen=True)
class Moving:
    """Committed to walk from `start` toward `destination`."""

    destination: Fraction
    start: Fraction


@dataclass(frozen=True)
class TerminatedPhase:
    """Switched off; ignores every further event."""


WAIT = Wait()
TERMINATED = TerminatedPhase()

Phase = Union[Wait, MidCompute, Moving, TerminatedPhase]


@dataclass(frozen=True)
class RobotState:
    ident: int
    position: Fraction
    light: Color
    phase: Phase = WAIT
    cycles_completed: int = 0

    @property
    def terminated(self) -> bool:
        return isinstance(self.phase, TerminatedPhase)


# --- configurations ----------------------------------------------------------


@dataclass(frozen=True)
class Rigidity:
    """Rigid moves always reach the destination; non-rigid moves may be stopped
    early but advance at least min(delta, |destination - start|)."""

    delta: Fraction | None = None

    def __post_init__(self) -> None:
        if self.delta is not None and self.delta <= 0:
            raise ModelError(f"non-rigid delta must be positive, got {self.delta}")

    @property
    def is_rigid(self) -> bool:
        return self.delta is None


RIGID = Rigidity(None)


def non_rigid(delta: Fraction | int | str) -> Rigidity:
    return Rigidity(scalar(delta))


class SchedulerKind:
    """Which event vocabulary the adversary uses."""

    FSYNCH = "fsynch"
    SSYNCH = "ssynch"
    ASYNCH = "asynch"

    ALL = (FSYNCH, SSYNCH, ASYNCH)
    ROUND_BASED = (FSYNCH, SSYNCH)


@dataclass(frozen=True)
class Configuration:
    robots: tuple[RobotState, RobotState]
    rigidity: Rigidity = RIGID
    model: str = SchedulerKind.ASYNCH

    def __post_init__(self) -> None:
        if len(self.robots) != 2 or [r.ident for r in self.robots] != [0, 1]:
            raise ModelError("a configuration holds exactly robots 0 and 1, in order")
        if self.model not in SchedulerKind.ALL:
            raise ModelError(f"unknown scheduler model {self.model!r}")

    def robot(self, ident: int) -> RobotState:
        return self.robots[ident]

    def other(self, ident: int) -> RobotState:
        return self.robots[1 - ident]

    @property
    def distance(self) -> Fraction:
        return abs(self.robots[0].position - self.robots[1].position)

    def replace_robot(self, state: RobotState) -> "Configuration":
        robots = tuple(state if r.ident == state.ident else r for r in self.robots)
        return Configuration(robots, self.rigidity, self.model)  # type: ignore[arg-type]


def initial_configuration(
    colors: tuple[Color, Color],
    positions: tuple[Fraction, Fraction],
    rigidity: Rigidity = RIGID,
    model: str = SchedulerKind.ASYNCH,
) -> Configuration:
    """Both robots idle at the given positions showing the given lights."""
    robots = (
        RobotState(0, scalar(positions[0]), colors[0]),
        RobotState(1, scalar(positions[1]), colors[1]),
    )
    return Configuration(robots, rigidity, model)


# --- scheduler events ---------------------------------------------------------


@dataclass(frozen=True)
class Look:
    robot: int


@dataclass(frozen=True)
class FinishCompute:
    robot: int


@dataclass(frozen=True)
class MoveStep:
    robot: int
    point: Fraction


@dataclass(frozen=True)
class FinishMove:
    """End the Move phase. `point` of None means: complete to the destination
    (always legal, in both rigidity modes); otherwise stop exactly at `point`,
    subject to the segment and minimum-advance rules."""

    robot: int
    point: Fraction | None = None


@dataclass(frozen=True)
class Round:
    """A joint activation in a round-based model: every robot in `active` does a
    full Look/Compute/Move cycle on the pre-round state; `truncation` optionally
    stops a robot's move at an exact point."""

    active: tuple[int, ...]
    truncation: tuple[tuple[int, Fraction], ...] = ()

    def __post_init__(self) -> None:
        if tuple(sorted(set(self.active))) != self.active:
            raise ModelError(f"round active set must be sorted and duplicate-free: {self.active}")
        trunc_ids = [ident for ident, _ in self.truncation]
        if len(set(trunc_ids)) != len(trunc_ids):
            raise ModelError("duplicate truncation entries")

    def truncation_map(self) -> dict[int, Fraction]:
        return dict(self.truncation)


def round_event(active: Iterator[int] | tuple[int, ...], truncation: Mapping[int, Fraction] | None = None) -> Round:
    trunc = tuple(sorted((i, scalar(p)) for i, p in (truncation or {}).items()))
    return Round(tuple(sorted(set(active))), trunc)


Event = Union[Look, FinishCompute, MoveStep, FinishMove, Round]


# --- rule table text form ------------------------------------------------------
#
#   palette: A B
#   A A -> B 1/2
#   A B -> A 1
#
# Extended tables add a coincidence column and may map to TERMINATE:
#
#   A A !coincident -> B 1/2
#   C C coincident -> TERMINATE


def format_table(table: AnyTable) -> str:
    lines = ["palette: " + " ".join(table.palette)]
    if isinstance(table, RuleTable):
        for me in table.palette:
            for other in table.palette:
                rule = table.entries[(me, other)]
                lines.append(f"{me} {other} -> {rule.next_color} {format_scalar(rule.lam)}")
    else:
        for me in table.palette:
            for other in table.palette:
                for coincident in (False, True):
                    rule = table.entries[(me, other, coincident)]
                    guard = "coincident" if coincident else "!coincident"
                    if isinstance(rule, Terminate):
                        lines.append(f"{me} {other} {guard} -> TERMINATE")
                    else:
                        lines.append(
                            f"{me} {other} {guard} -> {rule.next_color} {format_scalar(rule.lam)}"
                        )
    return "\n".join(lines) + "\n"


def parse_table(text: str) -> AnyTable:
    """Parse the table text form; returns an ExtendedRuleTable iff any line
    carries a coincidence guard."""
    colors: tuple[Color, ...] | None = None
    plain: dict[tuple[Color, Color], Rule] = {}
    extended: dict[tuple[Color, Color, bool], RuleOrTerminate] = {}
    saw_guard = False
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("palette:"):
            if colors is not None:
                raise TableError("duplicate palette line")
            colors = tuple(line[len("palette:"):].split())
            continue
        if colors is None:
            raise TableError("palette line must come first")
        if "->" not in line:
            raise TableError(f"bad table line: {raw!r}")
        lhs, rhs = (part.strip() for part in line.split("->", 1))
        lhs_parts = lhs.split()
        rhs_parts = rhs.split()
        if len(lhs_parts) == 2:
            me, other = lhs_parts
            guard = None
        elif len(lhs_parts) == 3 and lhs_parts[2] in ("coincident", "!coincident"):
            me, other = lhs_parts[:2]
            guard = lhs_parts[2] == "coincident"
            saw_guard = True
        else:
            raise TableError(f"bad table line: {raw!r}")
        if rhs_parts == ["TERMINATE"]:
            rule: RuleOrTerminate = TERMINATE
        elif len(rhs_parts) == 2:
            try:
                rule = Rule(rhs_parts[0], scalar(rhs_parts[1]))
            except (ValueError, ZeroDivisionError) as exc:
                raise TableError(f"bad coefficient in line {raw!r}") from exc
        else:
            raise TableError(f"bad table line: {raw!r}")
        if guard is None:
            if isinstance(rule, Terminate):
                raise TableError("TERMINATE requires a coincident guard")
            if (me, other) in plain:
                raise TableError(f"duplicate entry {(me, other)}")
            plain[(me, other)] = rule
        else:
            if (me, other, guard) in extended:
                raise TableError(f"duplicate entry {(me, other, guard)}")
            extended[(me, other, guard)] = rule
    if colors is None:
        raise TableError("missing palette line")
    if saw_guard:
        if plain:
            raise TableError("mix of guarded and unguarded entries")
        return ExtendedRuleTable(colors, extended)
    return RuleTable(colors, plain)
