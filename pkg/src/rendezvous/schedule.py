"""Adversary schedules: event text form, script files, and reactive policies.

A `ScheduleScript` is a finite prefix plus an optional repeating period. The
period is the unit a scaling certificate is cut at, so the text form keeps it
explicit as a trailing `repeat ... { }` block rather than unrolling it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Protocol, Sequence

from .model import (
    Configuration,
    Event,
    FinishCompute,
    FinishMove,
    Look,
    MoveStep,
    Round,
    round_event,
)
from .scalar import format_scalar, scalar


class ScriptError(Exception):
    """A schedule script that does not parse or is structurally invalid."""


@dataclass(frozen=True)
class ScheduleScript:
    """prefix once, then period repeated `repeats` times (None = unbounded)."""

    prefix: tuple[Event, ...] = ()
    period: tuple[Event, ...] = ()
    repeats: int | None = 0

    def __post_init__(self) -> None:
        if not self.period and self.repeats not in (0, None):
            raise ScriptError("repeats without a period")
        if self.repeats is not None and self.repeats < 0:
            raise ScriptError(f"negative repeat count {self.repeats}")

    @property
    def periodic(self) -> bool:
        return bool(self.period)

    def events(self, max_periods: int | None = None) -> Iterator[Event]:
        """All events; unbounded scripts are clamped to `max_periods`."""
        yield from self.prefix
        if not self.period:
            return
        count = self.repeats
        if count is None:
            if max_periods is None:
                raise ScriptError("unbounded script needs an explicit period clamp")
            count = max_periods
        elif max_periods is not None:
            count = min(count, max_periods)
        for _ in range(count):
            yield from self.period


class SchedulePolicy(Protocol):
    """A reactive adversary: asked repeatedly for the next batch of events.

    Returning an empty sequence ends the schedule.
    """

    def next_events(self, config: Configuration) -> Sequence[Event]: ...


# --- event text form ----------------------------------------------------------


def format_event(event: Event) -> str:
    if isinstance(event, Look):
        return f"look {event.robot}"
    if isinstance(event, FinishCompute):
        return f"compute {event.robot}"
    if isinstance(event, MoveStep):
        return f"movestep {event.robot} {format_scalar(event.point)}"
    if isinstance(event, FinishMove):
        if event.point is None:
            return f"endmove {event.robot}"
        return f"endmove {event.robot} {format_scalar(event.point)}"
    if isinstance(event, Round):
        ids = ",".join(str(i) for i in event.active)
        if not event.truncation:
            return f"round {ids}"
        trunc = " ".join(f"{i}={format_scalar(p)}" for i, p in event.truncation)
        return f"round {ids} trunc {trunc}"
    raise ScriptError(f"unknown event {event!r}")


def parse_event(text: str) -> Event:
    parts = text.split()
    if not parts:
        raise ScriptError("empty event")
    kind = parts[0]
    try:
        if kind == "look" and len(parts) == 2:
            return Look(int(parts[1]))
        if kind == "compute" and len(parts) == 2:
            return FinishCompute(int(parts[1]))
        if kind == "movestep" and len(parts) == 3:
            return MoveStep(int(parts[1]), scalar(parts[2]))
        if kind == "endmove" and len(parts) == 2:
            return FinishMove(int(parts[1]))
        if kind == "endmove" and len(parts) == 3:
            return FinishMove(int(parts[1]), scalar(parts[2]))
        if kind == "round" and len(parts) >= 2:
            active = tuple(int(i) for i in parts[1].split(","))
            if len(parts) == 2:
                return round_event(active)
            if parts[2] != "trunc" or len(parts) < 4:
                raise ScriptError(f"bad round event: {text!r}")
            trunc = {}
            for item in parts[3:]:
                ident, _, point = item.partition("=")
                trunc[int(ident)] = scalar(point)
            return round_event(active, trunc)
    except (ValueError, ZeroDivisionError) as exc:
        raise ScriptError(f"bad event: {text!r}") from exc
    raise ScriptError(f"bad event: {text!r}")


# --- script text form -----------------------------------------------------------
#
#   look 0
#   compute 0
#   repeat forever {
#     round 0,1 trunc 0=1 1=7
#   }
#
# A trailing repeat block is the script's period; earlier repeat blocks must be
# finite and are unrolled into the prefix.


def format_script(script: ScheduleScript) -> str:
    lines = [format_event(e) for e in script.prefix]
    if script.period:
        header = "repeat forever {" if script.repeats is None else f"repeat {script.repeats} {{"
        lines.append(header)
        lines.extend("  " + format_event(e) for e in script.period)
        lines.append("}")
    return "\n".join(lines) + "\n"


def parse_script(text: str) -> ScheduleScript:
    prefix: list[Event] = []
    period: list[Event] = []
    repeats: int | None = 0
    lines = [raw.split("#", 1)[0].strip() for raw in text.splitlines()]
    lines = [line for line in lines if line]
    i = 0
    while i < len(lines):
        line = lines[i]
        if line.startswith("repeat"):
            parts = line.split()
            if len(parts) != 3 or parts[2] != "{":
                raise ScriptError(f"bad repeat header: {line!r}")
            count: int | None
            if parts[1] == "forever":
                count = None
            else:
                try:
                    count = int(parts[1])
                except ValueError as exc:
                    raise ScriptError(f"bad repeat count: {line!r}") from exc
            block: list[Event] = []
            i += 1
            while i < len(lines) and lines[i] != "}":
                block.append(parse_event(lines[i]))
                i += 1
            if i == len(lines):
                raise ScriptError("unterminated repeat block")
            i += 1
            if i == len(lines):
                period = block
                repeats = count
            else:
                # interior repeat blocks are unrolled; they must be finite
                if count is None:
                    raise ScriptError("'repeat forever' must be the last block")
                prefix.extend(block * count)
        else:
            prefix.append(parse_event(line))
            i += 1
    return ScheduleScript(tuple(prefix), tuple(period), repeats)
