"""Command-line front end: run schedules, sweep rule tables, rebuild the
characterization table, and export trace data for plotting.

Exit codes for `run` are a total function of the outcome: 0 when the run
settles (gathered or both terminated), 2 when the schedule certifies
non-gathering, 3 when the budget runs out first, 1 on invalid input. `sweep`
exits 0 only when the survivor set matches the expected set for the mode.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from fractions import Fraction
from pathlib import Path

from .adversaries import (
    LEMMA18_CASES,
    PreconditionMismatch,
    UnreachableTarget,
    alternating_ssynch,
    lemma16_schedule,
    lemma17_schedule,
    lemma18_schedule,
    lemma19_schedule,
    lemma23_schedule,
    lockstep_two_rounds,
    one_color_asynch,
    random_fair,
    symmetric_fsynch,
)
from .algorithms import (
    alg1,
    alg2,
    alg3,
    class_l_count,
    class_l_table_at,
    one_color_midpoint,
)
from .checking import (
    SWEEP_MODES,
    CertificateRejected,
    DispatchGapError,
    check_certificate,
    structural_preset_survivors,
    sweep_one_color,
    sweep_two_colors,
)
from .model import (
    AnyTable,
    ExtendedRuleTable,
    ModelError,
    RIGID,
    SchedulerKind,
    TERMINATE,
    initial_configuration,
    non_rigid,
    parse_table,
)
from .scalar import format_scalar, scalar
from .schedule import ScriptError, parse_script
from .semantics import (
    SimulationError,
    Trace,
    both_terminated,
    gathered_stable,
    run_events,
    run_policy,
    run_schedule,
    trace_to_jsonl,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NON_GATHERING = 2
EXIT_BUDGET = 3

_MODELS = {
    "fsynch": SchedulerKind.FSYNCH,
    "ssynch": SchedulerKind.SSYNCH,
    "asynch": SchedulerKind.ASYNCH,
}

_BUILTIN_ALGORITHMS = {
    "alg1": alg1,
    "alg2": alg2,
    "alg3": alg3,
    "one-color": one_color_midpoint,
}


class CliError(Exception):
    """Invalid input; maps to exit code 1."""


def _load_algorithm(name: str) -> AnyTable:
    if name in _BUILTIN_ALGORITHMS:
        return _BUILTIN_ALGORITHMS[name]()
    if name.startswith("file:"):
        path = Path(name[len("file:"):])
        try:
            return parse_table(path.read_text())
        except OSError as exc:
            raise CliError(f"cannot read table file {path}: {exc}") from exc
    if name.startswith("enum:"):
        parts = name.split(":")
        if len(parts) != 4:
            raise CliError("enum form is enum:<palette-size>:<grid>:<index>")
        try:
            palette_size = int(parts[1])
            grid = _parse_grid(parts[2])
            index = int(parts[3])
        except ValueError as exc:
            raise CliError(f"bad enum spec {name!r}: {exc}") from exc
        total = class_l_count(palette_size, grid)
        if not 0 <= index < total:
            raise CliError(f"enum index {index} out of range 0..{total - 1}")
        return class_l_table_at(index, palette_size, grid)
    raise CliError(
        f"unknown algorithm {name!r}; expected one of {sorted(_BUILTIN_ALGORITHMS)}, "
        "enum:<palette>:<grid>:<index>, or file:<path>"
    )


def _parse_grid(text: str) -> tuple[Fraction, ...]:
    try:
        values = tuple(scalar(part.strip()) for part in text.split(",") if part.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise CliError(f"bad grid {text!r}: {exc}") from exc
    if not values:
        raise CliError("grid must name at least one coefficient")
    if len(set(values)) != len(values):
        raise CliError("grid values must be distinct")
    return values


def _parse_colors(text: str, table: AnyTable) -> tuple[str, str]:
    parts = [part.strip() for part in text.split(",")]
    if len(parts) != 2 or not all(parts):
        raise CliError(f"colors must be two comma-separated lights, got {text!r}")
    for color in parts:
        if color not in table.palette:
            raise CliError(f"color {color!r} not in palette {table.palette}")
    return parts[0], parts[1]


def _needs_lambda(builder):
    def build(arg: str | None, table: AnyTable):
        if arg is None:
            raise CliError("this adversary takes a coefficient, e.g. adversary:<name>:1/2")
        return builder(scalar(arg), table=table)

    return build


_SCRIPT_ADVERSARIES = {
    "lemma16": _needs_lambda(lemma16_schedule),
    "lemma17": _needs_lambda(lemma17_schedule),
    "lemma19": _needs_lambda(lemma19_schedule),
    "one_color": _needs_lambda(one_color_asynch),
    "lemma23": lambda arg, table: lemma23_schedule(table=table),
    "lockstep": lambda arg, table: lockstep_two_rounds(table=table),
    "symmetric_fsynch": lambda arg, table: symmetric_fsynch(table),
}


def _build_schedule(source: str, table: AnyTable, model: str):
    """Returns ("script", ScheduleScript) or ("policy", reactive policy)."""
    if source.startswith("file:"):
        path = Path(source[len("file:"):])
        try:
            return "script", parse_script(path.read_text())
        except OSError as exc:
            raise CliError(f"cannot read schedule file {path}: {exc}") from exc
    if source.startswith("random:"):
        try:
            seed = int(source[len("random:"):])
        except ValueError as exc:
            raise CliError(f"bad seed in {source!r}") from exc
        return "policy", random_fair(table, seed, model=model)
    if source.startswith("adversary:"):
        parts = source.split(":")
        name = parts[1] if len(parts) > 1 else ""
        args = parts[2:]
        if name == "alternating":
            return "policy", alternating_ssynch(table)
        if name == "lemma18":
            if len(args) != 2 or args[1] not in LEMMA18_CASES:
                raise CliError(
                    "lemma18 takes a coefficient and a case, e.g. "
                    f"adversary:lemma18:1/2:to_B_not1 (cases: {', '.join(LEMMA18_CASES)})"
                )
            return "script", lemma18_schedule(scalar(args[0]), args[1], table=table)
        if name in _SCRIPT_ADVERSARIES:
            if len(args) > 1:
                raise CliError(f"adversary {name} takes at most one argument")
            return "script", _SCRIPT_ADVERSARIES[name](args[0] if args else None, table)
        raise CliError(
            f"unknown adversary {name!r}; known: alternating, lemma18, "
            + ", ".join(sorted(_SCRIPT_ADVERSARIES))
        )
    raise CliError(
        f"unknown schedule source {source!r}; use file:<path>, adversary:<name>[:...], "
        "or random:<seed>"
    )


def _table_can_terminate(table: AnyTable) -> bool:
    if isinstance(table, ExtendedRuleTable):
        return any(rule is TERMINATE for rule in table.entries.values())
    return False


def _emit(args, trace: Trace, lines: list[str]) -> None:
    """Trace JSONL to --output (or stdout); summary lines to stdout (or stderr
    when the trace already owns stdout)."""
    payload = trace_to_jsonl(trace)
    if args.output:
        Path(args.output).write_text(payload)
        for line in lines:
            print(line)
    else:
        sys.stdout.write(payload)
        for line in lines:
            print(line, file=sys.stderr)


def cmd_run(args) -> int:
    table = _load_algorithm(args.algorithm)
    colors = _parse_colors(args.colors, table)
    model = _MODELS[args.model]
    rigidity = RIGID if args.nonrigid is None else non_rigid(scalar(args.nonrigid))
    distance = scalar(args.distance)
    if distance < 0:
        raise CliError("start distance must be >= 0")
    config = initial_configuration(colors, (scalar(0), distance), rigidity, model=model)
    kind, schedule = _build_schedule(args.schedule, table, model)
    stop_when_settled = not _table_can_terminate(table)

    if kind == "script" and schedule.periodic and schedule.repeats is None:
        prefix_trace = run_events(
            config, table, schedule.prefix, budget=args.budget, stop_when_settled=stop_when_settled
        )
        if prefix_trace.stop_reason == "settled":
            return _finish_run(args, prefix_trace)
        try:
            cert = check_certificate(table, prefix_trace.final, schedule.period)
        except CertificateRejected as exc:
            logger.info("certificate rejected (%s); falling back to bounded run", exc)
        else:
            replay = run_events(
                config,
                table,
                list(schedule.prefix) + list(schedule.period) * 3,
                budget=args.budget,
                stop_when_settled=stop_when_settled,
            )
            _emit(
                args,
                replay,
                [
                    "status: non-gathering",
                    f"factor: {format_scalar(cert.factor)}",
                    f"period-events: {len(cert.period)}",
                ],
            )
            return EXIT_NON_GATHERING

    if kind == "script":
        trace = run_schedule(
            config, table, schedule, budget=args.budget, stop_when_settled=stop_when_settled
        )
    else:
        trace = run_policy(
            config, table, schedule, budget=args.budget, stop_when_settled=stop_when_settled
        )
    return _finish_run(args, trace)


def _finish_run(args, trace: Trace) -> int:
    final = trace.final
    if both_terminated(final):
        status, code = "terminated", EXIT_OK
    elif gathered_stable(final):
        status, code = "gathered", EXIT_OK
    else:
        status, code = f"unknown ({trace.stop_reason})", EXIT_BUDGET
    _emit(
        args,
        trace,
        [
            f"status: {status}",
            f"events: {len(trace)}",
            f"final-distance: {format_scalar(final.distance)}",
        ],
    )
    return code


def cmd_sweep(args) -> int:
    grid = _parse_grid(args.grid)
    if args.mode == "one-color-ssynch":
        report = sweep_one_color(grid, model=SchedulerKind.SSYNCH)
        expected: set[int] = set()
    else:
        report = sweep_two_colors(grid, args.mode, jobs=args.jobs, delta=scalar(args.delta))
        expected = (
            structural_preset_survivors(grid) if args.mode == "rigid-asynch-preset-aa" else set()
        )
    print(report.summary())
    if args.output:
        Path(args.output).write_text(json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n")
    if set(report.survivors) != expected:
        print(
            f"survivor set does not match the expected set ({sorted(expected)})",
            file=sys.stderr,
        )
        return EXIT_NON_GATHERING
    return EXIT_OK


def cmd_reproduce(args) -> int:
    from .reproduce import run_reproduce

    return run_reproduce(
        cell_filter=args.cell, tables_dir=args.tables_dir, seeds=args.seeds
    )


def cmd_plotdata(args) -> int:
    import csv

    path = Path(args.trace)
    try:
        text = path.read_text()
    except OSError as exc:
        raise CliError(f"cannot read trace {path}: {exc}") from exc
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            robots = record["robots"]
            rows.append(
                (
                    record["index"],
                    record["distance"],
                    robots[0]["light"],
                    robots[1]["light"],
                    robots[0]["phase"],
                    robots[1]["phase"],
                )
            )
        except (json.JSONDecodeError, KeyError, IndexError, TypeError) as exc:
            raise CliError(f"malformed trace line {lineno}: {exc}") from exc
    out = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(
            ["event_index", "distance", "light0", "light1", "phase0", "phase1"]
        )
        writer.writerows(rows)
    finally:
        if args.output:
            out.close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rendezvous",
        description="Two-robot rendezvous with lights: simulate, sweep, reproduce.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one schedule against one algorithm")
    run.add_argument(
        "algorithm",
        help="alg1 | alg2 | alg3 | one-color | enum:<palette>:<grid>:<index> | file:<path>",
    )
    run.add_argument("--model", choices=sorted(_MODELS), default="asynch")
    rigidity = run.add_mutually_exclusive_group()
    rigidity.add_argument("--rigid", action="store_true", help="moves always finish (default)")
    rigidity.add_argument(
        "--nonrigid", metavar="DELTA", help="adversarial truncation with guaranteed progress DELTA"
    )
    run.add_argument("--colors", default="A,A", help="start lights, e.g. A,B")
    run.add_argument("--distance", default="8", help="start distance (exact rational)")
    run.add_argument(
        "--schedule",
        default="random:0",
        help="file:<path> | adversary:<name>[:coef[:case]] | random:<seed>",
    )
    run.add_argument("--budget", type=int, default=10_000, help="max events before giving up")
    run.add_argument("--output", help="write the JSONL trace here instead of stdout")
    run.set_defaults(fn=cmd_run)

    sweep = sub.add_parser("sweep", help="run the adversary dispatch against a table family")
    sweep.add_argument(
        "--mode", choices=list(SWEEP_MODES) + ["one-color-ssynch"], default="rigid-asynch-arbitrary"
    )
    sweep.add_argument("--grid", default="0,1/2,1", help="comma-separated coefficients")
    sweep.add_argument("--jobs", type=int, default=1, help="parallel sweep workers")
    sweep.add_argument("--delta", default="1", help="progress bound for the non-rigid mode")
    sweep.add_argument("--output", help="write the JSON report here")
    sweep.set_defaults(fn=cmd_sweep)

    reproduce = sub.add_parser(
        "reproduce", help="re-run the evidence behind the color-count table"
    )
    reproduce.add_argument("--cell", help="only cells whose id contains this string")
    reproduce.add_argument(
        "--tables-dir", help="directory with algorithm table files overriding the built-ins"
    )
    reproduce.add_argument("--seeds", type=int, default=5, help="random seeds per positive run")
    reproduce.set_defaults(fn=cmd_reproduce)

    plotdata = sub.add_parser("plotdata", help="flatten a JSONL trace into CSV")
    plotdata.add_argument("trace", help="trace file written by `run`")
    plotdata.add_argument("--output", help="write CSV here instead of stdout")
    plotdata.set_defaults(fn=cmd_plotdata)

    return parser


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("RENDEZVOUS_LOG")
    if level:
        logging.basicConfig(level=getattr(logging, level.upper(), logging.INFO))
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (
        CliError,
        ModelError,
        ScriptError,
        SimulationError,
        PreconditionMismatch,
        UnreachableTarget,
        DispatchGapError,
        ValueError,
        ZeroDivisionError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
