"""Re-runs the evidence behind the minimum-color characterization table.

Each table cell states the fewest lights that let two robots rendezvous under
a scheduler/rigidity/start-color regime. A cell is backed by named evidence
items: positive ones re-run an algorithm under fair random schedules (or the
exhaustive rigid explorer), negative ones re-run a defeat sweep showing every
table with fewer lights loses. `run_reproduce` re-executes the evidence and
exits nonzero when any backing item no longer holds.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .algorithms import DEFAULT_GRID, alg1, alg3, one_color_midpoint
from .adversaries import random_fair
from .checking import (
    GathersProven,
    bounded_explore_rigid,
    check_gathering_bound,
    sweep_one_color,
    sweep_two_colors,
)
from .model import (
    AnyTable,
    RIGID,
    SchedulerKind,
    initial_configuration,
    parse_table,
    non_rigid,
)
from .scalar import ONE, ZERO, scalar
from .semantics import gathered_stable, run_policy

logger = logging.getLogger(__name__)

START_DISTANCE = scalar(10)
DELTA = ONE
RUN_BUDGET = 2000


@dataclass(frozen=True)
class Cell:
    model: str
    side: str
    rigidity: str
    colors: int
    evidence: tuple[str, ...]

    @property
    def ident(self) -> str:
        return f"{self.model}-{self.side}-{self.rigidity}"


CELLS: tuple[Cell, ...] = (
    Cell("fsynch", "preset", "rigid", 1, ("one-color-fsynch-rigid",)),
    Cell("ssynch", "preset", "rigid", 2, ("alg1-ssynch-rigid", "one-color-ssynch-defeats")),
    Cell("asynch", "preset", "rigid", 2, ("alg1-asynch-rigid-explore", "one-color-ssynch-defeats")),
    Cell("fsynch", "preset", "nonrigid", 1, ("one-color-fsynch-nonrigid",)),
    Cell("ssynch", "preset", "nonrigid", 2, ("alg1-ssynch-nonrigid", "one-color-ssynch-defeats")),
    Cell("asynch", "preset", "nonrigid", 3, ("alg3-asynch-nonrigid", "two-color-nonrigid-preset-sweep")),
    Cell("fsynch", "arbitrary", "rigid", 1, ("one-color-fsynch-rigid",)),
    Cell("ssynch", "arbitrary", "rigid", 2, ("alg1-ssynch-rigid", "one-color-ssynch-defeats")),
    Cell("asynch", "arbitrary", "rigid", 3, ("alg3-asynch-rigid", "two-color-rigid-arbitrary-sweep")),
    Cell("fsynch", "arbitrary", "nonrigid", 1, ("one-color-fsynch-nonrigid",)),
    Cell("ssynch", "arbitrary", "nonrigid", 2, ("alg1-ssynch-nonrigid", "one-color-ssynch-defeats")),
    # a rigid-move defeat schedule is legal verbatim under bounded-advance
    # moves, so the rigid arbitrary-start sweep also backs this cell
    Cell("asynch", "arbitrary", "nonrigid", 3, ("alg3-asynch-nonrigid", "two-color-rigid-arbitrary-sweep")),
)

_TABLE_FILES = {"alg1": "alg1.txt", "alg3": "alg3.txt", "one_color": "one_color.txt"}
_BUILTIN_TABLES = {"alg1": alg1, "alg3": alg3, "one_color": one_color_midpoint}


def load_tables(tables_dir: str | None) -> dict[str, AnyTable]:
    """Builtin algorithm tables, individually overridable by files on disk."""
    tables = {name: build() for name, build in _BUILTIN_TABLES.items()}
    if tables_dir is None:
        return tables
    base = Path(tables_dir)
    for name, filename in _TABLE_FILES.items():
        path = base / filename
        if path.exists():
            tables[name] = parse_table(path.read_text())
            logger.info("loaded %s from %s", name, path)
    return tables


def _gathering_runs(
    table: AnyTable,
    model: str,
    rigidity,
    seeds: int,
    preset_only: bool = False,
    check_budget: bool = False,
) -> tuple[bool, str]:
    """Run seed-varied fair schedules from every start pair; all must gather."""
    palette = table.palette
    pairs = (
        [(palette[0], palette[0])]
        if preset_only
        else list(itertools.product(palette, repeat=2))
    )
    runs = 0
    for colors in pairs:
        for seed in range(seeds):
            config = initial_configuration(
                colors, (ZERO, START_DISTANCE), rigidity, model=model
            )
            policy = random_fair(table, seed, model=model)
            trace = run_policy(config, table, policy, budget=RUN_BUDGET)
            if not gathered_stable(trace.final):
                return False, (
                    f"start {colors} seed {seed}: {trace.stop_reason} at "
                    f"distance {trace.final.distance}"
                )
            if check_budget and not check_gathering_bound(trace, DELTA, START_DISTANCE):
                return False, f"start {colors} seed {seed}: gathered but over the cycle budget"
            runs += 1
    shape = f"{len(pairs)} start pair{'s' if len(pairs) > 1 else ''} x {seeds} seeds"
    return True, f"{runs} runs gathered ({shape})"


def _ev_one_color_fsynch_rigid(tables, seeds):
    return _gathering_runs(tables["one_color"], SchedulerKind.FSYNCH, RIGID, seeds)


def _ev_one_color_fsynch_nonrigid(tables, seeds):
    return _gathering_runs(tables["one_color"], SchedulerKind.FSYNCH, non_rigid(DELTA), seeds)


def _ev_alg1_ssynch_rigid(tables, seeds):
    return _gathering_runs(tables["alg1"], SchedulerKind.SSYNCH, RIGID, seeds)


def _ev_alg1_ssynch_nonrigid(tables, seeds):
    return _gathering_runs(
        tables["alg1"], SchedulerKind.SSYNCH, non_rigid(DELTA), seeds, check_budget=True
    )


def _ev_alg1_explore(tables, seeds):
    table = tables["alg1"]
    a = table.palette[0]
    verdict = bounded_explore_rigid(table, (a, a), SchedulerKind.ASYNCH)
    if isinstance(verdict, GathersProven):
        return True, f"all fair schedules gather ({verdict.states_explored} canonical states)"
    return False, f"explorer verdict: {type(verdict).__name__}"


def _ev_alg3_asynch_rigid(tables, seeds):
    return _gathering_runs(tables["alg3"], SchedulerKind.ASYNCH, RIGID, seeds)


def _ev_alg3_asynch_nonrigid(tables, seeds):
    return _gathering_runs(
        tables["alg3"], SchedulerKind.ASYNCH, non_rigid(DELTA), seeds, check_budget=True
    )


def _ev_one_color_defeats(tables, seeds):
    report = sweep_one_color(DEFAULT_GRID, model=SchedulerKind.SSYNCH)
    if report.survivors:
        return False, f"surviving one-color tables: {report.survivors}"
    return True, f"0/{report.total} one-color tables survive"


def _ev_rigid_arbitrary_sweep(tables, seeds):
    report = sweep_two_colors(DEFAULT_GRID, "rigid-asynch-arbitrary")
    if report.survivors:
        return False, f"surviving tables: {report.survivors[:10]}"
    return True, f"0/{report.total} two-color tables survive"


def _ev_nonrigid_preset_sweep(tables, seeds):
    report = sweep_two_colors(DEFAULT_GRID, "nonrigid-asynch-preset", delta=DELTA)
    if report.survivors:
        return False, f"surviving tables: {report.survivors[:10]}"
    return True, f"0/{report.total} two-color tables survive"


EvidenceFn = Callable[[dict, int], tuple[bool, str]]

EVIDENCE: dict[str, tuple[str, EvidenceFn]] = {
    "one-color-fsynch-rigid": (
        "single light gathers under rigid lockstep rounds",
        _ev_one_color_fsynch_rigid,
    ),
    "one-color-fsynch-nonrigid": (
        "single light gathers under bounded-advance lockstep rounds",
        _ev_one_color_fsynch_nonrigid,
    ),
    "alg1-ssynch-rigid": (
        "two lights gather under rigid round schedules from every start pair",
        _ev_alg1_ssynch_rigid,
    ),
    "alg1-ssynch-nonrigid": (
        "two lights gather under bounded-advance round schedules, within the cycle budget",
        _ev_alg1_ssynch_nonrigid,
    ),
    "alg1-asynch-rigid-explore": (
        "two lights gather under every fair rigid interleaving from the all-A start",
        _ev_alg1_explore,
    ),
    "alg3-asynch-rigid": (
        "three lights gather under rigid fair interleavings from every start pair",
        _ev_alg3_asynch_rigid,
    ),
    "alg3-asynch-nonrigid": (
        "three lights gather under bounded-advance fair interleavings, within the cycle budget",
        _ev_alg3_asynch_nonrigid,
    ),
    "one-color-ssynch-defeats": (
        "every single-light table is defeated by a round schedule",
        _ev_one_color_defeats,
    ),
    "two-color-rigid-arbitrary-sweep": (
        "every two-light table is defeated from some start pair under rigid interleavings",
        _ev_rigid_arbitrary_sweep,
    ),
    "two-color-nonrigid-preset-sweep": (
        "every two-light table is defeated from the all-A start under bounded-advance moves",
        _ev_nonrigid_preset_sweep,
    ),
}


def _format_table() -> list[str]:
    lines = [
        "minimum lights to rendezvous (per scheduler, move rigidity, start lights)",
        "",
        "rigidity  model   preset  arbitrary",
    ]
    by_key = {(c.rigidity, c.model, c.side): c.colors for c in CELLS}
    for rigidity in ("rigid", "nonrigid"):
        for model in ("fsynch", "ssynch", "asynch"):
            preset = by_key[(rigidity, model, "preset")]
            arbitrary = by_key[(rigidity, model, "arbitrary")]
            lines.append(f"{rigidity:<9} {model:<7} {preset:<7} {arbitrary}")
    return lines


def run_reproduce(
    cell_filter: str | None = None,
    tables_dir: str | None = None,
    seeds: int = 5,
    out=print,
) -> int:
    tables = load_tables(tables_dir)
    selected = [c for c in CELLS if cell_filter is None or cell_filter in c.ident]
    if not selected:
        out(f"no cell id contains {cell_filter!r}")
        out("cell ids: " + ", ".join(c.ident for c in CELLS))
        return 1
    for line in _format_table():
        out(line)
    needed: list[str] = []
    for cell in selected:
        for ev in cell.evidence:
            if ev not in needed:
                needed.append(ev)
    results: dict[str, tuple[bool, str]] = {}
    out("")
    out("evidence:")
    for ev in needed:
        description, fn = EVIDENCE[ev]
        ok, detail = fn(tables, seeds)
        results[ev] = (ok, detail)
        out(f"  [{'PASS' if ok else 'FAIL'}] {ev}: {description} -- {detail}")
    out("")
    out("cells:")
    failed = []
    for cell in selected:
        ok = all(results[ev][0] for ev in cell.evidence)
        if not ok:
            failed.append(cell.ident)
        out(
            f"  [{'PASS' if ok else 'FAIL'}] {cell.ident}: {cell.colors} "
            f"via {', '.join(cell.evidence)}"
        )
    if failed:
        out("")
        out("failed cells: " + ", ".join(failed))
        return 2
    return 0
