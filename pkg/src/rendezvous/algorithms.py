"""Built-in rendezvous rule tables and exhaustive class enumeration.

Every algorithm here is "move to an affine point of the two observed
positions, with the coefficient a function of the two lights alone". That
class is finite once the palette and the coefficient grid are fixed, which is
what makes the impossibility sweeps exhaustive.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Iterator, Mapping

from .model import (
    Color,
    ExtendedRuleTable,
    Rule,
    RuleTable,
    TERMINATE,
    TableError,
    palette,
)
from .scalar import HALF, ONE, ZERO, scalar

DEFAULT_GRID: tuple[Fraction, ...] = (ZERO, HALF, ONE)


def lambda_grid(values: Iterable[Fraction | int | str]) -> tuple[Fraction, ...]:
    grid = tuple(scalar(v) for v in values)
    if not grid:
        raise ValueError("coefficient grid must be nonempty")
    if len(set(grid)) != len(grid):
        raise ValueError(f"coefficient grid has duplicates: {grid}")
    return grid


def alg1() -> RuleTable:
    """Two lights; gathers from any start under semi-synchronous activation and
    from the all-A start under rigid asynchrony.

    A robot lit A seeing A turns B and heads for the midpoint; lit A seeing B it
    chases the other's position; lit B it only resets to A when the other shows
    B too, and otherwise stays put.
    """
    A, B = palette(2)
    return RuleTable(
        (A, B),
        {
            (A, A): Rule(B, HALF),
            (A, B): Rule(A, ONE),
            (B, A): Rule(B, ZERO),
            (B, B): Rule(A, ZERO),
        },
    )


def alg3() -> RuleTable:
    """Three lights; gathers from any start under non-rigid asynchrony.

    The lights cycle A -> B -> C -> A on same-color snapshots; on the color one
    step behind mine I chase, on the color one step ahead I hold still.
    """
    A, B, C = palette(3)
    return RuleTable(
        (A, B, C),
        {
            (A, A): Rule(B, HALF),
            (A, B): Rule(A, ONE),
            (A, C): Rule(A, ZERO),
            (B, A): Rule(B, ZERO),
            (B, B): Rule(C, ZERO),
            (B, C): Rule(B, ONE),
            (C, A): Rule(C, ONE),
            (C, B): Rule(C, ZERO),
            (C, C): Rule(A, ZERO),
        },
    )


def alg2() -> ExtendedRuleTable:
    """Three lights plus a coincidence test; gathers and then switches off.

    Restricted to non-coincident snapshots and lights {A, B} this is NOT alg1:
    here a B robot seeing A chases, which is what lets both robots notice the
    meeting point and reach the terminal light C.
    """
    A, B, C = palette(3)
    entries = {
        (A, A, False): Rule(B, HALF),
        (A, A, True): Rule(C, ZERO),
        (A, B, False): Rule(A, ONE),
        (A, B, True): Rule(A, ONE),
        (A, C, False): Rule(A, ONE),
        (A, C, True): Rule(C, ZERO),
        (B, A, False): Rule(B, ONE),
        (B, A, True): Rule(C, ZERO),
        (B, B, False): Rule(A, ZERO),
        (B, B, True): Rule(A, ZERO),
        (B, C, False): Rule(B, ONE),
        (B, C, True): Rule(C, ZERO),
        (C, A, False): Rule(C, ZERO),
        (C, A, True): Rule(C, ZERO),
        (C, B, False): Rule(C, ZERO),
        (C, B, True): Rule(C, ZERO),
        (C, C, False): Rule(A, ZERO),
        (C, C, True): TERMINATE,
    }
    return ExtendedRuleTable((A, B, C), entries)


def one_color_midpoint() -> RuleTable:
    """The only sensible single-light algorithm: always aim for the midpoint."""
    (A,) = palette(1)
    return RuleTable((A,), {(A, A): Rule(A, HALF)})


# --- enumeration -----------------------------------------------------------------
#
# Tables are ordered lexicographically: snapshot cells (me, other) in palette
# order are the digits (first cell most significant), each digit running over
# (next color in palette order) x (coefficient in grid order).


def _cells(colors: tuple[Color, ...]) -> list[tuple[Color, Color]]:
    return [(me, other) for me in colors for other in colors]


def class_l_count(palette_size: int, grid: tuple[Fraction, ...]) -> int:
    """(palette size * grid size) ** (palette size squared)."""
    return (palette_size * len(grid)) ** (palette_size**2)


def class_l_table_at(index: int, palette_size: int, grid: tuple[Fraction, ...]) -> RuleTable:
    """Direct indexing into the enumeration order (resumable sweeps)."""
    total = class_l_count(palette_size, grid)
    if not 0 <= index < total:
        raise IndexError(f"table index {index} outside 0..{total - 1}")
    colors = palette(palette_size)
    base = palette_size * len(grid)
    cells = _cells(colors)
    digits = []
    value = index
    for _ in cells:
        digits.append(value % base)
        value //= base
    digits.reverse()  # first cell is the most significant digit
    entries = {}
    for cell, digit in zip(cells, digits):
        color_idx, lam_idx = divmod(digit, len(grid))
        entries[cell] = Rule(colors[color_idx], grid[lam_idx])
    return RuleTable(colors, entries)


def table_index(table: RuleTable, grid: tuple[Fraction, ...]) -> int:
    """Inverse of class_l_table_at for tables over the canonical palette."""
    colors = table.palette
    base = len(colors) * len(grid)
    index = 0
    for cell in _cells(colors):
        rule = table.entries[cell]
        try:
            digit = colors.index(rule.next_color) * len(grid) + grid.index(rule.lam)
        except ValueError as exc:
            raise TableError(f"coefficient {rule.lam} not on the grid {grid}") from exc
        index = index * base + digit
    return index


def enumerate_class_l(
    palette_size: int, grid: tuple[Fraction, ...]
) -> Iterator[RuleTable]:
    for index in range(class_l_count(palette_size, grid)):
        yield class_l_table_at(index, palette_size, grid)


def relabel_table(table: RuleTable, mapping: Mapping[Color, Color]) -> RuleTable:
    """Rename colors by a palette permutation (palette order is preserved)."""
    if set(mapping) != set(table.palette) or set(mapping.values()) != set(table.palette):
        raise TableError(f"{mapping} is not a permutation of {table.palette}")
    entries = {
        (mapping[me], mapping[other]): Rule(mapping[rule.next_color], rule.lam)
        for (me, other), rule in table.entries.items()
    }
    return RuleTable(table.palette, entries)


def swap_ab(table: RuleTable) -> RuleTable:
    """The two-color mirror: exchange the roles of A and B everywhere."""
    a, b = table.palette
    return relabel_table(table, {a: b, b: a})
