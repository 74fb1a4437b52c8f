# Copyright (c) 2026 sadp-legal contributors. MIT License; see LICENSE for details.

"""Shared cell builders and small hand-checked libraries.

All hand-built cells are 10 units tall with a ground rail on [0, 1] and a
power rail on [9, 10]; the process uses s_dp = 2 and w_spacer = 1.
"""

from __future__ import annotations

import numpy as np
import pytest

from sadp_legal.config import Params
from sadp_legal.dplut import Orientation, build_dplut
from sadp_legal.formats import Library
from sadp_legal.geometry import Cell, Net, Pattern, Pin, Rect
from sadp_legal.placement import Netlist, PlacedCell, Placement, Row

pytest_plugins = ["pytester"]

S_DP = 2.0
W_SPACER = 1.0
HEIGHT = 10.0


def bar(pid: str, x: float, y_lo: float, y_hi: float, width: float = 1) -> Pattern:
    return Pattern(pid, (Rect(x, y_lo, x + width, y_hi),))


def make_cell(
    name: str,
    width: float,
    signals: list[Pattern],
    rails: bool = True,
    pins: tuple[Pin, ...] = (),
) -> Cell:
    patterns = list(signals)
    if rails:
        patterns = [
            Pattern("gnd", (Rect(0, 0, width, 1),), Net.GROUND),
            Pattern("vdd", (Rect(0, HEIGHT - 1, width, HEIGHT),), Net.POWER),
            *patterns,
        ]
    return Cell(name, width, HEIGHT, tuple(patterns), pins)


def diff_cell() -> Cell:
    """Diff-PG cell with two short bars hugging each vertical boundary.

    The bars next to a boundary touch opposite rails, so one of them is always
    Trim whatever the rail polarity.
    """
    return make_cell(
        "DIFF",
        10,
        [
            bar("la", 0, 2, 4),
            bar("lb", 0, 6, 8),
            bar("p", 3, 4, 8),
            bar("q", 5, 2, 6),
            bar("ra", 9, 2, 4),
            bar("rb", 9, 6, 8),
        ],
        pins=(Pin("A", 1.5, 5), Pin("Y", 8.5, 5)),
    )


def stub_cell() -> Cell:
    """Free-PG cell: a half-unit stub on its left edge, a unit stub on its right.

    Abutted unflipped to the right of :func:`diff_cell`, the left stub covers
    half a unit of the neighbour's Trim edge; flipped, the right stub covers a
    full unit.
    """
    return make_cell(
        "STUB",
        5,
        [bar("g", 0, 3, 3.5), bar("c", 4, 3, 4)],
        pins=(Pin("A", 2.5, 5),),
    )


def same_cell() -> Cell:
    """Same-PG cell: one bar touching both rails."""
    return make_cell("SAME", 4, [bar("s", 1, 2, 8)], pins=(Pin("A", 1.5, 5),))


def edge_cell(name: str = "EDGE") -> Cell:
    """Free-PG cell with one free bar flush against each boundary."""
    return make_cell(
        name,
        6,
        [bar("a", 0, 3, 7), bar("b", 5, 3, 7)],
        pins=(Pin("A", 0.5, 5), Pin("Y", 5.5, 5)),
    )


def thick_ground_cell(name: str = "THICK") -> Cell:
    """Rails only, with a ground rail reaching y = 2 instead of y = 1."""
    return Cell(
        name,
        4,
        HEIGHT,
        (
            Pattern("gnd", (Rect(0, 0, 4, 2),), Net.GROUND),
            Pattern("vdd", (Rect(0, HEIGHT - 1, 4, HEIGHT),), Net.POWER),
        ),
    )


def coloring_index(profile, **wanted: str) -> int:
    """First coloring index whose pattern colors match ``pid="mandrel"|"trim"``."""
    for i, c in enumerate(profile.colorings):
        if all(c.color(pid).value == mask for pid, mask in wanted.items()):
            return i
    raise AssertionError(f"no coloring of {profile.name} matches {wanted}")


def random_cell(
    rng: np.random.Generator,
    name: str = "RND",
    n_signals: int = 6,
    width: int = 8,
    rails: bool = True,
) -> Cell:
    """Random single-rect signal patterns on an integer grid between the rails."""
    signals = []
    for i in range(n_signals):
        x_lo = int(rng.integers(0, width))
        x_hi = int(rng.integers(x_lo + 1, width + 1))
        y_lo = int(rng.integers(1, 8))
        y_hi = int(rng.integers(y_lo + 1, 10))
        signals.append(Pattern(f"p{i}", (Rect(x_lo, y_lo, x_hi, y_hi),)))
    return make_cell(name, width, signals, rails=rails)


def single_row(*cells: tuple[str, str, float, Orientation, int]) -> Placement:
    """One-row placement from (instance, cell, x, orient, coloring) tuples."""
    placed = [PlacedCell(i, c, x, o, k) for i, c, x, o, k in cells]
    return Placement(rows=[Row(0, 0.0, placed)], row_height=HEIGHT, netlist=Netlist())


@pytest.fixture
def params() -> Params:
    return Params(s_dp=S_DP, w_spacer=W_SPACER)


@pytest.fixture
def small_library(params) -> Library:
    return Library((diff_cell(), stub_cell(), same_cell(), edge_cell()), params)


@pytest.fixture
def small_table(small_library):
    return build_dplut(
        small_library.profiles(),
        s_dp=S_DP,
        w_spacer=W_SPACER,
        s_b_min=small_library.s_b_min,
        lib_hash=small_library.hash,
    )
