# Copyright (c) 2026 sadp-legal contributors. MIT License; see LICENSE for details.

"""Rectilinear layout primitives: rects, patterns, cells and their clearances.

Coordinates are layout units (one unit is the minimum feature width).
Clearance is the Euclidean distance between axis-aligned rects, 0 when they
touch or overlap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations

import networkx as nx

from .errors import EmptyCell, InvalidGeometry


class Net(str, Enum):
    POWER = "power"
    GROUND = "ground"
    SIGNAL = "signal"

    @property
    def is_rail(self) -> bool:
        return self is not Net.SIGNAL


class Side(str, Enum):
    LEFT = "left"
    RIGHT = "right"

    @property
    def opposite(self) -> Side:
        return Side.RIGHT if self is Side.LEFT else Side.LEFT


@dataclass(frozen=True, order=True)
class Rect:
    x_lo: float
    y_lo: float
    x_hi: float
    y_hi: float

    def __post_init__(self) -> None:
        if not (self.x_lo < self.x_hi and self.y_lo < self.y_hi):
            raise InvalidGeometry(f"rect {self.as_tuple()} has no area")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x_lo, self.y_lo, self.x_hi, self.y_hi)

    def shifted(self, dx: float = 0, dy: float = 0) -> Rect:
        return Rect(self.x_lo + dx, self.y_lo + dy, self.x_hi + dx, self.y_hi + dy)

    def mirrored(self, width: float) -> Rect:
        return Rect(width - self.x_hi, self.y_lo, width - self.x_lo, self.y_hi)


def clearance(a: Rect, b: Rect) -> float:
    dx = max(0.0, b.x_lo - a.x_hi, a.x_lo - b.x_hi)
    dy = max(0.0, b.y_lo - a.y_hi, a.y_lo - b.y_hi)
    return math.hypot(dx, dy)


@dataclass(frozen=True)
class Pattern:
    """A connected union of rects on one net."""

    id: str
    rects: tuple[Rect, ...]
    net: Net = Net.SIGNAL

    def __post_init__(self) -> None:
        if not self.rects:
            raise InvalidGeometry(f"pattern {self.id!r} has no rects")
        if len(self.rects) > 1:
            g = nx.Graph()
            g.add_nodes_from(range(len(self.rects)))
            g.add_edges_from(
                (i, j)
                for (i, a), (j, b) in combinations(enumerate(self.rects), 2)
                if clearance(a, b) == 0
            )
            if not nx.is_connected(g):
                raise InvalidGeometry(f"pattern {self.id!r} is not connected")

    @property
    def x_lo(self) -> float:
        return min(r.x_lo for r in self.rects)

    @property
    def x_hi(self) -> float:
        return max(r.x_hi for r in self.rects)

    def shifted(self, dx: float = 0, dy: float = 0) -> Pattern:
        return Pattern(self.id, tuple(r.shifted(dx, dy) for r in self.rects), self.net)


def pattern_clearance(p: Pattern, q: Pattern) -> float:
    return min(clearance(a, b) for a in p.rects for b in q.rects)


@dataclass(frozen=True)
class Pin:
    name: str
    x: float
    y: float


@dataclass(frozen=True)
class Cell:
    name: str
    width: float
    height: float
    patterns: tuple[Pattern, ...] = ()
    pins: tuple[Pin, ...] = ()
    _by_id: dict[str, Pattern] = field(
        init=False, repr=False, compare=False, hash=False
    )

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise InvalidGeometry(f"cell {self.name!r} has non-positive size")

        by_id: dict[str, Pattern] = {}
        rails: set[Net] = set()
        for p in self.patterns:
            if p.id in by_id:
                raise InvalidGeometry(f"cell {self.name!r}: duplicate pattern {p.id!r}")
            by_id[p.id] = p
            for r in p.rects:
                inside = r.x_lo >= 0 and r.y_lo >= 0
                if not (inside and r.x_hi <= self.width and r.y_hi <= self.height):
                    raise InvalidGeometry(
                        f"cell {self.name!r}: pattern {p.id!r} rect {r.as_tuple()} "
                        f"outside [0,{self.width}]x[0,{self.height}]"
                    )
            if p.net.is_rail:
                if p.net in rails:
                    raise InvalidGeometry(
                        f"cell {self.name!r}: more than one {p.net.value} pattern"
                    )
                rails.add(p.net)
                # Rails are row-global; they must run from boundary to boundary.
                if p.x_lo != 0 or p.x_hi != self.width:
                    raise InvalidGeometry(
                        f"cell {self.name!r}: {p.net.value} rail {p.id!r} does not "
                        f"span the cell width"
                    )

        pin_names = [pin.name for pin in self.pins]
        if len(set(pin_names)) != len(pin_names):
            raise InvalidGeometry(f"cell {self.name!r}: duplicate pin names")

        object.__setattr__(self, "_by_id", by_id)

    def pattern(self, pattern_id: str) -> Pattern:
        return self._by_id[pattern_id]

    @property
    def pattern_ids(self) -> tuple[str, ...]:
        return tuple(p.id for p in self.patterns)

    @property
    def power(self) -> Pattern | None:
        return next((p for p in self.patterns if p.net is Net.POWER), None)

    @property
    def ground(self) -> Pattern | None:
        return next((p for p in self.patterns if p.net is Net.GROUND), None)

    @property
    def signals(self) -> tuple[Pattern, ...]:
        return tuple(p for p in self.patterns if p.net is Net.SIGNAL)

    def pin(self, name: str) -> Pin:
        for pin in self.pins:
            if pin.name == name:
                return pin
        raise KeyError(f"cell {self.name!r} has no pin {name!r}")


def side_distance(p: Pattern, width: float, side: Side) -> float:
    """Horizontal distance from a pattern to one vertical boundary of its cell."""
    return p.x_lo if side is Side.LEFT else width - p.x_hi


def boundary_clearance(c: Cell, side: Side) -> float:
    """Minimum horizontal Signal-pattern distance to a cell boundary.

    Rails span the whole cell and merge with their neighbours, so they do not
    count; a cell holding only rails returns ``inf``.
    """
    if not c.patterns:
        raise EmptyCell(f"cell {c.name!r} has no patterns")
    return min((side_distance(p, c.width, side) for p in c.signals), default=math.inf)


def near_boundary(c: Cell, side: Side, distance: float) -> tuple[Pattern, ...]:
    """Signal patterns closer than ``distance`` to the given boundary."""
    return tuple(p for p in c.signals if side_distance(p, c.width, side) < distance)


def mirror_cell(c: Cell) -> Cell:
    """Reflect a cell about its vertical centre line (x' = width - x)."""
    return Cell(
        name=c.name,
        width=c.width,
        height=c.height,
        patterns=tuple(
            Pattern(p.id, tuple(r.mirrored(c.width) for r in p.rects), p.net)
            for p in c.patterns
        ),
        pins=tuple(Pin(pin.name, c.width - pin.x, pin.y) for pin in c.pins),
    )


def rail_extents(c: Cell, net: Net) -> tuple[tuple[float, float], ...] | None:
    """Sorted y-ranges of the rects of one rail, or None when the cell lacks it."""
    rail = c.power if net is Net.POWER else c.ground
    if rail is None:
        return None
    return tuple(sorted((r.y_lo, r.y_hi) for r in rail.rects))
