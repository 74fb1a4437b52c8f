# Copyright (c) 2026 sadp-legal contributors. MIT License; see LICENSE for details.

"""Placed rows, the netlist and the layout metrics computed over them."""

from __future__ import annotations

import copy
import math
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field

import numpy as np

from .dplut import Orientation
from .errors import InconsistentLibrary, PlacementError
from .geometry import Cell, Pin


@dataclass
class PlacedCell:
    instance: str
    cell: str
    x: float
    orient: Orientation = Orientation.R0
    coloring: int | None = None

    def right(self, width: float) -> float:
        return self.x + width

    def pin_position(
        self, master: Cell, pin: Pin | str, y: float
    ) -> tuple[float, float]:
        """Absolute pin location for this instance placed at row height ``y``."""
        if isinstance(pin, str):
            pin = master.pin(pin)
        px = pin.x if self.orient is Orientation.R0 else master.width - pin.x
        return (self.x + px, y + pin.y)


@dataclass
class Row:
    index: int
    y: float
    cells: list[PlacedCell] = field(default_factory=list)
    capacity: float | None = None

    def __len__(self) -> int:
        return len(self.cells)

    def pairs(self) -> Iterator[tuple[PlacedCell, PlacedCell]]:
        return zip(self.cells, self.cells[1:])

    def extent(self, cells: Mapping[str, Cell]) -> tuple[float, float] | None:
        if not self.cells:
            return None
        last = self.cells[-1]
        return (self.cells[0].x, last.right(cells[last.cell].width))


@dataclass
class Netlist:
    """Named nets, each a list of (instance, pin) endpoints."""

    nets: dict[str, list[tuple[str, str]]] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.nets)


@dataclass
class Placement:
    rows: list[Row]
    row_height: float
    netlist: Netlist = field(default_factory=Netlist)
    library: str | None = None

    def instances(self) -> Iterator[tuple[Row, PlacedCell]]:
        for row in self.rows:
            for pc in row.cells:
                yield row, pc

    def by_instance(self) -> dict[str, tuple[Row, PlacedCell]]:
        return {pc.instance: (row, pc) for row, pc in self.instances()}

    def __len__(self) -> int:
        return sum(len(r) for r in self.rows)

    def copy(self) -> Placement:
        return copy.deepcopy(self)

    def validate(self, cells: Mapping[str, Cell]) -> None:
        """Check names, ordering, overlaps, capacities and net endpoints."""
        seen: set[str] = set()
        for row, pc in self.instances():
            if pc.instance in seen:
                raise PlacementError(f"duplicate instance {pc.instance!r}")
            seen.add(pc.instance)
            master = cells.get(pc.cell)
            if master is None:
                raise InconsistentLibrary(
                    f"instance {pc.instance!r} uses unknown cell {pc.cell!r}"
                )
            if master.height != self.row_height:
                raise InconsistentLibrary(
                    f"cell {pc.cell!r} height {master.height} != row height "
                    f"{self.row_height}"
                )
            if pc.x < 0:
                raise PlacementError(f"instance {pc.instance!r} at negative x {pc.x}")

        for row in self.rows:
            for left, right in row.pairs():
                if left.right(cells[left.cell].width) > right.x:
                    raise PlacementError(
                        f"row {row.index}: {left.instance!r} "
                        f"overlaps {right.instance!r}"
                    )
            ext = row.extent(cells)
            if row.capacity is not None and ext is not None and ext[1] > row.capacity:
                raise PlacementError(
                    f"row {row.index}: right edge {ext[1]} exceeds capacity "
                    f"{row.capacity}"
                )

        placed = self.by_instance()
        for net, pins in self.netlist.nets.items():
            for inst, pin in pins:
                if inst not in placed:
                    raise PlacementError(f"net {net!r}: unknown instance {inst!r}")
                master = cells[placed[inst][1].cell]
                if all(p.name != pin for p in master.pins):
                    raise PlacementError(
                        f"net {net!r}: cell {master.name!r} has no pin {pin!r}"
                    )


def layout_extent(
    placement: Placement, cells: Mapping[str, Cell]
) -> tuple[float, float]:
    extents = [e for r in placement.rows if (e := r.extent(cells)) is not None]
    if not extents:
        return (0.0, 0.0)
    return (min(e[0] for e in extents), max(e[1] for e in extents))


def layout_area(placement: Placement, cells: Mapping[str, Cell]) -> float:
    """Bounding extent width times the height of every row."""
    lo, hi = layout_extent(placement, cells)
    return (hi - lo) * placement.row_height * len(placement.rows)


def hpwl(placement: Placement, cells: Mapping[str, Cell]) -> float:
    """Half-perimeter wirelength summed over every net with at least one pin."""
    placed = placement.by_instance()
    xs: list[float] = []
    ys: list[float] = []
    starts: list[int] = []
    for pins in placement.netlist.nets.values():
        if not pins:
            continue
        starts.append(len(xs))
        for inst, pin in pins:
            row, pc = placed[inst]
            x, y = pc.pin_position(cells[pc.cell], pin, row.y)
            xs.append(x)
            ys.append(y)
    if not starts:
        return 0.0

    px = np.asarray(xs, dtype=np.float64)
    py = np.asarray(ys, dtype=np.float64)
    idx = np.asarray(starts, dtype=np.intp)
    span_x = np.maximum.reduceat(px, idx) - np.minimum.reduceat(px, idx)
    span_y = np.maximum.reduceat(py, idx) - np.minimum.reduceat(py, idx)
    return float(math.fsum(span_x) + math.fsum(span_y))
