# Copyright (c) 2026 sadp-legal contributors. MIT License; see LICENSE for details.

"""PG-type / Abut-type classification and the pairwise compatibility fast paths."""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from enum import Enum

from .coloring import (
    ColoringCandidate,
    ConflictGraph,
    Mask,
    build_conflict_graph,
    enumerate_colorings,
)
from .geometry import Cell, Side, boundary_clearance, mirror_cell, near_boundary

log = logging.getLogger(__name__)


class PgType(str, Enum):
    SAME = "same-pg"
    DIFF = "diff-pg"
    FREE = "free-pg"


class AbutType(str, Enum):
    SAFE = "safe-abut"
    FREE = "free-abut"
    UNKNOWN = "unknown-abut"


class FastPath(str, Enum):
    COMPATIBLE = "compatible"
    NEEDS_FULL_CHECK = "needs-full-check"


def classify_pg(cell: Cell, colorings: Sequence[ColoringCandidate]) -> PgType:
    """Same/Diff when every coloring agrees on the rail relation, Free otherwise.

    Cells lacking a power or ground pattern are Free.
    """
    if not colorings:
        raise ValueError(f"cell {cell.name!r} has no colorings")
    power, ground = cell.power, cell.ground
    if power is None or ground is None:
        return PgType.FREE
    relations = {c.color(power.id) is c.color(ground.id) for c in colorings}
    if relations == {True}:
        return PgType.SAME
    if relations == {False}:
        return PgType.DIFF
    return PgType.FREE


def _component_map(
    cell: Cell, colorings: Sequence[ColoringCandidate]
) -> dict[str, frozenset[str]]:
    """Pattern id -> ids that always keep a fixed color relation with it.

    Derived from the colorings alone so callers need not keep the graph: two
    patterns share a component iff their relation is identical in every
    candidate (candidates enumerate every component swap).
    """
    ids = cell.pattern_ids
    signature = {
        pid: tuple(c.color(pid) is c.color(ids[0]) for c in colorings) for pid in ids
    }
    groups: dict[tuple[bool, ...], set[str]] = {}
    for pid, sig in signature.items():
        key = sig if sig and sig[0] else tuple(not s for s in sig)
        groups.setdefault(key, set()).add(pid)
    return {pid: frozenset(g) for g in groups.values() for pid in g}


def classify_abut(
    cell: Cell,
    colorings: Sequence[ColoringCandidate],
    side: Side,
    s_dp: float,
    s_b_min: float,
) -> AbutType:
    """Safe when the side clears ``s_dp - s_b_min``; Free when every Signal
    pattern within ``s_dp`` of the side sits in its own rail-free component;
    Unknown otherwise."""
    if s_b_min > s_dp:
        raise ValueError(f"s_b_min ({s_b_min}) must not exceed s_dp ({s_dp})")
    if boundary_clearance(cell, side) > s_dp - s_b_min:
        return AbutType.SAFE

    components = _component_map(cell, colorings)
    rails = {p.id for p in (cell.power, cell.ground) if p is not None}
    near = [p.id for p in near_boundary(cell, side, s_dp)]
    seen: set[frozenset[str]] = set()
    for pid in near:
        comp = components[pid]
        if comp & rails or comp in seen:
            return AbutType.UNKNOWN
        seen.add(comp)
    return AbutType.FREE


def pg_compatible(a: PgType, b: PgType) -> bool:
    return PgType.FREE in (a, b) or a is b


def abut_fast_path(left: AbutType, right: AbutType) -> FastPath:
    """Fast compatibility answer for the facing sides of an abutted pair.

    ``left`` is the left cell's right side, ``right`` the right cell's left
    side.  {Free, Unknown} is not decided here: one Free-side pattern can face
    two mutually conflicting patterns of the other cell.
    """
    if AbutType.SAFE in (left, right):
        return FastPath.COMPATIBLE
    if left is AbutType.FREE and right is AbutType.FREE:
        return FastPath.COMPATIBLE
    return FastPath.NEEDS_FULL_CHECK


@dataclass(frozen=True)
class CellProfile:
    cell: Cell
    colorings: tuple[ColoringCandidate, ...]
    pg: PgType
    abut_left: AbutType
    abut_right: AbutType
    s_b_left: float
    s_b_right: float
    graph: ConflictGraph = field(repr=False, compare=False)
    mirrored: Cell = field(repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.colorings:
            raise ValueError(f"cell {self.cell.name!r} has no colorings")

    @property
    def name(self) -> str:
        return self.cell.name

    def abut(self, side: Side) -> AbutType:
        return self.abut_left if side is Side.LEFT else self.abut_right

    def s_b(self, side: Side) -> float:
        return self.s_b_left if side is Side.LEFT else self.s_b_right

    def rail_colors(self, index: int) -> tuple[Mask | None, Mask | None]:
        """(power, ground) colors of one coloring; None where the rail is absent."""
        c = self.colorings[index]
        power, ground = self.cell.power, self.cell.ground
        return (
            c.get(power.id if power else None),
            c.get(ground.id if ground else None),
        )


def library_s_b_min(cells: Iterable[Cell]) -> float:
    """Smallest Signal-pattern-to-boundary spacing over every cell and side."""
    values = [
        boundary_clearance(c, side)
        for c in cells
        if c.patterns
        for side in Side
    ]
    finite = [v for v in values if math.isfinite(v)]
    return min(finite, default=0.0)


def profile_cell(cell: Cell, s_dp: float, s_b_min: float) -> CellProfile:
    graph = build_conflict_graph(cell, s_dp)
    colorings = tuple(enumerate_colorings(graph))
    return CellProfile(
        cell=cell,
        colorings=colorings,
        pg=classify_pg(cell, colorings),
        abut_left=classify_abut(cell, colorings, Side.LEFT, s_dp, s_b_min),
        abut_right=classify_abut(cell, colorings, Side.RIGHT, s_dp, s_b_min),
        s_b_left=boundary_clearance(cell, Side.LEFT),
        s_b_right=boundary_clearance(cell, Side.RIGHT),
        graph=graph,
        mirrored=mirror_cell(cell),
    )


def resolve_s_b_min(
    cells: Sequence[Cell], s_dp: float, override: float | None = None
) -> float:
    """Library minimum pattern-to-boundary spacing, or a checked override."""
    derived = library_s_b_min(cells)
    if override is None:
        return min(derived, s_dp)
    if override > derived:
        log.warning(
            "s_b_min override %.3f exceeds the library minimum %.3f; "
            "Safe-Abut classification may be optimistic",
            override,
            derived,
        )
    return override


def profile_library(
    cells: Sequence[Cell], s_dp: float, s_b_min: float | None = None
) -> list[CellProfile]:
    """Profile every cell; ``s_b_min`` defaults to the library minimum."""
    s_b_min = resolve_s_b_min(cells, s_dp, s_b_min)
    profiles = [profile_cell(cell, s_dp, s_b_min) for cell in cells]
    log.info(
        "Profiled %d cell(s) with s_dp=%s s_b_min=%s", len(profiles), s_dp, s_b_min
    )
    return profiles
