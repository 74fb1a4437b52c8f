# Copyright (c) 2026 sadp-legal contributors. MIT License; see LICENSE for details.

"""Library friendliness and per-row congestion statistics."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

from .cell_profile import CellProfile, PgType
from .dplut import Dplut
from .geometry import Side, near_boundary
from .legalizer import conflicting_neighbours, rails_consistent, required_gap
from .placement import Placement


@dataclass(frozen=True)
class CellFriendliness:
    name: str
    as_left: float
    as_right: float
    near_left: int
    near_right: int
    single_color_left: bool
    single_color_right: bool


@dataclass(frozen=True)
class LibraryStats:
    cells: int
    pg_types: dict[str, int]
    abut_left: dict[str, int]
    abut_right: dict[str, int]
    non_null_fraction: float
    consistent_rails: bool
    per_cell: tuple[CellFriendliness, ...]

    def least_friendly(self) -> CellFriendliness | None:
        return min(
            self.per_cell, key=lambda c: (c.as_left + c.as_right, c.name), default=None
        )


def library_friendliness(t: Dplut) -> LibraryStats:
    profiles = [t.profile(name) for name in t.cells]
    n = len(profiles)
    per_cell = []
    for p in profiles:
        as_left = sum(1 for r in t.cells if t.entries[(p.name, r)])
        as_right = sum(1 for l_ in t.cells if t.entries[(l_, p.name)])
        per_cell.append(
            CellFriendliness(
                name=p.name,
                as_left=as_left / n,
                as_right=as_right / n,
                near_left=len(near_boundary(p.cell, Side.LEFT, t.s_dp)),
                near_right=len(near_boundary(p.cell, Side.RIGHT, t.s_dp)),
                single_color_left=_near_single_color(p, Side.LEFT, t.s_dp),
                single_color_right=_near_single_color(p, Side.RIGHT, t.s_dp),
            )
        )
    pg = Counter(p.pg.value for p in profiles)
    return LibraryStats(
        cells=n,
        pg_types=dict(sorted(pg.items())),
        abut_left=dict(sorted(Counter(p.abut_left.value for p in profiles).items())),
        abut_right=dict(sorted(Counter(p.abut_right.value for p in profiles).items())),
        non_null_fraction=t.non_empty / len(t) if len(t) else 0.0,
        consistent_rails=not (PgType.SAME.value in pg and PgType.DIFF.value in pg),
        per_cell=tuple(per_cell),
    )


def _near_single_color(profile: CellProfile, side: Side, s_dp: float) -> bool:
    near = [p.id for p in near_boundary(profile.cell, side, s_dp)]
    return all(len({c.color(pid) for pid in near}) <= 1 for c in profile.colorings)


@dataclass(frozen=True)
class RowCongestion:
    index: int
    utilization: float
    whitespace: float
    trailing: float
    conflicts: int
    demand: float
    slack: float


def row_congestion(placement: Placement, t: Dplut) -> list[RowCongestion]:
    """Whitespace against the spreading needed by each row's conflicts.

    ``trailing`` is the free space after the last cell; ``slack`` is what is
    left of it once every spreadable conflict is given its required gap.
    """
    out = []
    for row in placement.rows:
        widths = sum(t.profile(pc.cell).cell.width for pc in row.cells)
        last = row.cells[-1] if row.cells else None
        right = last.right(t.profile(last.cell).cell.width) if last else 0.0
        capacity = row.capacity if row.capacity is not None else right
        conflicts = 0
        demand = 0.0
        for left, nxt in conflicting_neighbours(row, t):
            conflicts += 1
            if rails_consistent(t.profile(left.cell), left, t.profile(nxt.cell), nxt):
                gap = nxt.x - left.right(t.profile(left.cell).cell.width)
                need = required_gap(t, left, nxt, t.s_dp) - gap
                demand += max(0, math.ceil(round(need, 9)))
        trailing = capacity - right
        out.append(
            RowCongestion(
                index=row.index,
                utilization=widths / capacity if capacity else 0.0,
                whitespace=capacity - widths,
                trailing=trailing,
                conflicts=conflicts,
                demand=demand,
                slack=trailing - demand,
            )
        )
    return out


def bottleneck(rows: list[RowCongestion]) -> RowCongestion | None:
    return min(rows, key=lambda r: (r.slack, r.index), default=None)
