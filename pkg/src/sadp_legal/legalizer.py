# Copyright (c) 2026 sadp-legal contributors. MIT License; see LICENSE for details.

"""Row-wise greedy SADP legalization.

Each row is swept left to right twice: the flip pass replaces the
orientation/coloring of conflicting neighbours with table candidates, the
spread pass then opens the minimum gap that makes the remaining pairs safe by
distance.  In area-bounded mode the spread is limited to the original layout
extent so the area never changes.
"""

from __future__ import annotations

import copy
import logging
import math
from collections.abc import Mapping
from dataclasses import dataclass, field, replace
from enum import Enum
from itertools import product

from .cell_profile import CellProfile, PgType
from .coloring import Mask, colorings_for
from .dplut import (
    Dplut,
    Orientation,
    cross_edges,
    facing_s_b,
    oriented,
    rail_edges,
)
from .errors import InconsistentLibrary, PlacementError
from .geometry import Cell, Pattern, Side, mirror_cell, pattern_clearance
from .placement import Placement, PlacedCell, Row, hpwl, layout_area, layout_extent

log = logging.getLogger(__name__)


class Mode(str, Enum):
    UB = "ub"
    B = "b"

    @classmethod
    def _missing_(cls, value: object) -> Mode | None:
        if isinstance(value, str):
            return cls.__members__.get(value.upper())
        return None


@dataclass
class RowStats:
    index: int
    conflicts_before: int
    conflicts_after: int
    flips: int = 0
    recolors: int = 0
    spread: float = 0.0
    pg_feasible: bool = True
    rolled_back: bool = False


@dataclass
class LegalizeReport:
    mode: Mode
    conflicts_before: int
    conflicts_after: int
    area_before: float
    area_after: float
    hpwl_before: float
    hpwl_after: float
    flips: int = 0
    recolors: int = 0
    total_spread: float = 0.0
    unsolvable_pg_rows: list[int] = field(default_factory=list)
    unresolved: list[tuple[int, str, str]] = field(default_factory=list)
    rows: list[RowStats] = field(default_factory=list)

    @staticmethod
    def _pct(before: float, after: float) -> float:
        return 100.0 * (after - before) / before if before else 0.0

    @property
    def area_delta_pct(self) -> float:
        return self._pct(self.area_before, self.area_after)

    @property
    def hpwl_delta_pct(self) -> float:
        return self._pct(self.hpwl_before, self.hpwl_after)

    @property
    def resolved_pct(self) -> float:
        """Share of input conflicts removed, in percent."""
        return -self._pct(self.conflicts_before, self.conflicts_after)

    def summary(self) -> str:
        lines = [
            f"mode:              {self.mode.value}",
            f"conflicts:         {self.conflicts_before} -> {self.conflicts_after} "
            f"(-{self.resolved_pct:.2f}%)",
            f"area:              {self.area_before:g} -> {self.area_after:g} "
            f"(+{self.area_delta_pct:.2f}%)",
            f"hpwl:              {self.hpwl_before:g} -> {self.hpwl_after:g} "
            f"({self.hpwl_delta_pct:+.2f}%)",
            f"flips:             {self.flips}",
            f"recolors:          {self.recolors}",
            f"spread:            {self.total_spread:g}",
        ]
        if self.unsolvable_pg_rows:
            rows = ", ".join(str(r) for r in self.unsolvable_pg_rows)
            lines.append(f"pg-infeasible rows: {rows}")
        return "\n".join(lines)


def _coloring(pc: PlacedCell) -> int:
    return 0 if pc.coloring is None else pc.coloring


def _rails(profile: CellProfile, pc: PlacedCell) -> tuple[Mask | None, Mask | None]:
    return profile.rail_colors(_coloring(pc))


def rails_consistent(
    left: CellProfile, lpc: PlacedCell, right: CellProfile, rpc: PlacedCell
) -> bool:
    """Power and ground colors agree wherever both cells carry the rail."""
    return all(
        a is None or b is None or a is b
        for a, b in zip(_rails(left, lpc), _rails(right, rpc))
    )


def _gap(t: Dplut, left: PlacedCell, right: PlacedCell) -> float:
    return right.x - left.right(t.profile(left.cell).cell.width)


def required_gap(t: Dplut, left: PlacedCell, right: PlacedCell, s_dp: float) -> float:
    """Smallest gap that keeps every Signal pattern pair at least s_dp apart."""
    b_l = facing_s_b(t.profile(left.cell), left.orient, Side.RIGHT)
    b_r = facing_s_b(t.profile(right.cell), right.orient, Side.LEFT)
    return max(0.0, s_dp - b_l - b_r)


def is_conflict(
    left: PlacedCell, right: PlacedCell, t: Dplut, s_dp: float | None = None
) -> bool:
    """Whether two row neighbours violate the spacing rule or disagree on rails.

    A stored table candidate is trusted as is; any other tuple falls back to
    an exact cross-boundary check at the actual gap.
    """
    s_dp = t.s_dp if s_dp is None else s_dp
    pl, pr = t.profile(left.cell), t.profile(right.cell)
    if not rails_consistent(pl, left, pr, right):
        return True

    gap = _gap(t, left, right)
    if gap < 0:
        return True
    c_l, c_r = _coloring(left), _coloring(right)
    col_l, col_r = pl.colorings[c_l], pr.colorings[c_r]
    lc, rc = oriented(pl, left.orient), oriented(pr, right.orient)
    # facing_s_b only sees Signals; a rail facing a rail-less cell is checked here
    if _lacks_rail(lc) or _lacks_rail(rc):
        edges = rail_edges(lc, rc, gap, s_dp)
        if any(col_l.color(a) is col_r.color(b) for a, b in edges):
            return True
    if gap >= required_gap(t, left, right, s_dp):
        return False

    if any(
        cand.matches(left.orient, c_l, right.orient, c_r)
        for cand in t.query(left.cell, right.cell)
    ):
        return False

    edges = cross_edges(lc, rc, gap, s_dp)
    return any(col_l.color(a) is col_r.color(b) for a, b in edges)


def _lacks_rail(c: Cell) -> bool:
    return c.power is None or c.ground is None


def rail_breaks(row: Row, t: Dplut) -> set[int]:
    """Indices of cells whose rail colors differ from the last cell carrying that rail.

    Rail-less cells do not interrupt the row's power and ground nets, so the
    comparison reaches across them.
    """
    last: list[Mask | None] = [None, None]
    breaks: set[int] = set()
    for i, pc in enumerate(row.cells):
        for k, color in enumerate(_rails(t.profile(pc.cell), pc)):
            if color is None:
                continue
            if last[k] is not None and last[k] is not color:
                breaks.add(i)
            last[k] = color
    return breaks


def conflicting_neighbours(
    row: Row, t: Dplut, s_dp: float | None = None
) -> list[tuple[PlacedCell, PlacedCell]]:
    """Row neighbours in conflict, counting a rail break against the pair it ends."""
    breaks = rail_breaks(row, t)
    return [
        (left, right)
        for i, (left, right) in enumerate(row.pairs())
        if i + 1 in breaks or is_conflict(left, right, t, s_dp)
    ]


def count_conflicts(row: Row, t: Dplut) -> int:
    return len(conflicting_neighbours(row, t))



def _keeps_rails(t: Dplut, before: PlacedCell, after: PlacedCell) -> bool:
    profile = t.profile(before.cell)
    return _rails(profile, before) == _rails(profile, after)


def flip_pass(row: Row, t: Dplut) -> int:
    """Resolve conflicts by re-orienting/recoloring neighbours; positions never move.

    Only the first pair may change its left cell.  Returns the number of
    candidates applied.
    """
    cells = row.cells
    flips = 0
    for i in range(len(cells) - 1):
        left, right = cells[i], cells[i + 1]
        if not is_conflict(left, right, t):
            continue

        admissible: list[tuple[PlacedCell, PlacedCell]] = []
        for cand in t.query(left.cell, right.cell):
            if i > 0 and (cand.orient_left, cand.coloring_left) != (
                left.orient,
                _coloring(left),
            ):
                continue
            new_l = replace(
                left, orient=cand.orient_left, coloring=cand.coloring_left
            )
            new_r = replace(
                right, orient=cand.orient_right, coloring=cand.coloring_right
            )
            if not (_keeps_rails(t, left, new_l) and _keeps_rails(t, right, new_r)):
                continue
            if is_conflict(new_l, new_r, t):
                continue
            admissible.append((new_l, new_r))
        if not admissible:
            log.debug(
                "row %d: no flip for %s | %s", row.index, left.instance, right.instance
            )
            continue

        chosen = admissible[0]
        if i + 2 < len(cells):
            clear = (a for a in admissible if not is_conflict(a[1], cells[i + 2], t))
            chosen = next(clear, chosen)
        cells[i], cells[i + 1] = chosen
        flips += 1
        log.debug(
            "row %d: flipped %s(%s,%d) | %s(%s,%d)",
            row.index,
            chosen[0].instance,
            chosen[0].orient.value,
            chosen[0].coloring,
            chosen[1].instance,
            chosen[1].orient.value,
            chosen[1].coloring,
        )
    return flips


def spread_pass(
    row: Row, t: Dplut, s_dp: float, mode: Mode, limit: float | None = None
) -> float:
    """Shift the row suffix right until each remaining conflict is distance-safe.

    ``limit`` bounds the last right edge in area-bounded mode.  Returns the
    total displacement applied.
    """
    if mode is Mode.B and limit is None:
        raise ValueError("area-bounded spreading needs a right-edge limit")
    cells = row.cells
    total = 0.0
    for i in range(len(cells) - 1):
        left, right = cells[i], cells[i + 1]
        if not is_conflict(left, right, t, s_dp):
            continue
        pl, pr = t.profile(left.cell), t.profile(right.cell)
        if not rails_consistent(pl, left, pr, right):
            continue

        need = required_gap(t, left, right, s_dp) - _gap(t, left, right)
        # snap to the integer site grid
        shift = float(math.ceil(round(need, 9)))
        if shift <= 0:
            continue
        last = cells[-1]
        end = last.right(t.profile(last.cell).cell.width)
        if mode is Mode.B and end + shift > limit:
            log.debug(
                "row %d: no room to spread %s | %s by %g",
                row.index,
                left.instance,
                right.instance,
                shift,
            )
            continue
        for pc in cells[i + 1 :]:
            pc.x += shift
        total += shift
        log.debug("row %d: spread %s by %g", row.index, right.instance, shift)
    return total


def _pg_feasible(row: Row, t: Dplut) -> bool:
    kinds = {t.profile(pc.cell).pg for pc in row.cells}
    return not (PgType.SAME in kinds and PgType.DIFF in kinds)


def _rail_mismatch(
    rails: tuple[Mask | None, Mask | None], target: tuple[Mask, Mask]
) -> bool:
    return any(
        have is not None and have is not want for have, want in zip(rails, target)
    )


def _closest_coloring(
    profile: CellProfile, current: int, target: tuple[Mask, Mask]
) -> int:
    ref = profile.colorings[current]
    signals = [p.id for p in profile.cell.signals]

    def distance(i: int) -> tuple[int, int]:
        c = profile.colorings[i]
        return (sum(c.color(pid) is not ref.color(pid) for pid in signals), i)

    options = [
        i
        for i in range(len(profile.colorings))
        if not _rail_mismatch(profile.rail_colors(i), target)
    ]
    return min(options, key=distance)


def align_rails(row: Row, t: Dplut) -> int:
    """Recolor cells so every rail in a PG-feasible row shares one color.

    The row target is the admissible (power, ground) pair needing the fewest
    recolored cells.  Returns the number of recolored cells.
    """
    kinds = {t.profile(pc.cell).pg for pc in row.cells}
    targets = [
        (p, g)
        for p, g in product(Mask, Mask)
        if (PgType.SAME not in kinds or p is g)
        and (PgType.DIFF not in kinds or p is not g)
    ]
    if not targets or not row.cells:
        return 0

    def cost(target: tuple[Mask, Mask]) -> int:
        return sum(
            _rail_mismatch(_rails(t.profile(pc.cell), pc), target) for pc in row.cells
        )

    target = min(targets, key=cost)
    recolors = 0
    for pc in row.cells:
        profile = t.profile(pc.cell)
        if _rail_mismatch(_rails(profile, pc), target):
            pc.coloring = _closest_coloring(profile, _coloring(pc), target)
            recolors += 1
    if recolors:
        log.debug(
            "row %d: aligned rails to %s/%s with %d recolor(s)",
            row.index,
            target[0].value,
            target[1].value,
            recolors,
        )
    return recolors


def _check_against_table(placement: Placement, t: Dplut) -> None:
    known = set(t.cells)
    for _, pc in placement.instances():
        if pc.cell not in known:
            raise InconsistentLibrary(
                f"instance {pc.instance!r} uses cell {pc.cell!r} absent from the table"
            )
        n = len(t.profile(pc.cell).colorings)
        if pc.coloring is None:
            log.warning("instance %r has no coloring; using 0", pc.instance)
            pc.coloring = 0
        elif not 0 <= pc.coloring < n:
            raise PlacementError(
                f"instance {pc.instance!r}: coloring {pc.coloring} out of range "
                f"for cell {pc.cell!r} ({n} colorings)"
            )


def legalize_row(
    row: Row, t: Dplut, s_dp: float, mode: Mode, limit: float | None = None
) -> RowStats:
    before = count_conflicts(row, t)
    stats = RowStats(row.index, conflicts_before=before, conflicts_after=0)
    if stats.conflicts_before == 0:
        return stats

    snapshot = copy.deepcopy(row.cells)
    stats.pg_feasible = _pg_feasible(row, t)
    if stats.pg_feasible:
        stats.recolors = align_rails(row, t)
    stats.flips = flip_pass(row, t)
    stats.spread = spread_pass(row, t, s_dp, mode, limit)
    stats.conflicts_after = count_conflicts(row, t)

    changed = stats.flips or stats.recolors or stats.spread
    if stats.conflicts_after > stats.conflicts_before or (
        changed and stats.conflicts_after == stats.conflicts_before
    ):
        log.info(
            "row %d: edits left conflicts at %d -> %d; restoring input",
            row.index,
            stats.conflicts_before,
            stats.conflicts_after,
        )
        row.cells = snapshot
        stats = RowStats(
            row.index,
            conflicts_before=stats.conflicts_before,
            conflicts_after=stats.conflicts_before,
            pg_feasible=stats.pg_feasible,
            rolled_back=True,
        )
    return stats


def legalize(
    placement: Placement, t: Dplut, mode: Mode = Mode.UB, s_dp: float | None = None
) -> LegalizeReport:
    """Legalize ``placement`` in place and report before/after metrics."""
    s_dp = t.s_dp if s_dp is None else s_dp
    cells = {name: t.profile(name).cell for name in t.cells}
    _check_against_table(placement, t)
    placement.validate(cells)

    area_before = layout_area(placement, cells)
    hpwl_before = hpwl(placement, cells)
    right_edge = layout_extent(placement, cells)[1]

    stats: list[RowStats] = []
    for row in placement.rows:
        limit = None
        if mode is Mode.B:
            cap = row.capacity if row.capacity is not None else math.inf
            limit = min(cap, right_edge)
        stats.append(legalize_row(row, t, s_dp, mode, limit))
        ext = row.extent(cells)
        if mode is Mode.UB and ext is not None and row.capacity is not None:
            if ext[1] > row.capacity:
                log.debug(
                    "row %d: capacity grown %g -> %g",
                    row.index,
                    row.capacity,
                    ext[1],
                )
                row.capacity = ext[1]

    unresolved = [
        (row.index, left.instance, right.instance)
        for row in placement.rows
        for left, right in conflicting_neighbours(row, t, s_dp)
    ]
    report = LegalizeReport(
        mode=mode,
        conflicts_before=sum(s.conflicts_before for s in stats),
        conflicts_after=sum(s.conflicts_after for s in stats),
        area_before=area_before,
        area_after=layout_area(placement, cells),
        hpwl_before=hpwl_before,
        hpwl_after=hpwl(placement, cells),
        flips=sum(s.flips for s in stats),
        recolors=sum(s.recolors for s in stats),
        total_spread=sum(s.spread for s in stats),
        unsolvable_pg_rows=[s.index for s in stats if not s.pg_feasible],
        unresolved=unresolved,
        rows=stats,
    )
    log.info(
        "Legalized %d row(s) in %s mode: conflicts %d -> %d, %d flip(s), spread %g",
        len(placement.rows),
        mode.value,
        report.conflicts_before,
        report.conflicts_after,
        report.flips,
        report.total_spread,
    )
    return report


@dataclass(frozen=True)
class Violation:
    """One pattern-level spacing or rail violation found by the audit."""

    row: int
    first: tuple[str, str]
    second: tuple[str, str]
    clearance: float
    kind: str = "spacing"

    def __str__(self) -> str:
        (ia, pa), (ib, pb) = self.first, self.second
        return (
            f"row {self.row}: {self.kind} {ia}/{pa} - {ib}/{pb} "
            f"(clearance {self.clearance:g})"
        )


def _flatten(
    row: Row, cells: Mapping[str, Cell], s_dp: float, cache: dict[str, list]
) -> list[tuple[str, Pattern, Mask]]:
    flat = []
    for pc in row.cells:
        master = cells[pc.cell]
        if pc.cell not in cache:
            cache[pc.cell] = colorings_for(master, s_dp)
        colors = cache[pc.cell][_coloring(pc)]
        placed = master if pc.orient is Orientation.R0 else mirror_cell(master)
        for p in placed.patterns:
            flat.append((pc.instance, p.shifted(pc.x, row.y), colors.color(p.id)))
    return flat


def audit_placement(
    placement: Placement, cells: Mapping[str, Cell], s_dp: float
) -> list[Violation]:
    """Every same-color pattern pair closer than ``s_dp``, re-derived from geometry.

    Rails of one row form a single net per rail kind: consecutive rail-bearing
    cells must agree on its color, and rail rects of different cells are not
    compared with each other.
    """
    cache: dict[str, list] = {}
    found: list[Violation] = []
    for row in placement.rows:
        flat = _flatten(row, cells, s_dp, cache)

        last_rail: dict[str, tuple[str, str, Mask]] = {}
        for inst, p, mask in flat:
            if not p.net.is_rail:
                continue
            prev = last_rail.get(p.net.value)
            if prev is not None and prev[0] != inst and prev[2] is not mask:
                found.append(Violation(row.index, prev[:2], (inst, p.id), 0.0, "rail"))
            last_rail[p.net.value] = (inst, p.id, mask)

        ordered = sorted(flat, key=lambda f: (f[1].x_lo, f[0], f[1].id))
        for i, (inst_a, a, mask_a) in enumerate(ordered):
            for inst_b, b, mask_b in ordered[i + 1 :]:
                if b.x_lo >= a.x_hi + s_dp:
                    break
                if mask_a is not mask_b:
                    continue
                if a.net.is_rail and b.net.is_rail and inst_a != inst_b:
                    continue
                d = pattern_clearance(a, b)
                if d < s_dp:
                    first, second = sorted([(inst_a, a.id), (inst_b, b.id)])
                    found.append(Violation(row.index, first, second, d))
    return found


def conflicting_pairs(
    violations: list[Violation], placement: Placement
) -> list[tuple[int, str, str]]:
    """Collapse violations to (row, left instance, right instance) keys in row order."""
    position = {
        pc.instance: (row.index, i)
        for row in placement.rows
        for i, pc in enumerate(row.cells)
    }
    keys = set()
    for v in violations:
        a, b = sorted((v.first[0], v.second[0]), key=lambda inst: position[inst])
        keys.add((v.row, a, b))
    return sorted(keys, key=lambda k: (k[0], position[k[1]][1], position[k[2]][1]))
