# Copyright (c) 2026 sadp-legal contributors. MIT License; see LICENSE for details.

"""Decomposability look-up table (DPLUT).

For every ordered pair of library cells (first = left, second = right) and
each of the four orientation pairs, the table keeps the single coloring pair
that abuts without conflicts and has the least boundary overlay error.  An
entry with no candidates means the two cells can never abut.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from itertools import product

from .cell_profile import AbutType, CellProfile, FastPath, abut_fast_path, pg_compatible
from .coloring import Mask
from .errors import UnknownCell
from .geometry import (
    Cell,
    Net,
    Pattern,
    Side,
    near_boundary,
    pattern_clearance,
    side_distance,
)

log = logging.getLogger(__name__)


class Orientation(str, Enum):
    R0 = "R0"
    MY = "MY"

    @property
    def flipped(self) -> Orientation:
        return Orientation.MY if self is Orientation.R0 else Orientation.R0


ORIENTATION_PAIRS: tuple[tuple[Orientation, Orientation], ...] = (
    (Orientation.R0, Orientation.R0),
    (Orientation.R0, Orientation.MY),
    (Orientation.MY, Orientation.R0),
    (Orientation.MY, Orientation.MY),
)

CrossEdge = tuple[str, str]


@dataclass(frozen=True)
class SolutionCandidate:
    orient_left: Orientation
    orient_right: Orientation
    coloring_left: int
    coloring_right: int
    overlay: float

    @property
    def sort_key(self) -> tuple[float, int]:
        pair = (self.orient_left, self.orient_right)
        return (self.overlay, ORIENTATION_PAIRS.index(pair))

    def matches(
        self, o_left: Orientation, c_left: int, o_right: Orientation, c_right: int
    ) -> bool:
        return (
            self.orient_left is o_left
            and self.coloring_left == c_left
            and self.orient_right is o_right
            and self.coloring_right == c_right
        )


def oriented(profile: CellProfile, orient: Orientation) -> Cell:
    return profile.cell if orient is Orientation.R0 else profile.mirrored


def facing_side(orient: Orientation, side: Side) -> Side:
    """The unmirrored side of a cell that ends up on ``side`` in the row."""
    return side if orient is Orientation.R0 else side.opposite


def facing_abut(
    profile: CellProfile, orient: Orientation, side: Side
) -> AbutType:
    return profile.abut(facing_side(orient, side))


def facing_s_b(profile: CellProfile, orient: Orientation, side: Side) -> float:
    return profile.s_b(facing_side(orient, side))


def cross_edges(left: Cell, right: Cell, gap: float, s_dp: float) -> list[CrossEdge]:
    """Signal-pattern conflicts across the boundary of two oriented cells.

    ``right`` is placed at x = left.width + gap.  Rails are identified with
    their neighbours instead; see :func:`rail_edges` for rail-less cells.
    """
    offset = left.width + gap
    candidates_l = near_boundary(left, Side.RIGHT, s_dp - gap)
    candidates_r = [
        p.shifted(offset) for p in near_boundary(right, Side.LEFT, s_dp - gap)
    ]
    return sorted(
        (p.id, q.id)
        for p in candidates_l
        for q in candidates_r
        if pattern_clearance(p, q) < s_dp
    )


def rail_edges(left: Cell, right: Cell, gap: float, s_dp: float) -> list[CrossEdge]:
    """Rail-to-Signal conflicts where the Signal's cell does not carry that rail.

    A cell holding the same rail keeps its own Signals clear of it, which
    covers the neighbour's rail too as long as rail extents agree.
    """
    offset = left.width + gap
    edges = []
    for rail in (left.power, left.ground):
        if rail is None or _rail_of(right, rail.net) is not None:
            continue
        for q in near_boundary(right, Side.LEFT, s_dp - gap):
            if pattern_clearance(rail, q.shifted(offset)) < s_dp:
                edges.append((rail.id, q.id))
    for rail in (right.power, right.ground):
        if rail is None or _rail_of(left, rail.net) is not None:
            continue
        shifted = rail.shifted(offset)
        for p in near_boundary(left, Side.RIGHT, s_dp - gap):
            if pattern_clearance(p, shifted) < s_dp:
                edges.append((p.id, rail.id))
    return sorted(edges)


def _rail_of(c: Cell, net: Net) -> Pattern | None:
    return c.power if net is Net.POWER else c.ground


def _rail_links(left: Cell, right: Cell) -> list[CrossEdge]:
    links = []
    for lp, rp in ((left.power, right.power), (left.ground, right.ground)):
        if lp is not None and rp is not None:
            links.append((lp.id, rp.id))
    return links


def _group_colorings(
    profile: CellProfile, ids: Sequence[str]
) -> dict[tuple[Mask, ...], list[int]]:
    """Coloring indices grouped by their colors on ``ids``; indices ascending."""
    groups: dict[tuple[Mask, ...], list[int]] = {}
    for i, c in enumerate(profile.colorings):
        groups.setdefault(tuple(c.color(pid) for pid in ids), []).append(i)
    return groups


def _consistent(
    l_ids: Sequence[str],
    sig_l: Sequence[Mask],
    r_ids: Sequence[str],
    sig_r: Sequence[Mask],
    edges: Iterable[CrossEdge],
    links: Iterable[CrossEdge],
) -> bool:
    col_l = dict(zip(l_ids, sig_l))
    col_r = dict(zip(r_ids, sig_r))
    return all(col_l[a] is not col_r[b] for a, b in edges) and all(
        col_l[a] is col_r[b] for a, b in links
    )


def full_pair_check(
    left: CellProfile,
    o_left: Orientation,
    right: CellProfile,
    o_right: Orientation,
    gap: float,
    s_dp: float,
) -> list[tuple[int, int]]:
    """Every (left, right) coloring-index pair consistent with the merged graph.

    The merged graph holds both cells' internal edges (already honoured by
    each candidate), the cross-boundary edges at ``gap`` and the power/ground
    identification links.
    """
    if gap < 0:
        raise ValueError(f"gap must be non-negative, got {gap}")
    lc, rc = oriented(left, o_left), oriented(right, o_right)
    edges = cross_edges(lc, rc, gap, s_dp) + rail_edges(lc, rc, gap, s_dp)
    links = _rail_links(left.cell, right.cell)
    l_ids = sorted({a for a, _ in edges} | {a for a, _ in links})
    r_ids = sorted({b for _, b in edges} | {b for _, b in links})

    pairs: list[tuple[int, int]] = []
    groups_r = _group_colorings(right, r_ids)
    for sig_l, idx_l in _group_colorings(left, l_ids).items():
        for sig_r, idx_r in groups_r.items():
            if _consistent(l_ids, sig_l, r_ids, sig_r, edges, links):
                pairs.extend(product(idx_l, idx_r))
    return sorted(pairs)


def _merge(intervals: Iterable[tuple[float, float]]) -> list[tuple[float, float]]:
    merged: list[tuple[float, float]] = []
    for lo, hi in sorted(intervals):
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return merged


def _subtract(
    base: tuple[float, float], cuts: Iterable[tuple[float, float]]
) -> list[tuple[float, float]]:
    lo, hi = base
    out = []
    for c_lo, c_hi in _merge(cuts):
        if c_hi <= lo or c_lo >= hi:
            continue
        if c_lo > lo:
            out.append((lo, c_lo))
        lo = max(lo, c_hi)
    if lo < hi:
        out.append((lo, hi))
    return out


def _facing_edges(
    p: Pattern, outward: Side, boundary: float, s_dp: float
) -> list[tuple[float, tuple[float, float]]]:
    """Vertical edges of ``p`` facing ``outward`` that lie within s_dp of the boundary.

    Returns (x, (y_lo, y_hi)) segments with the parts hidden by another rect
    of the same pattern removed.
    """
    edges = []
    for r in p.rects:
        x = r.x_hi if outward is Side.RIGHT else r.x_lo
        if abs(boundary - x) >= s_dp:
            continue
        hidden = [
            (s.y_lo, s.y_hi)
            for s in p.rects
            if s is not r
            and (
                s.x_lo <= x < s.x_hi if outward is Side.RIGHT else s.x_lo < x <= s.x_hi
            )
        ]
        edges.extend((x, seg) for seg in _subtract((r.y_lo, r.y_hi), hidden))
    return edges


def overlay_error(
    left: CellProfile,
    o_left: Orientation,
    c_left: int,
    right: CellProfile,
    o_right: Orientation,
    c_right: int,
    s_dp: float,
    w_spacer: float,
) -> float:
    """Unprotected length of Trim edges facing the abutting boundary.

    An edge segment is protected where a Mandrel rect of either cell sits on
    its outward side no more than ``w_spacer`` away with overlapping
    y-projection.
    """
    lc = oriented(left, o_left)
    rc = oriented(right, o_right)
    boundary = lc.width
    placed = [
        (p, left.colorings[c_left].color(p.id)) for p in lc.patterns
    ] + [
        (p.shifted(boundary), right.colorings[c_right].color(p.id)) for p in rc.patterns
    ]
    mandrels = [r for p, m in placed if m is Mask.MANDREL for r in p.rects]

    total = 0.0
    for p, mask in placed:
        if mask is not Mask.TRIM or p.net.is_rail:
            continue
        outward = Side.RIGHT if p.x_hi <= boundary else Side.LEFT
        for x, (y_lo, y_hi) in _facing_edges(p, outward, boundary, s_dp):
            if outward is Side.RIGHT:
                covers = [
                    (m.y_lo, m.y_hi) for m in mandrels if 0 <= m.x_lo - x <= w_spacer
                ]
            else:
                covers = [
                    (m.y_lo, m.y_hi) for m in mandrels if 0 <= x - m.x_hi <= w_spacer
                ]
            total += sum(hi - lo for lo, hi in _subtract((y_lo, y_hi), covers))
    return total


def _overlay_ids(c: Cell, side: Side, reach: float) -> set[str]:
    return {
        p.id
        for p in c.patterns
        if p.net.is_rail or side_distance(p, c.width, side) < reach
    }


def best_candidate(
    left: CellProfile,
    o_left: Orientation,
    right: CellProfile,
    o_right: Orientation,
    s_dp: float,
    w_spacer: float,
) -> SolutionCandidate | None:
    """Minimum-overlay abutting solution for one orientation pair.

    Ties go to the smallest (left, right) coloring indices.
    """
    lc, rc = oriented(left, o_left), oriented(right, o_right)
    fast = abut_fast_path(
        facing_abut(left, o_left, Side.RIGHT), facing_abut(right, o_right, Side.LEFT)
    )
    safe = AbutType.SAFE in (
        facing_abut(left, o_left, Side.RIGHT),
        facing_abut(right, o_right, Side.LEFT),
    )
    # A Safe side guarantees no Signal cross edges at abutment.
    edges = [] if safe else cross_edges(lc, rc, 0, s_dp)
    edges += rail_edges(lc, rc, 0, s_dp)
    links = _rail_links(left.cell, right.cell)
    reach = s_dp + w_spacer
    l_ids = sorted(
        {a for a, _ in edges}
        | {a for a, _ in links}
        | _overlay_ids(lc, Side.RIGHT, reach)
    )
    r_ids = sorted(
        {b for _, b in edges}
        | {b for _, b in links}
        | _overlay_ids(rc, Side.LEFT, reach)
    )

    best: tuple[float, tuple[int, int]] | None = None
    groups_r = _group_colorings(right, r_ids)
    for sig_l, idx_l in _group_colorings(left, l_ids).items():
        for sig_r, idx_r in groups_r.items():
            if not _consistent(l_ids, sig_l, r_ids, sig_r, edges, links):
                continue
            pair = (idx_l[0], idx_r[0])
            ov = overlay_error(
                left, o_left, pair[0], right, o_right, pair[1], s_dp, w_spacer
            )
            if best is None or (ov, pair) < best:
                best = (ov, pair)

    if fast is FastPath.COMPATIBLE and best is None:
        # Only reachable with an s_b_min override above the library minimum.
        log.warning(
            "fast path claims %s(%s) | %s(%s) compatible but no coloring pair exists",
            left.name,
            o_left.value,
            right.name,
            o_right.value,
        )
    if best is None:
        return None
    overlay, (c_l, c_r) = best
    return SolutionCandidate(o_left, o_right, c_l, c_r, overlay)


def table_entry(
    left: CellProfile, right: CellProfile, s_dp: float, w_spacer: float
) -> tuple[SolutionCandidate, ...]:
    if not pg_compatible(left.pg, right.pg):
        return ()
    found = (
        best_candidate(left, o_l, right, o_r, s_dp, w_spacer)
        for o_l, o_r in ORIENTATION_PAIRS
    )
    return tuple(sorted((c for c in found if c is not None), key=lambda c: c.sort_key))


def library_hash(cells: Iterable[Cell]) -> str:
    """SHA-256 over the canonical geometry of a library, order-independent."""
    canon = [
        {
            "name": c.name,
            "width": float(c.width),
            "height": float(c.height),
            "patterns": [
                [p.id, p.net.value, [[float(v) for v in r.as_tuple()] for r in p.rects]]
                for p in c.patterns
            ],
            "pins": [[pin.name, float(pin.x), float(pin.y)] for pin in c.pins],
        }
        for c in sorted(cells, key=lambda c: c.name)
    ]
    blob = json.dumps(canon, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


@dataclass
class Dplut:
    cells: tuple[str, ...]
    entries: dict[tuple[str, str], tuple[SolutionCandidate, ...]]
    s_dp: float
    w_spacer: float
    s_b_min: float
    library_hash: str = ""
    profiles: dict[str, CellProfile] = field(
        default_factory=dict, repr=False, compare=False
    )

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def non_empty(self) -> int:
        return sum(1 for cands in self.entries.values() if cands)

    def query(self, left: str, right: str) -> list[SolutionCandidate]:
        try:
            return list(self.entries[(left, right)])
        except KeyError:
            missing = left if left not in self.cells else right
            raise UnknownCell(missing) from None

    def profile(self, name: str) -> CellProfile:
        try:
            return self.profiles[name]
        except KeyError:
            raise UnknownCell(name) from None


def query(t: Dplut, left: str, right: str) -> list[SolutionCandidate]:
    """Stored candidates, ascending overlay then R0R0, R0MY, MYR0, MYMY."""
    return t.query(left, right)


def _build_rows(
    profiles: Sequence[CellProfile], lefts: Sequence[int], s_dp: float, w_spacer: float
) -> list[tuple[int, list[tuple[SolutionCandidate, ...]]]]:
    return [
        (i, [table_entry(profiles[i], right, s_dp, w_spacer) for right in profiles])
        for i in lefts
    ]


def build_dplut(
    library: Sequence[CellProfile],
    s_dp: float,
    w_spacer: float,
    s_b_min: float,
    lib_hash: str | None = None,
    jobs: int = 1,
) -> Dplut:
    start = time.monotonic()
    profiles = list(library)
    names = tuple(p.name for p in profiles)
    if len(set(names)) != len(names):
        raise ValueError("library holds duplicate cell names")

    if jobs > 1 and len(profiles) > 1:
        chunks = [list(range(i, len(profiles), jobs)) for i in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(_build_rows, profiles, chunk, s_dp, w_spacer)
                for chunk in chunks
                if chunk
            ]
            rows = dict(r for f in futures for r in f.result())
    else:
        rows = dict(_build_rows(profiles, range(len(profiles)), s_dp, w_spacer))

    entries = {
        (names[i], names[j]): rows[i][j]
        for i in range(len(names))
        for j in range(len(names))
    }
    table = Dplut(
        cells=names,
        entries=entries,
        s_dp=s_dp,
        w_spacer=w_spacer,
        s_b_min=s_b_min,
        library_hash=lib_hash or library_hash(p.cell for p in profiles),
        profiles={p.name: p for p in profiles},
    )
    log.info(
        "Built DPLUT: %d cells, %d entries, %d non-empty in %.2fs",
        len(names),
        len(table),
        table.non_empty,
        time.monotonic() - start,
    )
    return table
