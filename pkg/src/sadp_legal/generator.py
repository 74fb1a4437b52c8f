# Copyright (c) 2026 sadp-legal contributors. MIT License; see LICENSE for details.

"""Seeded synthetic benchmarks: a decomposable cell library and a placed netlist.

Cells are built from unit-width vertical signal bars between a ground rail at
the bottom and a power rail at the top.  A bar reaching close to a rail
conflicts with it, neighbouring bars two columns apart conflict with each
other, and the PG type of a cell follows from which bars touch which rail.
Random cells are drawn until they are decomposable and have the requested PG
type.

Rows are filled to the requested utilization.  Cells are packed in clusters of
abutting instances separated by whitespace, with a little whitespace left at
the end of each row, and start with colorings whose rails agree along the row.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

from .cell_profile import PgType, classify_pg
from .coloring import ColoringCandidate, Mask, colorings_for
from .config import Params
from .dplut import Orientation
from .errors import GeneratorError, NotDecomposable, TooManyComponents
from .formats import Library
from .geometry import Cell, Net, Pattern, Pin, Rect
from .placement import Netlist, PlacedCell, Placement, Row

log = logging.getLogger(__name__)

DEFAULT_PG_MIX: dict[PgType, float] = {PgType.SAME: 0.5, PgType.FREE: 0.5}

_PG_KEYS = {"same": PgType.SAME, "diff": PgType.DIFF, "free": PgType.FREE}
_MAX_ATTEMPTS = 2000


def parse_pg_mix(text: str) -> dict[PgType, float]:
    """Parse ``same=0.5,free=0.5`` style PG-type weights."""
    mix: dict[PgType, float] = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        key, sep, value = item.partition("=")
        if not sep or key.strip().lower() not in _PG_KEYS:
            raise GeneratorError(f"bad pg-mix item {item!r}; expected same|diff|free=W")
        try:
            mix[_PG_KEYS[key.strip().lower()]] = float(value)
        except ValueError:
            raise GeneratorError(f"bad pg-mix weight {value!r}") from None
    return mix


@dataclass(frozen=True)
class GeneratorConfig:
    cells: int = 1000
    rows: int = 20
    util: float = 0.7
    seed: int = 1
    lib_cells: int = 24
    pg_mix: Mapping[PgType, float] = field(default_factory=lambda: dict(DEFAULT_PG_MIX))
    height: float | None = None

    def __post_init__(self) -> None:
        if not 0 < self.util <= 1:
            raise GeneratorError(f"utilization must be in (0, 1], got {self.util}")
        if self.rows < 1 or self.cells < self.rows:
            raise GeneratorError(
                f"need at least one row and one cell per row "
                f"(cells={self.cells}, rows={self.rows})"
            )
        if self.lib_cells < 1:
            raise GeneratorError(f"lib_cells must be >= 1, got {self.lib_cells}")
        weights = list(self.pg_mix.values())
        if not weights or any(w < 0 for w in weights) or sum(weights) <= 0:
            raise GeneratorError(
                f"pg-mix weights must be >= 0 with a positive sum: {self.pg_mix}"
            )


class _BarShapes:
    """Vertical extents of signal bars for one rail spacing rule."""

    def __init__(self, s_dp: float, height: float | None) -> None:
        if s_dp <= 1:
            raise GeneratorError(f"generator needs s_dp > 1, got {s_dp}")
        self.far = math.ceil(s_dp)
        self.height = height if height is not None else 2 * (1 + self.far) + 4
        h, far = self.height, self.far
        if h - 1 - far - (1 + far) < 2:
            raise GeneratorError(f"cell height {h} too small for s_dp {s_dp}")
        self.extents = {
            "full": (2, h - 2),
            "top": (1 + far, h - 2),
            "bottom": (2, h - 1 - far),
            "mid": (1 + far, h - 1 - far),
        }

    def spacings(self) -> tuple[int, ...]:
        # 2 columns apart conflicts, 1 + far apart does not.
        return (2, 2, 1 + self.far, 2 + self.far)


def _random_cell(
    rng: np.random.Generator, name: str, shapes: _BarShapes, pg: PgType
) -> Cell:
    far = shapes.far
    kinds = {
        PgType.SAME: ["full", "mid", "mid", "top", "bottom"],
        PgType.DIFF: ["top", "bottom", "mid", "mid"],
        PgType.FREE: ["mid", "mid", "mid", "top", "bottom"],
    }[pg]
    n_bars = int(rng.integers(2, 6))
    left = int(rng.choice([0, 0, 1, 1, 2, far + 1]))
    right = int(rng.choice([0, 0, 1, 1, 2, far + 1]))
    spacings = shapes.spacings()
    columns = [left]
    for _ in range(n_bars - 1):
        columns.append(columns[-1] + int(rng.choice(spacings)))
    width = columns[-1] + 1 + right
    h = shapes.height

    patterns = [
        Pattern("gnd", (Rect(0, 0, width, 1),), Net.GROUND),
        Pattern("vdd", (Rect(0, h - 1, width, h),), Net.POWER),
    ]
    pins = []
    for i, col in enumerate(columns):
        y_lo, y_hi = shapes.extents[str(rng.choice(kinds))]
        rects = [Rect(col, y_lo, col + 1, y_hi)]
        # Occasional stub toward the next bar gives L-shaped patterns.
        if i + 1 < len(columns) and columns[i + 1] - col > 2 and rng.random() < 0.25:
            mid = (y_lo + y_hi) // 2
            rects.append(Rect(col + 1, mid, col + 2, mid + 1))
        patterns.append(Pattern(f"s{i}", tuple(rects)))
        if len(pins) < 3:
            pins.append(Pin("ABY"[len(pins)], col + 0.5, h / 2))
    return Cell(name, float(width), float(h), tuple(patterns), tuple(pins))


def generate_cell(
    rng: np.random.Generator,
    name: str,
    pg: PgType,
    s_dp: float,
    height: float | None = None,
) -> Cell:
    """Draw random cells until one is decomposable with PG type ``pg``."""
    shapes = _BarShapes(s_dp, height)
    for _ in range(_MAX_ATTEMPTS):
        cell = _random_cell(rng, name, shapes, pg)
        try:
            colorings = colorings_for(cell, s_dp)
        except (NotDecomposable, TooManyComponents):
            continue
        if classify_pg(cell, colorings) is pg:
            return cell
    raise GeneratorError(
        f"could not draw a {pg.value} cell in {_MAX_ATTEMPTS} attempts"
    )


def generate_library(
    rng: np.random.Generator,
    n_cells: int,
    params: Params,
    pg_mix: Mapping[PgType, float] | None = None,
    height: float | None = None,
) -> Library:
    mix = dict(pg_mix or DEFAULT_PG_MIX)
    kinds = sorted(mix, key=lambda k: k.value)
    weights = np.array([mix[k] for k in kinds], dtype=np.float64)
    weights /= weights.sum()
    cells = []
    for i in range(n_cells):
        pg = kinds[int(rng.choice(len(kinds), p=weights))]
        cells.append(generate_cell(rng, f"CELL{i:02d}", pg, params.s_dp, height))
    return Library(tuple(cells), params)


def _rail_target(pgs: set[PgType]) -> tuple[Mask, Mask]:
    if PgType.DIFF in pgs and PgType.SAME not in pgs:
        return (Mask.MANDREL, Mask.TRIM)
    return (Mask.MANDREL, Mask.MANDREL)


def _pick_coloring(
    rng: np.random.Generator,
    cell: Cell,
    colorings: list[ColoringCandidate],
    target: tuple[Mask, Mask],
) -> int:
    power, ground = cell.power, cell.ground
    matching = [
        i
        for i, c in enumerate(colorings)
        if (power is None or c.color(power.id) is target[0])
        and (ground is None or c.color(ground.id) is target[1])
    ]
    pool = matching or list(range(len(colorings)))
    return int(rng.choice(pool))


def _split(rng: np.random.Generator, total: int, parts: int) -> list[int]:
    """Random non-negative integers summing to ``total``."""
    if parts <= 0:
        return []
    cuts = np.sort(rng.integers(0, total + 1, size=parts - 1))
    bounds = np.concatenate(([0], cuts, [total]))
    return [int(v) for v in np.diff(bounds)]


def generate_placement(
    rng: np.random.Generator, library: Library, config: GeneratorConfig
) -> Placement:
    cells = library.cells
    colorings = {c.name: colorings_for(c, library.params.s_dp) for c in cells}
    chosen = rng.integers(0, len(cells), size=config.cells)

    # Balance total width across rows, largest first.
    order = sorted(range(config.cells), key=lambda i: (-cells[chosen[i]].width, i))
    loads = [0.0] * config.rows
    members: list[list[int]] = [[] for _ in range(config.rows)]
    for i in order:
        r = min(range(config.rows), key=lambda k: (loads[k], k))
        members[r].append(i)
        loads[r] += cells[chosen[i]].width
    capacity = float(math.ceil(max(loads) / config.util))

    rows = []
    serial = 0
    for r, idx in enumerate(members):
        rng.shuffle(idx)
        masters = [cells[chosen[i]] for i in idx]
        target = _rail_target(
            {classify_pg(m, colorings[m.name]) for m in masters}
        )
        whitespace = int(capacity - loads[r])
        trailing = int(rng.integers(0, max(1, whitespace // 20) + 1))
        sizes = []
        remaining = len(masters)
        while remaining:
            size = min(remaining, int(rng.integers(2, 7)))
            sizes.append(size)
            remaining -= size
        gaps = _split(rng, whitespace - trailing, len(sizes))

        x = 0.0
        placed = []
        k = 0
        for size, gap in zip(sizes, gaps):
            x += gap
            for master in masters[k : k + size]:
                flip = rng.random() < 0.5
                coloring = _pick_coloring(rng, master, colorings[master.name], target)
                placed.append(
                    PlacedCell(
                        instance=f"u{serial}",
                        cell=master.name,
                        x=x,
                        orient=Orientation.MY if flip else Orientation.R0,
                        coloring=coloring,
                    )
                )
                serial += 1
                x += master.width
            k += size
        y = r * library.row_height
        rows.append(Row(index=r, y=y, cells=placed, capacity=capacity))

    placement = Placement(rows=rows, row_height=library.row_height)
    placement.netlist = _random_netlist(rng, placement, library)
    return placement


def _random_netlist(
    rng: np.random.Generator, placement: Placement, library: Library
) -> Netlist:
    """Nets of 2-4 pins among instances close in row-major order."""
    flat = [pc for row in placement.rows for pc in row.cells]
    n = len(flat)
    nets: dict[str, list[tuple[str, str]]] = {}
    if n < 2:
        return Netlist(nets)
    window = max(2, n // len(placement.rows))
    for k in range(max(1, n // 2)):
        driver = int(rng.integers(0, n))
        degree = int(rng.integers(2, 5))
        lo, hi = max(0, driver - window), min(n, driver + window + 1)
        size = min(degree - 1, hi - lo)
        sinks = rng.choice(np.arange(lo, hi), size=size, replace=False)
        members = [driver, *(int(s) for s in sinks if s != driver)]
        pins = []
        for m in members:
            pc = flat[m]
            master_pins = library.cell(pc.cell).pins
            pick = master_pins[int(rng.integers(0, len(master_pins)))]
            pins.append((pc.instance, pick.name))
        nets[f"n{k}"] = pins
    return Netlist(nets)


def generate(
    config: GeneratorConfig, params: Params | None = None
) -> tuple[Library, Placement]:
    """Deterministic library + placement for ``config.seed``."""
    params = params or Params()
    rng = np.random.default_rng(config.seed)
    library = generate_library(
        rng, config.lib_cells, params, config.pg_mix, config.height
    )
    placement = generate_placement(rng, library, config)
    log.info(
        "Generated %d cell(s) in %d row(s) from a %d-cell library (seed %d)",
        len(placement),
        len(placement.rows),
        len(library.cells),
        config.seed,
    )
    return library, placement
