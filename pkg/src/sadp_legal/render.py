# Copyright (c) 2026 sadp-legal contributors. MIT License; see LICENSE for details.

"""SVG rendering of colored placements: mandrel vs trim fills, cell outlines, rails."""

from __future__ import annotations

import logging
from collections.abc import Mapping
from dataclasses import dataclass

import drawsvg as draw

from .coloring import ColoringCandidate, Mask, colorings_for
from .dplut import Orientation
from .errors import MissingColoring
from .geometry import Cell, mirror_cell
from .legalizer import audit_placement
from .placement import PlacedCell, Placement, layout_extent

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Theme:
    background: str = "#ffffff"
    mandrel: str = "#d62728"
    trim: str = "#1f77b4"
    outline: str = "#555555"
    violation: str = "#ff7f0e"
    text: str = "#222222"
    font_family: str = "monospace"


DEFAULT_THEME = Theme()


class LayoutRenderer:
    """Draws one placement; ``scale`` is pixels per layout unit."""

    def __init__(
        self,
        cells: Mapping[str, Cell],
        s_dp: float,
        scale: float = 10.0,
        margin: float = 2.0,
        theme: Theme | None = None,
    ) -> None:
        self.cells = cells
        self.s_dp = s_dp
        self.scale = scale
        self.margin = margin
        self.theme = theme or DEFAULT_THEME
        self._colorings: dict[str, list[ColoringCandidate]] = {}
        self._x0 = 0.0
        self._top = 0.0

    def _coloring(self, cell: str, index: int) -> ColoringCandidate:
        if cell not in self._colorings:
            self._colorings[cell] = colorings_for(self.cells[cell], self.s_dp)
        return self._colorings[cell][index]

    def render(self, placement: Placement, annotate: bool = False) -> draw.Drawing:
        x_lo, x_hi = layout_extent(placement, self.cells)
        y_hi = max((r.y + placement.row_height for r in placement.rows), default=0.0)
        width = (x_hi - x_lo + 2 * self.margin) * self.scale
        height = (y_hi + 2 * self.margin) * self.scale
        self._x0 = x_lo - self.margin
        self._top = y_hi + self.margin

        d = draw.Drawing(width, height)
        d.append(draw.Rectangle(0, 0, width, height, fill=self.theme.background))
        for row in placement.rows:
            for pc in row.cells:
                if pc.coloring is None:
                    raise MissingColoring(
                        f"instance {pc.instance!r} has no coloring index"
                    )
                master = self.cells[pc.cell]
                shape = master if pc.orient is Orientation.R0 else mirror_cell(master)
                colors = self._coloring(pc.cell, pc.coloring)
                group = draw.Group(id=f"inst-{pc.instance}", class_="cell")
                for p in shape.patterns:
                    mask = colors.color(p.id)
                    for r in p.rects:
                        group.append(
                            self._rect(
                                pc.x + r.x_lo,
                                row.y + r.y_lo,
                                r.x_hi - r.x_lo,
                                r.y_hi - r.y_lo,
                                class_=mask.value,
                                fill=self._fill(mask),
                            )
                        )
                group.append(
                    self._rect(
                        pc.x,
                        row.y,
                        master.width,
                        master.height,
                        class_="outline",
                        fill="none",
                        stroke=self.theme.outline,
                        stroke_width=1,
                    )
                )
                if annotate:
                    group.append(self._label(pc, master, row.y))
                d.append(group)

        if annotate:
            self._annotate_violations(d, placement)
        return d

    def _fill(self, mask: Mask) -> str:
        return self.theme.mandrel if mask is Mask.MANDREL else self.theme.trim

    def _px(self, x: float) -> float:
        return round((x - self._x0) * self.scale, 6)

    def _py(self, y: float) -> float:
        return round((self._top - y) * self.scale, 6)

    def _rect(
        self, x: float, y: float, w: float, h: float, **kwargs: object
    ) -> draw.Rectangle:
        return draw.Rectangle(
            self._px(x),
            self._py(y + h),
            round(w * self.scale, 6),
            round(h * self.scale, 6),
            **kwargs,
        )

    def _label(self, pc: PlacedCell, master: Cell, y: float) -> draw.Text:
        return draw.Text(
            f"{pc.instance} {pc.orient.value}/{pc.coloring}",
            max(self.scale * 0.8, 6),
            self._px(pc.x + master.width / 2),
            self._py(y + master.height / 2),
            fill=self.theme.text,
            font_family=self.theme.font_family,
            text_anchor="middle",
            dominant_baseline="middle",
        )

    def _annotate_violations(self, d: draw.Drawing, placement: Placement) -> None:
        rows = {r.index: r for r in placement.rows}
        for v in audit_placement(placement, self.cells, self.s_dp):
            row = rows[v.row]
            xs = []
            for inst, _ in (v.first, v.second):
                pc = next(c for c in row.cells if c.instance == inst)
                xs.append(pc.x + self.cells[pc.cell].width / 2)
            d.append(
                draw.Line(
                    self._px(xs[0]),
                    self._py(row.y + placement.row_height / 2),
                    self._px(xs[1]),
                    self._py(row.y + placement.row_height / 2),
                    class_=f"violation-{v.kind}",
                    stroke=self.theme.violation,
                    stroke_width=2,
                )
            )


def render_svg(
    placement: Placement,
    cells: Mapping[str, Cell],
    s_dp: float,
    annotate: bool = False,
    scale: float = 10.0,
) -> str:
    svg = LayoutRenderer(cells, s_dp, scale=scale).render(placement, annotate).as_svg()
    log.debug("Rendered %d instance(s) to %d bytes of SVG", len(placement), len(svg))
    return svg
