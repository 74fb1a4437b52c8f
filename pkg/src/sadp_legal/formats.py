# Copyright (c) 2026 sadp-legal contributors. MIT License; see LICENSE for details.

"""YAML documents: library, placement, decomposability table and report.

Every document starts with ``format`` and ``version`` keys.  Loading errors,
syntax and schema alike, are reported as :class:`ParseError` with the 1-based
line and column of the offending node.  Dumps use a fixed key order so the
same object always serializes to the same bytes.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any

import yaml

from .cell_profile import CellProfile, profile_library, resolve_s_b_min
from .coloring import colorings_for
from .config import Params, load_params
from .dplut import Dplut, Orientation, SolutionCandidate, build_dplut, library_hash
from .errors import (
    InconsistentLibrary,
    InvalidGeometry,
    ParseError,
    StaleTable,
    UnknownCell,
)
from .geometry import Cell, Net, Pattern, Pin, Rect, rail_extents
from .legalizer import LegalizeReport, Mode, RowStats
from .placement import Netlist, PlacedCell, Placement, Row

log = logging.getLogger(__name__)

VERSION = 1
LIBRARY_FORMAT = "sadp-library"
PLACEMENT_FORMAT = "sadp-placement"
TABLE_FORMAT = "sadp-dplut"
REPORT_FORMAT = "sadp-report"


class _Mapping(dict):
    """A loaded mapping that remembers where it started."""

    mark: yaml.Mark | None = None


class _Loader(yaml.SafeLoader):
    pass


def _construct_mapping(loader: _Loader, node: yaml.MappingNode) -> _Mapping:
    loader.flatten_mapping(node)
    data = _Mapping(loader.construct_pairs(node, deep=True))
    data.mark = node.start_mark
    return data


_Loader.add_constructor(
    yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping
)


class _Doc:
    """Schema helpers bound to one source path."""

    def __init__(self, path: str | Path | None) -> None:
        self.path = path

    def error(self, message: str, node: Any = None) -> ParseError:
        mark = getattr(node, "mark", None)
        if mark is None:
            return ParseError(message, self.path)
        return ParseError(message, self.path, mark.line + 1, mark.column + 1)

    def load(self, text: str, kind: str) -> _Mapping:
        try:
            data = yaml.load(text, Loader=_Loader)  # noqa: S506 - safe loader subclass
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            raise ParseError(
                str(getattr(e, "problem", None) or e),
                self.path,
                mark.line + 1 if mark else None,
                mark.column + 1 if mark else None,
            ) from None
        if not isinstance(data, _Mapping):
            raise self.error(f"{kind} document must be a mapping")
        fmt = data.get("format")
        if fmt != kind:
            raise self.error(f"expected format {kind!r}, got {fmt!r}", data)
        if data.get("version") != VERSION:
            raise self.error(
                f"unsupported {kind} version {data.get('version')!r}", data
            )
        return data

    def get(
        self,
        node: Mapping,
        key: str,
        kind: type | tuple[type, ...],
        default: Any = ...,
    ) -> Any:
        if key not in node:
            if default is ...:
                raise self.error(f"missing key {key!r}", node)
            return default
        value = node[key]
        if isinstance(value, bool) and bool not in _as_tuple(kind):
            raise self.error(f"{key!r} must be {_describe(kind)}, got {value!r}", node)
        if not isinstance(value, kind):
            raise self.error(f"{key!r} must be {_describe(kind)}, got {value!r}", node)
        return value

    def number(self, node: Mapping, key: str, default: Any = ...) -> Any:
        value = self.get(node, key, (int, float), default)
        return value if value is None or value is default else float(value)

    def mapping(self, value: Any, what: str, parent: Any) -> _Mapping:
        if not isinstance(value, _Mapping):
            raise self.error(f"{what} must be a mapping", parent)
        return value


def _as_tuple(kind: type | tuple[type, ...]) -> tuple[type, ...]:
    return kind if isinstance(kind, tuple) else (kind,)


def _describe(kind: type | tuple[type, ...]) -> str:
    return " or ".join(k.__name__ for k in _as_tuple(kind))


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _num(value: float) -> float | int:
    """Integral floats dump as ints; infinities stay float."""
    if isinstance(value, float) and math.isfinite(value) and value.is_integer():
        return int(value)
    return value


def _dump(data: Mapping[str, Any]) -> str:
    return yaml.safe_dump(
        data, sort_keys=False, default_flow_style=None, width=100, allow_unicode=True
    )


# --------------------------------------------------------------------- library


@dataclass
class Library:
    cells: tuple[Cell, ...]
    params: Params = field(default_factory=Params)
    path: Path | None = None
    _counts: dict[str, int] = field(default_factory=dict, repr=False, compare=False)

    @cached_property
    def hash(self) -> str:
        return library_hash(self.cells)

    @cached_property
    def by_name(self) -> dict[str, Cell]:
        return {c.name: c for c in self.cells}

    def cell(self, name: str) -> Cell:
        try:
            return self.by_name[name]
        except KeyError:
            raise UnknownCell(name) from None

    @property
    def row_height(self) -> float:
        return self.cells[0].height if self.cells else 0.0

    @property
    def s_b_min(self) -> float:
        return resolve_s_b_min(self.cells, self.params.s_dp, self.params.s_b_min)

    def coloring_count(self, name: str) -> int:
        if name not in self._counts:
            self._counts[name] = len(colorings_for(self.cell(name), self.params.s_dp))
        return self._counts[name]

    def profiles(self) -> list[CellProfile]:
        return profile_library(self.cells, self.params.s_dp, self.params.s_b_min)

    def build_table(self, jobs: int | None = None) -> Dplut:
        return build_dplut(
            self.profiles(),
            s_dp=self.params.s_dp,
            w_spacer=self.params.w_spacer,
            s_b_min=self.s_b_min,
            lib_hash=self.hash,
            jobs=jobs or self.params.jobs,
        )


def _parse_pattern(doc: _Doc, node: Any, parent: Any) -> Pattern:
    node = doc.mapping(node, "pattern", parent)
    pid = doc.get(node, "id", (str, int))
    net_name = doc.get(node, "net", str, Net.SIGNAL.value)
    try:
        net = Net(net_name)
    except ValueError:
        raise doc.error(f"unknown net {net_name!r}", node) from None
    rects = []
    for raw in doc.get(node, "rects", list):
        if (
            not isinstance(raw, list)
            or len(raw) != 4
            or not all(_is_number(v) for v in raw)
        ):
            raise doc.error(
                f"pattern {pid!r}: rect must be [x_lo, y_lo, x_hi, y_hi]", node
            )
        try:
            rects.append(Rect(*(float(v) for v in raw)))
        except InvalidGeometry as e:
            raise doc.error(f"pattern {pid!r}: {e}", node) from None
    try:
        return Pattern(str(pid), tuple(rects), net)
    except InvalidGeometry as e:
        raise doc.error(str(e), node) from None


def _parse_cell(doc: _Doc, node: Any, parent: Any) -> Cell:
    node = doc.mapping(node, "cell", parent)
    name = doc.get(node, "name", str)
    patterns = tuple(
        _parse_pattern(doc, p, node) for p in doc.get(node, "patterns", list, [])
    )
    pins = []
    for raw in doc.get(node, "pins", list, []):
        pin = doc.mapping(raw, "pin", node)
        pin_name = str(doc.get(pin, "name", (str, int)))
        pins.append(Pin(pin_name, doc.number(pin, "x"), doc.number(pin, "y")))
    try:
        return Cell(
            name,
            doc.number(node, "width"),
            doc.number(node, "height"),
            patterns,
            tuple(pins),
        )
    except InvalidGeometry as e:
        raise doc.error(str(e), node) from None


def parse_library(
    text: str,
    path: str | Path | None = None,
    overrides: Mapping[str, Any] | None = None,
    env: Mapping[str, str] | None = None,
) -> Library:
    doc = _Doc(path)
    data = doc.load(text, LIBRARY_FORMAT)

    params = load_params(env=env)
    block = doc.get(data, "params", dict, {})
    try:
        params = params.merged(block).merged(overrides)
    except ValueError as e:
        raise doc.error(str(e), block or data) from None

    raw_cells = doc.get(data, "cells", list)
    cells = tuple(_parse_cell(doc, c, data) for c in raw_cells)
    names = [c.name for c in cells]
    if len(set(names)) != len(names):
        dup = next(n for n in names if names.count(n) > 1)
        raise doc.error(f"duplicate cell {dup!r}", data)
    if len({c.height for c in cells}) > 1:
        raise InconsistentLibrary(
            f"{path or '<string>'}: multi-height library "
            f"({sorted({c.height for c in cells})})"
        )
    for c in cells:
        if c.power is None or c.ground is None:
            message = f"cell {c.name!r} lacks a power or ground rail"
            if params.rail_less == "error":
                raise InconsistentLibrary(message)
            log.warning("%s; accepted by the rail_less policy", message)
    for net in (Net.POWER, Net.GROUND):
        shapes = {
            c.name: ext for c in cells if (ext := rail_extents(c, net)) is not None
        }
        if len(set(shapes.values())) > 1:
            raise InconsistentLibrary(
                f"{path or '<string>'}: {net.value} rail y-extents differ "
                f"between cells ({_describe_extents(shapes)})"
            )

    log.info("Loaded library %s: %d cell(s)", path or "<string>", len(cells))
    return Library(cells, params, Path(path) if path is not None else None)


def _describe_extents(shapes: Mapping[str, tuple[tuple[float, float], ...]]) -> str:
    by_shape: dict[tuple[tuple[float, float], ...], str] = {}
    for name, ext in shapes.items():
        by_shape.setdefault(ext, name)
    return ", ".join(f"{name}: {list(ext)}" for ext, name in by_shape.items())


def load_library(
    path: str | Path,
    overrides: Mapping[str, Any] | None = None,
    env: Mapping[str, str] | None = None,
) -> Library:
    return parse_library(Path(path).read_text(), path, overrides, env)


def dump_library(library: Library) -> str:
    params: dict[str, Any] = {
        "s_dp": _num(library.params.s_dp),
        "w_spacer": _num(library.params.w_spacer),
    }
    if library.params.s_b_min is not None:
        params["s_b_min"] = _num(library.params.s_b_min)
    cells = []
    for c in library.cells:
        entry: dict[str, Any] = {
            "name": c.name,
            "width": _num(c.width),
            "height": _num(c.height),
            "patterns": [
                {
                    "id": p.id,
                    "net": p.net.value,
                    "rects": [[_num(v) for v in r.as_tuple()] for r in p.rects],
                }
                for p in c.patterns
            ],
        }
        if c.pins:
            entry["pins"] = [
                {"name": pin.name, "x": _num(pin.x), "y": _num(pin.y)} for pin in c.pins
            ]
        cells.append(entry)
    return _dump(
        {
            "format": LIBRARY_FORMAT,
            "version": VERSION,
            "units": "layout units, 1 = minimum feature width",
            "params": params,
            "cells": cells,
        }
    )


# ------------------------------------------------------------------- placement


def parse_placement(
    text: str, library: Library, path: str | Path | None = None
) -> Placement:
    doc = _Doc(path)
    data = doc.load(text, PLACEMENT_FORMAT)
    row_height = doc.number(data, "row_height", library.row_height)

    rows = []
    for i, raw in enumerate(doc.get(data, "rows", list)):
        node = doc.mapping(raw, "row", data)
        placed = []
        for raw_cell in doc.get(node, "cells", list, []):
            pc = doc.mapping(raw_cell, "placed cell", node)
            orient_name = doc.get(pc, "orient", str, Orientation.R0.value)
            try:
                orient = Orientation(orient_name)
            except ValueError:
                raise doc.error(f"unknown orientation {orient_name!r}", pc) from None
            coloring = doc.get(pc, "coloring", int, None)
            cell_name = doc.get(pc, "cell", str)
            if cell_name not in library.by_name:
                raise doc.error(f"unknown cell {cell_name!r}", pc)
            n = library.coloring_count(cell_name)
            if coloring is not None and not 0 <= coloring < n:
                raise doc.error(
                    f"coloring {coloring} out of range for {cell_name!r} ({n})", pc
                )
            placed.append(
                PlacedCell(
                    instance=str(doc.get(pc, "instance", (str, int))),
                    cell=cell_name,
                    x=doc.number(pc, "x"),
                    orient=orient,
                    coloring=coloring,
                )
            )
        placed.sort(key=lambda p: p.x)
        rows.append(
            Row(
                index=doc.get(node, "index", int, i),
                y=doc.number(node, "y", i * row_height),
                cells=placed,
                capacity=doc.number(node, "capacity", None),
            )
        )

    nets: dict[str, list[tuple[str, str]]] = {}
    raw_nets = doc.get(data, "nets", dict, {})
    for name, pins in raw_nets.items():
        if not isinstance(pins, list) or not all(
            isinstance(p, list) and len(p) == 2 for p in pins
        ):
            raise doc.error(f"net {name!r} must list [instance, pin] pairs", raw_nets)
        nets[str(name)] = [(str(inst), str(pin)) for inst, pin in pins]

    placement = Placement(
        rows=rows,
        row_height=row_height,
        netlist=Netlist(nets),
        library=doc.get(data, "library", str, None),
    )
    placement.validate(library.by_name)
    return placement


def load_placement(path: str | Path, library: Library) -> Placement:
    return parse_placement(Path(path).read_text(), library, path)


def dump_placement(placement: Placement) -> str:
    rows = []
    for row in placement.rows:
        entry: dict[str, Any] = {"index": row.index, "y": _num(row.y)}
        if row.capacity is not None:
            entry["capacity"] = _num(row.capacity)
        cells = []
        for pc in row.cells:
            rec: dict[str, Any] = {
                "instance": pc.instance,
                "cell": pc.cell,
                "x": _num(pc.x),
                "orient": pc.orient.value,
            }
            if pc.coloring is not None:
                rec["coloring"] = pc.coloring
            cells.append(rec)
        entry["cells"] = cells
        rows.append(entry)
    data: dict[str, Any] = {"format": PLACEMENT_FORMAT, "version": VERSION}
    if placement.library is not None:
        data["library"] = placement.library
    data["row_height"] = _num(placement.row_height)
    data["rows"] = rows
    data["nets"] = {
        name: [[inst, pin] for inst, pin in pins]
        for name, pins in placement.netlist.nets.items()
    }
    return _dump(data)


# ----------------------------------------------------------------------- table


def dump_table(t: Dplut) -> str:
    """Pairs that can never abut are left out of ``entries``."""
    entries = [
        [
            left,
            right,
            [
                [
                    c.orient_left.value,
                    c.orient_right.value,
                    c.coloring_left,
                    c.coloring_right,
                    _num(c.overlay),
                ]
                for c in t.entries[(left, right)]
            ],
        ]
        for left in t.cells
        for right in t.cells
        if t.entries[(left, right)]
    ]
    return _dump(
        {
            "format": TABLE_FORMAT,
            "version": VERSION,
            "library_hash": t.library_hash,
            "params": {
                "s_dp": _num(t.s_dp),
                "w_spacer": _num(t.w_spacer),
                "s_b_min": _num(t.s_b_min),
            },
            "cells": list(t.cells),
            "entries": entries,
        }
    )


def parse_table(
    text: str, library: Library, path: str | Path | None = None
) -> Dplut:
    doc = _Doc(path)
    data = doc.load(text, TABLE_FORMAT)
    stored_hash = doc.get(data, "library_hash", str)
    if stored_hash != library.hash:
        raise StaleTable(
            f"{path or '<string>'}: built for library {stored_hash[:16]}, "
            f"current library is {library.hash[:16]}"
        )
    params = doc.mapping(doc.get(data, "params", dict), "params", data)
    current = (library.params.s_dp, library.params.w_spacer, library.s_b_min)
    stored = (
        doc.number(params, "s_dp"),
        doc.number(params, "w_spacer"),
        doc.number(params, "s_b_min"),
    )
    if stored != current:
        raise StaleTable(
            f"{path or '<string>'}: built with s_dp/w_spacer/s_b_min {stored}, "
            f"current parameters are {current}"
        )

    cells = tuple(str(c) for c in doc.get(data, "cells", list))
    if set(cells) != set(library.by_name):
        raise InconsistentLibrary(
            f"{path or '<string>'}: table cells differ from library"
        )

    entries: dict[tuple[str, str], tuple[SolutionCandidate, ...]] = {
        (a, b): () for a in cells for b in cells
    }
    for raw in doc.get(data, "entries", list):
        try:
            left, right, cands = raw
            key = (str(left), str(right))
            parsed = tuple(
                SolutionCandidate(
                    Orientation(o_l), Orientation(o_r), int(c_l), int(c_r), float(ov)
                )
                for o_l, o_r, c_l, c_r, ov in cands
            )
        except (TypeError, ValueError):
            raise doc.error(f"malformed table entry {raw!r}", data) from None
        if key not in entries:
            raise doc.error(f"table entry for unknown cells {key}", data)
        entries[key] = parsed

    profiles = {p.name: p for p in library.profiles()}
    return Dplut(
        cells=cells,
        entries=entries,
        s_dp=stored[0],
        w_spacer=stored[1],
        s_b_min=stored[2],
        library_hash=stored_hash,
        profiles=profiles,
    )


def load_table(path: str | Path, library: Library) -> Dplut:
    t = parse_table(Path(path).read_text(), library, path)
    log.info("Loaded DPLUT %s: %d cells", path, len(t.cells))
    return t


# ---------------------------------------------------------------------- report

_REPORT_SCALARS: tuple[tuple[str, Callable[[Any], Any]], ...] = (
    ("conflicts_before", int),
    ("conflicts_after", int),
    ("area_before", float),
    ("area_after", float),
    ("hpwl_before", float),
    ("hpwl_after", float),
    ("flips", int),
    ("recolors", int),
    ("total_spread", float),
)


def dump_report(report: LegalizeReport) -> str:
    data: dict[str, Any] = {
        "format": REPORT_FORMAT,
        "version": VERSION,
        "mode": report.mode.value,
    }
    for key, _ in _REPORT_SCALARS:
        data[key] = _num(getattr(report, key))
    data["summary"] = {
        "conflicts_resolved_pct": round(report.resolved_pct, 2),
        "area_delta_pct": round(report.area_delta_pct, 2),
        "hpwl_delta_pct": round(report.hpwl_delta_pct, 2),
    }
    data["unsolvable_pg_rows"] = list(report.unsolvable_pg_rows)
    data["unresolved"] = [list(u) for u in report.unresolved]
    data["rows"] = [
        {
            "index": s.index,
            "conflicts_before": s.conflicts_before,
            "conflicts_after": s.conflicts_after,
            "flips": s.flips,
            "recolors": s.recolors,
            "spread": _num(s.spread),
            "pg_feasible": s.pg_feasible,
            "rolled_back": s.rolled_back,
        }
        for s in report.rows
    ]
    return _dump(data)


def parse_report(text: str, path: str | Path | None = None) -> LegalizeReport:
    doc = _Doc(path)
    data = doc.load(text, REPORT_FORMAT)
    try:
        mode = Mode(doc.get(data, "mode", str))
    except ValueError:
        raise doc.error(f"unknown mode {data['mode']!r}", data) from None
    values = {
        key: cast(doc.get(data, key, (int, float))) for key, cast in _REPORT_SCALARS
    }
    rows = []
    for raw in doc.get(data, "rows", list, []):
        node = doc.mapping(raw, "row", data)
        rows.append(
            RowStats(
                index=doc.get(node, "index", int),
                conflicts_before=doc.get(node, "conflicts_before", int),
                conflicts_after=doc.get(node, "conflicts_after", int),
                flips=doc.get(node, "flips", int, 0),
                recolors=doc.get(node, "recolors", int, 0),
                spread=doc.number(node, "spread", 0.0),
                pg_feasible=doc.get(node, "pg_feasible", bool, True),
                rolled_back=doc.get(node, "rolled_back", bool, False),
            )
        )
    return LegalizeReport(
        mode=mode,
        unsolvable_pg_rows=list(doc.get(data, "unsolvable_pg_rows", list, [])),
        unresolved=[
            (int(r), str(a), str(b))
            for r, a, b in doc.get(data, "unresolved", list, [])
        ],
        rows=rows,
        **values,
    )


def load_report(path: str | Path) -> LegalizeReport:
    return parse_report(Path(path).read_text(), path)


def write_document(path: str | Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    log.debug("Wrote %s (%d bytes)", path, len(text))
    return path


__all__ = [
    "Library",
    "dump_library",
    "dump_placement",
    "dump_report",
    "dump_table",
    "load_library",
    "load_placement",
    "load_report",
    "load_table",
    "parse_library",
    "parse_placement",
    "parse_report",
    "parse_table",
    "write_document",
]
