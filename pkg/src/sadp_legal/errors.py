# Copyright (c) 2026 sadp-legal contributors. MIT License; see LICENSE for details.

"""Exception hierarchy shared by the library modules and the CLI."""

from __future__ import annotations

from pathlib import Path


class SadpError(Exception):
    """Base class for every error raised by sadp-legal."""


class InvalidGeometry(SadpError, ValueError):
    """A rect, pattern or cell violates its construction invariants."""


class EmptyCell(SadpError, ValueError):
    """Boundary clearance was requested for a cell without patterns."""


class NotDecomposable(SadpError, ValueError):
    """The conflict graph contains an odd cycle.

    ``cycle`` lists the pattern ids of the odd cycle in walk order.
    """

    def __init__(self, cycle: tuple[str, ...], cell: str | None = None) -> None:
        self.cycle = cycle
        self.cell = cell
        where = f" in cell {cell!r}" if cell else ""
        super().__init__(
            f"odd conflict cycle{where}: {' - '.join(cycle)} - {cycle[0]}"
        )


class TooManyComponents(SadpError, ValueError):
    """Coloring enumeration would exceed the per-cell component cap."""


class UnknownPattern(SadpError, KeyError):
    """A coloring references a pattern id that is not in the graph."""


class UnknownCell(SadpError, KeyError):
    """A cell name is not part of the library or table."""


class InconsistentLibrary(SadpError, ValueError):
    """Placement, table and library disagree."""


class StaleTable(SadpError, RuntimeError):
    """A serialized table was built from a different library."""


class PlacementError(SadpError, ValueError):
    """A placement is structurally invalid (overlaps, duplicates, dangling nets)."""


class MissingColoring(SadpError, ValueError):
    """An instance has no coloring index where one is required."""


class GeneratorError(SadpError, ValueError):
    """Synthetic benchmark parameters cannot be satisfied."""


class TableLockTimeout(SadpError, TimeoutError):
    """The table cache lock could not be acquired within the timeout."""


class ParseError(SadpError, ValueError):
    """A document could not be parsed; carries 1-based line/column when known."""

    def __init__(
        self,
        message: str,
        path: str | Path | None = None,
        line: int | None = None,
        column: int | None = None,
    ) -> None:
        self.path = str(path) if path is not None else None
        self.line = line
        self.column = column
        location = self.path or "<string>"
        if line is not None:
            location += f":{line}"
            if column is not None:
                location += f":{column}"
        super().__init__(f"{location}: {message}")


class TableBuildFailed(SadpError, RuntimeError):
    """An earlier process failed to build the cached table; see its marker."""
