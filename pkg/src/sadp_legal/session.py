# Copyright (c) 2026 sadp-legal contributors. MIT License; see LICENSE for details.

import logging
from dataclasses import dataclass, field
from pathlib import Path

from .dplut import Dplut
from .formats import Library, dump_placement, dump_report, write_document
from .legalizer import LegalizeReport, Mode, legalize
from .placement import Placement

logger = logging.getLogger(__name__)

_MANAGED_KEYS = frozenset({"table", "directory"})
_ALLOWED_KEYS = frozenset({"placement", "s_dp"})


@dataclass
class LegalizeSession:
    __test__ = False  # prevent pytest collection
    library: Library
    placement: Placement
    table: Dplut
    directory: Path
    mode: Mode = Mode.UB
    report: LegalizeReport | None = None
    result: Placement | None = None
    _has_run: bool = field(default=False, repr=False)

    def run(self, mode: Mode | str | None = None, **kwargs) -> LegalizeReport:
        """Legalize a copy of the benchmark placement and write both outputs.

        ``report.yaml`` and ``placement.yaml`` land in the session directory.
        """
        if self._has_run:
            raise RuntimeError("run() can only be called once per test")

        conflicts = _MANAGED_KEYS & kwargs.keys()
        if conflicts:
            raise ValueError(
                f"Cannot override fixture-managed keys: {conflicts}. "
                f"Use CLI options (--sadp-cache, --sadp-seed) to control them."
            )
        unknown = kwargs.keys() - _ALLOWED_KEYS
        if unknown:
            raise TypeError(f"Unexpected run() arguments: {sorted(unknown)}")

        self._has_run = True
        placement = kwargs.get("placement", self.placement).copy()
        run_mode = Mode(mode) if mode is not None else self.mode
        logger.debug(
            "LegalizeSession.run(): mode=%s s_dp=%s dir=%s",
            run_mode.value,
            kwargs.get("s_dp", self.table.s_dp),
            self.directory,
        )

        self.report = legalize(placement, self.table, run_mode, kwargs.get("s_dp"))
        self.result = placement
        write_document(self.directory / "report.yaml", dump_report(self.report))
        write_document(self.directory / "placement.yaml", dump_placement(placement))
        return self.report
