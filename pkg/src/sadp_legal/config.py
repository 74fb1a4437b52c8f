# Copyright (c) 2026 sadp-legal contributors. MIT License; see LICENSE for details.

"""Process parameters and their layered defaults.

Precedence, lowest first: built-in defaults, the YAML file named by
``$SADP_PARAMS``, the ``params:`` block of a library file, explicit overrides
(CLI flags).
"""

from __future__ import annotations

import logging
import os
from collections.abc import Mapping
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any

import yaml

from .errors import ParseError

log = logging.getLogger(__name__)

PARAMS_ENV = "SADP_PARAMS"

_RAIL_LESS_POLICIES = ("error", "warn")


@dataclass(frozen=True)
class Params:
    s_dp: float = 2.0
    w_spacer: float = 1.0
    s_b_min: float | None = None
    jobs: int = 1
    rail_less: str = "error"

    def __post_init__(self) -> None:
        if self.s_dp <= 0:
            raise ValueError(f"s_dp must be positive, got {self.s_dp}")
        if self.w_spacer < 0:
            raise ValueError(f"w_spacer must be non-negative, got {self.w_spacer}")
        if self.s_b_min is not None and self.s_b_min > self.s_dp:
            raise ValueError(
                f"s_b_min ({self.s_b_min}) must not exceed s_dp ({self.s_dp})"
            )
        if self.jobs < 1:
            raise ValueError(f"jobs must be >= 1, got {self.jobs}")
        if self.rail_less not in _RAIL_LESS_POLICIES:
            raise ValueError(
                f"rail_less must be one of {_RAIL_LESS_POLICIES}, "
                f"got {self.rail_less!r}"
            )

    def merged(
        self, overrides: Mapping[str, Any] | None = None, **kwargs: Any
    ) -> Params:
        """Return a copy with every non-None override applied."""
        known = {f.name for f in fields(self)}
        updates = {**(overrides or {}), **kwargs}
        unknown = set(updates) - known
        if unknown:
            raise ValueError(f"Unknown parameter(s): {sorted(unknown)}")
        return replace(self, **{k: v for k, v in updates.items() if v is not None})

    def as_dict(self) -> dict[str, Any]:
        return {"s_dp": self.s_dp, "w_spacer": self.w_spacer, "s_b_min": self.s_b_min}


def load_params(
    path: str | Path | None = None, env: Mapping[str, str] | None = None
) -> Params:
    """Defaults updated from an explicit parameter file or ``$SADP_PARAMS``."""
    env = os.environ if env is None else env
    source = path if path is not None else env.get(PARAMS_ENV)
    if not source:
        return Params()

    source = Path(source)
    try:
        data = yaml.safe_load(source.read_text()) or {}
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        raise ParseError(
            str(getattr(e, "problem", e)),
            source,
            mark.line + 1 if mark else None,
            mark.column + 1 if mark else None,
        ) from None
    if not isinstance(data, dict):
        raise ParseError("parameter file must hold a mapping", source)

    log.debug("Loaded parameters from %s: %s", source, data)
    try:
        return Params().merged(data)
    except ValueError as e:
        raise ParseError(str(e), source) from None
