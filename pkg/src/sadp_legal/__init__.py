# Copyright (c) 2026 sadp-legal contributors. MIT License; see LICENSE for details.

from .config import Params
from .dplut import Dplut, build_dplut
from .formats import Library, load_library, load_placement
from .legalizer import LegalizeReport, Mode, audit_placement, legalize
from .session import LegalizeSession

try:
    from ._version import __version__
except ModuleNotFoundError:
    __version__ = "0.0.0.dev0+unknown"

__all__ = [
    "Dplut",
    "LegalizeReport",
    "LegalizeSession",
    "Library",
    "Mode",
    "Params",
    "__version__",
    "audit_placement",
    "build_dplut",
    "legalize",
    "load_library",
    "load_placement",
]
