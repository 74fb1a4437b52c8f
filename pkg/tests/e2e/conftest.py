# Copyright (c) 2026 sadp-legal contributors. MIT License; see LICENSE for details.

from pathlib import Path

# Directory containing this conftest
E2E_DIR = Path(__file__).parent

SEEDS = tuple(range(1, 11))
MIN_CELLS = 1000


def pytest_configure(config):
    """Set default option values for the benchmark-scale suite."""
    # Only override values still at their built-in defaults
    if config.getoption("sadp_cache") == "sadp_cache":
        config.option.sadp_cache = str(E2E_DIR / "sadp_cache")

    if config.getoption("sadp_cells") < MIN_CELLS:
        config.option.sadp_cells = MIN_CELLS
