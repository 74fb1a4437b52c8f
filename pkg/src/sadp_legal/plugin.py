# Copyright (c) 2026 sadp-legal contributors. MIT License; see LICENSE for details.

import logging
import os
from pathlib import Path

import pytest

from .formats import dump_library, dump_placement, write_document
from .generator import GeneratorConfig, generate
from .session import LegalizeSession
from .table_cache import TableCache

logger = logging.getLogger(__name__)


def pytest_addoption(parser):
    group = parser.getgroup("sadp", "SADP legalization benchmark options")

    group.addoption(
        "--sadp-seed",
        type=int,
        default=int(os.environ.get("SADP_SEED", "1")),
        help="Benchmark generator seed (default: $SADP_SEED or 1)",
    )
    group.addoption(
        "--sadp-cells",
        type=int,
        default=1000,
        help="Placed instances in the generated benchmark (default: 1000)",
    )
    group.addoption(
        "--sadp-rows",
        type=int,
        default=20,
        help="Rows in the generated benchmark (default: 20)",
    )
    group.addoption(
        "--sadp-util",
        type=float,
        default=0.7,
        help="Row utilization of the generated benchmark (default: 0.7)",
    )
    group.addoption(
        "--sadp-lib-cells",
        type=int,
        default=24,
        help="Cells in the generated library (default: 24)",
    )
    group.addoption(
        "--sadp-cache",
        default=os.environ.get("SADP_CACHE", "sadp_cache"),
        help=(
            "Directory for tables and benchmarks "
            "(default: $SADP_CACHE or 'sadp_cache')"
        ),
    )


def _sanitise_name(node_id: str) -> str:
    """Convert a pytest node ID into a filesystem-safe directory name.

    Format: module__test_name (e.g., test_flow__TestUb_test_clean)
    """
    parts = node_id.split("::")
    module = Path(parts[0]).stem
    test_name = "_".join(parts[1:])
    for ch in "[]/\\ :":
        test_name = test_name.replace(ch, "_")
    return f"{module}__{test_name}"


def _generator_config(config) -> GeneratorConfig:
    return GeneratorConfig(
        cells=config.getoption("sadp_cells"),
        rows=config.getoption("sadp_rows"),
        util=config.getoption("sadp_util"),
        seed=config.getoption("sadp_seed"),
        lib_cells=config.getoption("sadp_lib_cells"),
    )


@pytest.fixture(scope="session")
def sadp_cache_dir(request):
    """Base directory for cached tables and generated benchmarks."""
    path = Path(request.config.getoption("sadp_cache"))
    path.mkdir(parents=True, exist_ok=True)
    return path


@pytest.fixture(scope="session")
def sadp_benchmark(request, sadp_cache_dir):
    """Generated (library, placement) pair, also written under the cache dir."""
    gen = _generator_config(request.config)
    library, placement = generate(gen)

    bench_dir = sadp_cache_dir / (
        f"bench_s{gen.seed}_c{gen.cells}_r{gen.rows}_u{gen.util:g}_l{gen.lib_cells}"
    )
    placement.library = "library.yaml"
    write_document(bench_dir / "library.yaml", dump_library(library))
    write_document(bench_dir / "placement.yaml", dump_placement(placement))
    library.path = bench_dir / "library.yaml"
    logger.debug("Benchmark written to %s", bench_dir)
    return library, placement


@pytest.fixture(scope="session")
def sadp_table(sadp_benchmark, sadp_cache_dir):
    """Decomposability table for the benchmark library, built once per cache."""
    library, _ = sadp_benchmark
    return TableCache(sadp_cache_dir / "tables").get(library)


@pytest.fixture(scope="function")
def legalize_session(request, sadp_benchmark, sadp_table, sadp_cache_dir):
    """Per-test fixture providing a LegalizeSession bound to a unique directory."""
    library, placement = sadp_benchmark
    test_dir = sadp_cache_dir / "runs" / _sanitise_name(request.node.nodeid)
    test_dir.mkdir(parents=True, exist_ok=True)

    yield LegalizeSession(
        library=library,
        placement=placement,
        table=sadp_table,
        directory=test_dir,
    )
