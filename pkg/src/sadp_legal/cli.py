# Copyright (c) 2026 sadp-legal contributors. MIT License; see LICENSE for details.

"""``sadp-legal`` command line: profile, dplut, legalize, render, gen, check, analyze.

Exit status is 0 on success, 1 when ``check`` finds violations and 2 on usage,
parse or library errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from collections.abc import Sequence
from dataclasses import asdict
from pathlib import Path
from typing import Any

import yaml

from . import __version__
from .analysis import bottleneck, library_friendliness, row_congestion
from .config import load_params
from .dplut import Dplut
from .errors import SadpError
from .formats import (
    Library,
    dump_library,
    dump_placement,
    dump_report,
    dump_table,
    load_library,
    load_placement,
    load_table,
    write_document,
)
from .generator import GeneratorConfig, generate, parse_pg_mix
from .legalizer import Mode, audit_placement, conflicting_pairs, legalize
from .render import render_svg
from .table_cache import TableCache

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_ERROR = 2


def _emit(text: str, output: str | None) -> None:
    if output:
        write_document(output, text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


class _Dumper(yaml.SafeDumper):
    pass


_Dumper.add_representer(tuple, yaml.SafeDumper.represent_list)


def _yaml(data: Any) -> str:
    return yaml.dump(data, Dumper=_Dumper, sort_keys=False, default_flow_style=None)


def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    return {
        "s_dp": args.s_dp,
        "w_spacer": args.w_spacer,
        "s_b_min": args.s_b_min,
        "rail_less": args.rail_less,
        "jobs": getattr(args, "jobs", None),
    }


def _library(args: argparse.Namespace) -> Library:
    return load_library(args.library, _overrides(args))


def _table(args: argparse.Namespace, library: Library) -> Dplut:
    if getattr(args, "table", None):
        return load_table(args.table, library)
    if getattr(args, "cache_dir", None):
        return TableCache(Path(args.cache_dir)).get(library)
    return library.build_table()


def cmd_profile(args: argparse.Namespace) -> int:
    library = _library(args)
    records = [
        {
            "name": p.name,
            "colorings": len(p.colorings),
            "pg": p.pg.value,
            "abut_left": p.abut_left.value,
            "abut_right": p.abut_right.value,
            "s_b_left": p.s_b_left,
            "s_b_right": p.s_b_right,
        }
        for p in library.profiles()
    ]
    _emit(_yaml(records), args.output)
    return EXIT_OK


def cmd_dplut(args: argparse.Namespace) -> int:
    library = _library(args)
    start = time.monotonic()
    table = library.build_table(args.jobs)
    elapsed = time.monotonic() - start
    write_document(args.output, dump_table(table))
    print(f"cells: {len(table.cells)}")
    print(f"entries: {len(table)}")
    print(f"non_empty: {table.non_empty}")
    print(f"build_time: {elapsed:.2f}s")
    return EXIT_OK


def cmd_legalize(args: argparse.Namespace) -> int:
    library = _library(args)
    placement = load_placement(args.placement, library)
    table = _table(args, library)
    start = time.monotonic()
    report = legalize(placement, table, Mode(args.mode))
    log.info("Legalization took %.2fs", time.monotonic() - start)
    write_document(args.output, dump_report(report))
    if args.out_placement:
        write_document(args.out_placement, dump_placement(placement))
    print(report.summary())
    return EXIT_OK


def cmd_render(args: argparse.Namespace) -> int:
    library = _library(args)
    placement = load_placement(args.placement, library)
    svg = render_svg(
        placement, library.by_name, library.params.s_dp, annotate=args.annotate
    )
    write_document(args.output, svg)
    return EXIT_OK


def cmd_gen(args: argparse.Namespace) -> int:
    config = GeneratorConfig(
        cells=args.cells,
        rows=args.rows,
        util=args.util,
        seed=args.seed,
        lib_cells=args.lib_cells,
        pg_mix=parse_pg_mix(args.pg_mix) if args.pg_mix else GeneratorConfig().pg_mix,
    )
    base = load_params().merged(_overrides(args))
    library, placement = generate(config, base)
    placement.library = "library.yaml"
    out = Path(args.output)
    write_document(out / "library.yaml", dump_library(library))
    write_document(out / "placement.yaml", dump_placement(placement))
    pairs = conflicting_pairs(
        audit_placement(placement, library.by_name, library.params.s_dp), placement
    )
    print(f"library: {out / 'library.yaml'}")
    print(f"placement: {out / 'placement.yaml'}")
    print(f"conflicts: {len(pairs)}")
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    library = _library(args)
    placement = load_placement(args.placement, library)
    violations = audit_placement(placement, library.by_name, library.params.s_dp)
    for v in violations:
        print(v)
    pairs = conflicting_pairs(violations, placement)
    print(f"violations: {len(violations)}")
    print(f"conflicting pairs: {len(pairs)}")
    return EXIT_VIOLATIONS if violations else EXIT_OK


def cmd_analyze(args: argparse.Namespace) -> int:
    library = _library(args)
    table = _table(args, library)
    stats = library_friendliness(table)
    data: dict[str, Any] = {"library": asdict(stats)}
    if args.placement:
        placement = load_placement(args.placement, library)
        rows = row_congestion(placement, table)
        worst = bottleneck(rows)
        data["rows"] = [asdict(r) for r in rows]
        data["bottleneck_row"] = worst.index if worst else None
    _emit(_yaml(data), args.output)
    return EXIT_OK


def _add_param_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("process parameters")
    g.add_argument("--s-dp", type=float, default=None, help="Minimum same-mask spacing")
    g.add_argument("--w-spacer", type=float, default=None, help="Spacer width")
    g.add_argument(
        "--s-b-min",
        type=float,
        default=None,
        help="Override the library minimum pattern-to-boundary spacing",
    )
    g.add_argument(
        "--rail-less",
        choices=("error", "warn"),
        default=None,
        help="Policy for cells lacking a power or ground rail",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sadp-legal",
        description="SADP-aware pre-coloring and legalization of standard-cell rows.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="-v for progress, -vv for per-pair decisions",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", help="Per-cell coloring and boundary profiles")
    p.add_argument("library")
    p.add_argument("-o", "--output", help="Write YAML here instead of stdout")
    _add_param_flags(p)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("dplut", help="Build and write the decomposability table")
    p.add_argument("library")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--jobs", type=int, default=None, help="Worker processes")
    _add_param_flags(p)
    p.set_defaults(func=cmd_dplut)

    p = sub.add_parser("legalize", help="Flip and spread cells to remove conflicts")
    p.add_argument("library")
    p.add_argument("placement")
    p.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.UB.value)
    source = p.add_mutually_exclusive_group()
    source.add_argument("--table", help="Prebuilt table file")
    source.add_argument("--cache-dir", help="Shared table cache directory")
    p.add_argument("-o", "--output", required=True, help="Report file")
    p.add_argument("--out-placement", help="Write the legalized placement here")
    _add_param_flags(p)
    p.set_defaults(func=cmd_legalize)

    p = sub.add_parser("render", help="Draw a colored placement as SVG")
    p.add_argument("library")
    p.add_argument("placement")
    p.add_argument("-o", "--output", required=True)
    p.add_argument(
        "--annotate", action="store_true", help="Label instances and mark violations"
    )
    _add_param_flags(p)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("gen", help="Generate a synthetic library and placement")
    p.add_argument("--cells", type=int, default=1000)
    p.add_argument("--rows", type=int, default=20)
    p.add_argument("--util", type=float, default=0.7)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--lib-cells", type=int, default=24)
    p.add_argument("--pg-mix", default=None, help="e.g. same=0.5,free=0.5")
    p.add_argument("-o", "--output", required=True, help="Output directory")
    _add_param_flags(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("check", help="Audit a placement against the spacing rule")
    p.add_argument("library")
    p.add_argument("placement")
    _add_param_flags(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("analyze", help="Library friendliness and row congestion")
    p.add_argument("library")
    p.add_argument("placement", nargs="?")
    p.add_argument("--table", help="Prebuilt table file")
    p.add_argument("-o", "--output", help="Write YAML here instead of stdout")
    _add_param_flags(p)
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(
        level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr
    )
    try:
        return int(args.func(args))
    except (SadpError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
