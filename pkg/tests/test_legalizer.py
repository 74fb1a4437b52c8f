# Copyright (c) 2026 sadp-legal contributors. MIT License; see LICENSE for details.

import copy
import logging

import pytest

from conftest import (
    S_DP,
    bar,
    coloring_index,
    make_cell,
    same_cell,
    single_row,
    thick_ground_cell,
)
from sadp_legal.config import Params
from sadp_legal.dplut import Orientation, oriented, overlay_error, rail_edges
from sadp_legal.errors import InconsistentLibrary, PlacementError
from sadp_legal.formats import Library
from sadp_legal.generator import GeneratorConfig, generate
from sadp_legal.legalizer import (
    LegalizeReport,
    Mode,
    Violation,
    align_rails,
    audit_placement,
    conflicting_pairs,
    count_conflicts,
    flip_pass,
    is_conflict,
    legalize,
    rail_breaks,
    required_gap,
    spread_pass,
)
from sadp_legal.placement import PlacedCell

R0, MY = Orientation.R0, Orientation.MY

# EDGE coloring index bits (slowest first): a, b, gnd, vdd
EDGE_ALL_M = 0
EDGE_A_TRIM = 8
EDGE_VDD_TRIM = 1


def _pair(t, left, right):
    p = single_row(left, right)
    a, b = p.rows[0].cells
    return is_conflict(a, b, t)


class TestIsConflict:
    def test_abutted_same_color(self, small_table):
        assert _pair(
            small_table,
            ("u0", "EDGE", 0, R0, EDGE_ALL_M),
            ("u1", "EDGE", 6, R0, EDGE_ALL_M),
        )

    def test_stored_candidate(self, small_table):
        assert not _pair(
            small_table,
            ("u0", "EDGE", 0, R0, EDGE_ALL_M),
            ("u1", "EDGE", 6, R0, EDGE_A_TRIM),
        )

    def test_gap_below_s_dp_checked_exactly(self, small_table):
        assert _pair(
            small_table,
            ("u0", "EDGE", 0, R0, EDGE_ALL_M),
            ("u1", "EDGE", 7, R0, EDGE_ALL_M),
        )
        assert not _pair(
            small_table,
            ("u0", "EDGE", 0, R0, EDGE_ALL_M),
            ("u1", "EDGE", 7, R0, EDGE_A_TRIM),
        )

    def test_gap_at_s_dp_is_safe(self, small_table):
        assert not _pair(
            small_table,
            ("u0", "EDGE", 0, R0, EDGE_ALL_M),
            ("u1", "EDGE", 8, R0, EDGE_ALL_M),
        )

    @pytest.mark.parametrize(
        "left,right,right_coloring",
        [
            ("EDGE", "EDGE", 0),
            ("DIFF", "STUB", 1),
            ("STUB", "EDGE", 0),
            ("SAME", "SAME", 0),
        ],
    )
    def test_wide_gap_never_conflicts(self, small_table, left, right, right_coloring):
        # rails agree; only the distance matters
        w = small_table.profile(left).cell.width
        assert not _pair(
            small_table,
            ("u0", left, 0, R0, 0),
            ("u1", right, w + 5, MY, right_coloring),
        )

    def test_rail_mismatch(self, small_table):
        assert _pair(
            small_table,
            ("u0", "EDGE", 0, R0, EDGE_ALL_M),
            ("u1", "EDGE", 11, R0, EDGE_VDD_TRIM),
        )

    def test_pg_incompatible_pair(self, small_table):
        for x in (10, 12, 40):
            left, right = ("u0", "DIFF", 0, R0, 0), ("u1", "SAME", x, R0, 0)
            assert _pair(small_table, left, right)

    def test_overlap(self, small_table):
        assert _pair(
            small_table,
            ("u0", "EDGE", 0, R0, EDGE_ALL_M),
            ("u1", "EDGE", 5, R0, EDGE_A_TRIM),
        )

    def test_required_gap(self, small_table):
        p = single_row(("u0", "SAME", 0, R0, 0), ("u1", "SAME", 4, MY, 0))
        a, b = p.rows[0].cells
        # SAME has s_b 1 on the left and 2 on the right; MY swaps them
        assert required_gap(small_table, a, b, S_DP) == 0.0
        b.orient = R0
        assert required_gap(small_table, a, b, S_DP) == 0.0
        a.orient = MY
        assert required_gap(small_table, a, b, S_DP) == 0.0
        e = single_row(("u0", "EDGE", 0, R0, 0), ("u1", "EDGE", 6, R0, 0))
        assert required_gap(small_table, *e.rows[0].cells, S_DP) == 2.0


class TestRailsAcrossCells:
    """Rails checked against the Signals and rails of neighbouring cells."""

    @pytest.fixture(scope="class")
    def library(self):
        low = make_cell("LOW", 4, [bar("s", 0, 1.5, 4)], rails=False)
        bare = make_cell("BARE", 4, [bar("s", 1, 2, 8)], rails=False)
        return Library((same_cell(), low, bare), Params(s_dp=S_DP, w_spacer=1.0))

    @pytest.fixture(scope="class")
    def table(self, library):
        return library.build_table()

    def test_rail_edges(self, table):
        same, low = table.profile("SAME"), table.profile("LOW")
        assert rail_edges(same.cell, low.cell, 0, S_DP) == [("gnd", "s")]
        assert rail_edges(low.cell, same.cell, 0, S_DP) == []
        assert rail_edges(same.cell, low.cell, 2, S_DP) == []
        assert rail_edges(
            oriented(low, MY), oriented(same, MY), 0, S_DP
        ) == [("s", "gnd")]

    @pytest.mark.parametrize("s_mask,expected", [("mandrel", True), ("trim", False)])
    def test_is_conflict_sees_rail(self, library, table, s_mask, expected):
        same = table.profile("SAME")
        p = single_row(
            ("u0", "SAME", 0, R0, coloring_index(same, gnd="mandrel")),
            ("u1", "LOW", 4, R0, coloring_index(table.profile("LOW"), s=s_mask)),
        )
        a, b = p.rows[0].cells
        assert is_conflict(a, b, table) is expected
        assert bool(audit_placement(p, library.by_name, S_DP)) is expected

    def test_candidates_keep_rail_apart(self, table):
        same, low = table.profile("SAME"), table.profile("LOW")
        stored = [
            c
            for c in table.query("SAME", "LOW")
            if (c.orient_left, c.orient_right) == (R0, R0)
        ]
        assert stored
        for c in stored:
            gnd = same.colorings[c.coloring_left].color("gnd")
            assert low.colorings[c.coloring_right].color("s") is not gnd

    def test_rail_break_across_bare_cell(self, library, table):
        same = table.profile("SAME")
        p = single_row(
            ("u0", "SAME", 0, R0, coloring_index(same, gnd="mandrel", vdd="mandrel")),
            ("u1", "BARE", 8, R0, 0),
            ("u2", "SAME", 16, R0, coloring_index(same, gnd="trim", vdd="trim")),
        )
        row = p.rows[0]
        assert not any(is_conflict(a, b, table) for a, b in row.pairs())
        assert rail_breaks(row, table) == {2}
        assert count_conflicts(row, table) == 1
        assert audit_placement(p, library.by_name, S_DP)

        report = legalize(p, table, Mode.UB)
        assert (report.conflicts_before, report.conflicts_after) == (1, 0)
        assert report.recolors == 1
        assert rail_breaks(row, table) == set()
        assert audit_placement(p, library.by_name, S_DP) == []

    def test_thicker_rail_against_neighbour_signal(self, params):
        short = make_cell("SHORT", 4, [bar("s", 0, 3, 6)])
        lib = Library((thick_ground_cell(), short), params)
        thick, short_p = lib.profiles()
        rails = {"gnd": "mandrel", "vdd": "mandrel"}
        p = single_row(
            ("u0", "THICK", 0, R0, coloring_index(thick, **rails)),
            ("u1", "SHORT", 4, R0, coloring_index(short_p, s="mandrel", **rails)),
        )
        assert audit_placement(p, lib.by_name, S_DP) == [
            Violation(0, ("u0", "gnd"), ("u1", "s"), 1.0)
        ]


class TestFlipPass:
    def _diff_stub(self, small_table):
        stub = small_table.profile("STUB")
        conflicting = coloring_index(stub, g="trim", gnd="mandrel", vdd="trim")
        return single_row(
            ("u0", "DIFF", 0, R0, 0), ("u1", "STUB", 10, R0, conflicting)
        )

    def test_flip_selects_lower_overlay(self, small_table):
        p = self._diff_stub(small_table)
        row = p.rows[0]
        assert count_conflicts(row, small_table) == 1

        assert flip_pass(row, small_table) == 1
        left, right = row.cells
        assert (left.orient, left.coloring) == (R0, 0)
        assert (right.orient, right.coloring) == (MY, 1)
        assert right.x == 10
        assert count_conflicts(row, small_table) == 0

        diff, stub = small_table.profile("DIFF"), small_table.profile("STUB")
        flipped = overlay_error(diff, R0, 0, stub, MY, 1, S_DP, small_table.w_spacer)
        unflipped = min(
            c.overlay
            for c in small_table.query("DIFF", "STUB")
            if (c.orient_left, c.orient_right) == (R0, R0)
        )
        assert flipped < unflipped

    def test_empty_entry_left_unchanged(self, small_table):
        p = single_row(("u0", "DIFF", 0, R0, 0), ("u1", "SAME", 10, R0, 0))
        before = copy.deepcopy(p.rows[0].cells)
        assert flip_pass(p.rows[0], small_table) == 0
        assert p.rows[0].cells == before

    def test_later_pairs_keep_left_cell(self, small_table):
        p = single_row(
            ("u0", "EDGE", 0, R0, EDGE_ALL_M),
            ("u1", "EDGE", 8, R0, EDGE_A_TRIM),
            ("u2", "EDGE", 14, R0, EDGE_ALL_M),
        )
        row = p.rows[0]
        before = copy.deepcopy(row.cells)
        assert flip_pass(row, small_table) == 0
        assert row.cells == before

    def test_later_pair_recolors_right_cell(self, small_table):
        p = single_row(
            ("u0", "EDGE", 0, R0, EDGE_ALL_M),
            ("u1", "EDGE", 8, R0, EDGE_ALL_M),
            ("u2", "EDGE", 14, R0, EDGE_ALL_M),
        )
        row = p.rows[0]
        assert flip_pass(row, small_table) == 1
        assert row.cells[1] == PlacedCell("u1", "EDGE", 8, R0, EDGE_ALL_M)
        assert row.cells[2].coloring == EDGE_A_TRIM
        assert count_conflicts(row, small_table) == 0

    def test_positions_never_move(self, small_table):
        p = self._diff_stub(small_table)
        xs = [pc.x for pc in p.rows[0].cells]
        flip_pass(p.rows[0], small_table)
        assert [pc.x for pc in p.rows[0].cells] == xs


class TestSpreadPass:
    def _row(self):
        return single_row(
            ("u0", "EDGE", 0, R0, EDGE_ALL_M),
            ("u1", "EDGE", 6, R0, EDGE_ALL_M),
            ("u2", "EDGE", 20, R0, EDGE_ALL_M),
        ).rows[0]

    def test_unbounded_shifts_suffix(self, small_table):
        row = self._row()
        assert spread_pass(row, small_table, S_DP, Mode.UB) == 2
        assert [pc.x for pc in row.cells] == [0, 8, 22]
        assert count_conflicts(row, small_table) == 0

    def test_fractional_need_rounds_up(self, small_table):
        row = self._row()
        row.cells[1].x = 6.5
        row.cells[2].x = 20.5
        assert spread_pass(row, small_table, S_DP, Mode.UB) == 2
        assert row.cells[1].x == 8.5

    def test_bounded_without_room(self, small_table):
        row = self._row()
        assert spread_pass(row, small_table, S_DP, Mode.B, limit=26) == 0
        assert [pc.x for pc in row.cells] == [0, 6, 20]

    def test_bounded_with_room(self, small_table):
        row = self._row()
        assert spread_pass(row, small_table, S_DP, Mode.B, limit=28) == 2

    def test_bounded_needs_limit(self, small_table):
        with pytest.raises(ValueError):
            spread_pass(self._row(), small_table, S_DP, Mode.B)

    def test_rail_mismatch_not_spread(self, small_table):
        p = single_row(("u0", "DIFF", 0, R0, 0), ("u1", "SAME", 10, R0, 0))
        assert spread_pass(p.rows[0], small_table, S_DP, Mode.UB) == 0


class TestAlignRails:
    def test_recolor_minority(self, small_table):
        p = single_row(
            ("u0", "EDGE", 0, R0, EDGE_ALL_M),
            ("u1", "EDGE", 10, R0, EDGE_VDD_TRIM),
            ("u2", "EDGE", 20, R0, EDGE_ALL_M),
        )
        assert align_rails(p.rows[0], small_table) == 1
        assert p.rows[0].cells[1].coloring == EDGE_ALL_M

    def test_consistent_row_untouched(self, small_table):
        p = single_row(("u0", "EDGE", 0, R0, 0), ("u1", "EDGE", 10, R0, 0))
        assert align_rails(p.rows[0], small_table) == 0


class TestLegalize:
    def test_small_row_resolved(self, small_table):
        stub = small_table.profile("STUB")
        p = single_row(
            ("u0", "DIFF", 0, R0, 0),
            ("u1", "STUB", 10, R0, coloring_index(stub, g="trim", vdd="trim")),
            ("u2", "EDGE", 15, R0, EDGE_VDD_TRIM),
        )
        report = legalize(p, small_table, Mode.UB)
        assert isinstance(report, LegalizeReport)
        assert report.conflicts_before >= 1
        assert report.conflicts_after == 0
        assert report.unresolved == []
        assert report.resolved_pct == 100.0

    def test_pg_infeasible_row_reported(self, small_table):
        p = single_row(("u0", "DIFF", 0, R0, 0), ("u1", "SAME", 10, R0, 0))
        report = legalize(p, small_table)
        assert report.unsolvable_pg_rows == [0]
        assert report.unresolved == [(0, "u0", "u1")]
        assert report.conflicts_after == 1

    def test_edits_without_gain_rolled_back(self, small_table, monkeypatch, caplog):
        def recolor_only(row, t):
            row.cells[1].coloring = 4  # vdd to mandrel, still a clash
            return 1

        monkeypatch.setattr("sadp_legal.legalizer.flip_pass", recolor_only)
        p = single_row(("u0", "DIFF", 0, R0, 0), ("u1", "STUB", 10, R0, 5))
        with caplog.at_level(logging.INFO, logger="sadp_legal.legalizer"):
            report = legalize(p, small_table, Mode.B)
        (row,) = report.rows
        assert row.rolled_back
        assert (row.conflicts_before, row.conflicts_after, row.flips) == (1, 1, 0)
        assert report.flips == 0
        assert p.rows[0].cells[1].coloring == 5
        assert "restoring input" in caplog.text

    def test_missing_coloring_defaults(self, small_table, caplog):
        p = single_row(("u0", "EDGE", 0, R0, 0))
        p.rows[0].cells[0].coloring = None
        legalize(p, small_table)
        assert p.rows[0].cells[0].coloring == 0
        assert "no coloring" in caplog.text

    def test_coloring_out_of_range(self, small_table):
        p = single_row(("u0", "EDGE", 0, R0, 99))
        with pytest.raises(PlacementError, match="out of range"):
            legalize(p, small_table)

    def test_unknown_cell(self, small_table):
        p = single_row(("u0", "NOPE", 0, R0, 0))
        with pytest.raises(InconsistentLibrary):
            legalize(p, small_table)

    def test_report_summary(self, small_table):
        p = single_row(("u0", "EDGE", 0, R0, 0), ("u1", "EDGE", 6, R0, 0))
        report = legalize(p, small_table)
        text = report.summary()
        assert "mode:" in text
        assert "100.00%" in text


@pytest.fixture(scope="module")
def generated():
    library, placement = generate(
        GeneratorConfig(cells=300, rows=6, seed=3, lib_cells=16), Params()
    )
    return library, placement, library.build_table()


def _adjacent_conflicts(placement, t):
    return {
        (row.index, a.instance, b.instance)
        for row in placement.rows
        for a, b in row.pairs()
        if is_conflict(a, b, t)
    }


class TestGenerated:
    def test_audit_agrees_with_is_conflict(self, generated):
        library, placement, t = generated
        p = placement.copy()
        for _ in range(2):
            violations = audit_placement(p, library.by_name, library.params.s_dp)
            assert set(conflicting_pairs(violations, p)) == _adjacent_conflicts(p, t)
            legalize(p, t, Mode.B)

    def test_unbounded_resolves_everything(self, generated):
        library, placement, t = generated
        p = placement.copy()
        report = legalize(p, t, Mode.UB)
        assert report.conflicts_before > 0
        assert report.conflicts_after == 0
        assert audit_placement(p, library.by_name, library.params.s_dp) == []

    def test_bounded_keeps_area(self, generated):
        _, placement, t = generated
        p = placement.copy()
        report = legalize(p, t, Mode.B)
        assert report.area_after == report.area_before
        assert report.conflicts_after <= report.conflicts_before

    @pytest.mark.parametrize("mode", [Mode.UB, Mode.B])
    def test_idempotent(self, generated, mode):
        _, placement, t = generated
        p = placement.copy()
        legalize(p, t, mode)
        once = copy.deepcopy(p)
        again = legalize(p, t, mode)
        assert p == once
        assert again.flips == 0
        assert again.total_spread == 0

    def test_deterministic(self, generated):
        _, placement, t = generated
        a, b = placement.copy(), placement.copy()
        assert legalize(a, t) == legalize(b, t)
        assert a == b

    def test_input_not_shared(self, generated):
        _, placement, t = generated
        before = copy.deepcopy(placement)
        legalize(placement.copy(), t)
        assert placement == before


class TestViolation:
    def test_str(self):
        v = Violation(3, ("u1", "s0"), ("u2", "s1"), 1.5)
        assert str(v) == "row 3: spacing u1/s0 - u2/s1 (clearance 1.5)"
