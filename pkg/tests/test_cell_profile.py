# Copyright (c) 2026 sadp-legal contributors. MIT License; see LICENSE for details.

from itertools import product

import numpy as np
import pytest

from conftest import (
    S_DP,
    bar,
    diff_cell,
    edge_cell,
    make_cell,
    random_cell,
    same_cell,
    stub_cell,
)
from sadp_legal.cell_profile import (
    AbutType,
    FastPath,
    PgType,
    abut_fast_path,
    classify_abut,
    library_s_b_min,
    pg_compatible,
    profile_cell,
    profile_library,
    resolve_s_b_min,
)
from sadp_legal.coloring import colorings_for
from sadp_legal.dplut import (
    ORIENTATION_PAIRS,
    Orientation,
    cross_edges,
    facing_abut,
    full_pair_check,
    oriented,
)
from sadp_legal.errors import NotDecomposable
from sadp_legal.geometry import Side, mirror_cell, pattern_clearance


class TestPgType:
    def test_same(self):
        assert profile_cell(same_cell(), S_DP, 0).pg is PgType.SAME

    def test_diff(self):
        assert profile_cell(diff_cell(), S_DP, 0).pg is PgType.DIFF

    def test_free(self):
        assert profile_cell(stub_cell(), S_DP, 0).pg is PgType.FREE

    def test_rail_less_is_free(self):
        c = make_cell("BARE", 4, [bar("a", 1, 3, 7)], rails=False)
        assert profile_cell(c, S_DP, 0).pg is PgType.FREE

    def test_compatibility(self):
        assert pg_compatible(PgType.SAME, PgType.SAME)
        assert pg_compatible(PgType.DIFF, PgType.FREE)
        assert pg_compatible(PgType.FREE, PgType.FREE)
        assert not pg_compatible(PgType.SAME, PgType.DIFF)


class TestAbutType:
    def test_safe_threshold(self):
        # clearance 2 against s_dp - s_b_min = 1.5
        c = make_cell("X", 8, [bar("a", 2, 3, 7), bar("b", 5, 3, 7)])
        colorings = colorings_for(c, S_DP)
        assert classify_abut(c, colorings, Side.LEFT, S_DP, 0.5) is AbutType.SAFE
        assert classify_abut(c, colorings, Side.LEFT, S_DP, 0.0) is AbutType.FREE

    def test_free_requires_rail_free_components(self):
        p = profile_cell(edge_cell(), S_DP, 0)
        assert p.abut_left is AbutType.FREE
        assert p.abut_right is AbutType.FREE

    def test_rail_tied_pattern_is_unknown(self):
        p = profile_cell(diff_cell(), S_DP, 0)
        assert p.abut_left is AbutType.UNKNOWN
        assert p.abut_right is AbutType.UNKNOWN

    def test_shared_component_is_unknown(self):
        # two near patterns chained through a third one
        c = make_cell(
            "CHAIN", 8, [bar("a", 0, 3, 4), bar("m", 1.5, 4, 6), bar("b", 0, 6, 7)]
        )
        colorings = colorings_for(c, S_DP)
        assert classify_abut(c, colorings, Side.LEFT, S_DP, 0) is AbutType.UNKNOWN

    def test_two_components_rail_tied_left(self):
        # "a" ties both rails together at the left edge, "b" floats on its own
        c = make_cell("TWO", 9, [bar("a", 0, 2, 8), bar("b", 5, 3, 7)])
        p = profile_cell(c, S_DP, 0)
        assert p.graph.components == (("a", "gnd", "vdd"), ("b",))
        assert len(p.colorings) == 4
        assert p.pg is PgType.SAME
        assert (p.abut_left, p.abut_right) == (AbutType.UNKNOWN, AbutType.SAFE)
        assert facing_abut(p, Orientation.MY, Side.RIGHT) is AbutType.UNKNOWN

    def test_s_b_min_above_s_dp(self):
        c = edge_cell()
        with pytest.raises(ValueError):
            classify_abut(c, colorings_for(c, S_DP), Side.LEFT, S_DP, 3)


class TestMirrorInvariance:
    def test_colorings_and_abut_types(self):
        rng = np.random.default_rng(11)
        checked = 0
        while checked < 100:
            n = int(rng.integers(1, 6))
            cell = random_cell(rng, f"M{checked}", n_signals=n, width=9)
            try:
                colorings = colorings_for(cell, S_DP)
            except NotDecomposable:
                continue
            checked += 1
            mirrored = mirror_cell(cell)
            assert colorings_for(mirrored, S_DP) == colorings
            for side, s_b_min in product(Side, (0.0, 0.5)):
                assert classify_abut(
                    mirrored, colorings, side.opposite, S_DP, s_b_min
                ) is classify_abut(cell, colorings, side, S_DP, s_b_min)


class TestFastPath:
    @pytest.mark.parametrize(
        "left,right,expected",
        [
            (AbutType.SAFE, AbutType.UNKNOWN, FastPath.COMPATIBLE),
            (AbutType.UNKNOWN, AbutType.SAFE, FastPath.COMPATIBLE),
            (AbutType.FREE, AbutType.FREE, FastPath.COMPATIBLE),
            (AbutType.FREE, AbutType.UNKNOWN, FastPath.NEEDS_FULL_CHECK),
            (AbutType.UNKNOWN, AbutType.UNKNOWN, FastPath.NEEDS_FULL_CHECK),
        ],
    )
    def test_table(self, left, right, expected):
        assert abut_fast_path(left, right) is expected


class TestSbMin:
    def test_library_minimum(self):
        cells = [make_cell("X", 8, [bar("a", 2, 3, 7)]), edge_cell()]
        assert library_s_b_min(cells) == 0

    def test_rail_only_cells_ignored(self):
        cells = [make_cell("R", 4, []), make_cell("X", 8, [bar("a", 3, 3, 7)])]
        assert library_s_b_min(cells) == 3

    def test_resolve_caps_at_s_dp(self):
        cells = [make_cell("X", 10, [bar("a", 4, 3, 7)])]
        assert resolve_s_b_min(cells, S_DP) == S_DP

    def test_override_above_minimum_warns(self, caplog):
        with caplog.at_level("WARNING", logger="sadp_legal.cell_profile"):
            value = resolve_s_b_min([edge_cell()], S_DP, 1.0)
        assert value == 1.0
        assert "optimistic" in caplog.text


class TestProfile:
    def test_rail_colors(self):
        p = profile_cell(stub_cell(), S_DP, 0)
        # index bits: c, g, gnd, vdd
        power, ground = p.rail_colors(1)
        assert (power.value, ground.value) == ("trim", "mandrel")

    def test_rail_colors_absent(self):
        c = make_cell("BARE", 4, [bar("a", 1, 3, 7)], rails=False)
        assert profile_cell(c, S_DP, 0).rail_colors(0) == (None, None)

    def test_boundary_spacing(self):
        p = profile_cell(same_cell(), S_DP, 0)
        assert (p.s_b_left, p.s_b_right) == (1, 2)
        assert p.s_b(Side.LEFT) == 1


def _brute_pairs(left, o_left, right, o_right, gap):
    """Every coloring pair with no same-color cross edge and matching rails."""
    lc, rc = oriented(left, o_left), oriented(right, o_right)
    offset = lc.width + gap
    edges = [
        (p.id, q.id)
        for p in lc.signals
        for q in rc.signals
        if pattern_clearance(p, q.shifted(offset)) < S_DP
    ]
    links = [
        (a.id, b.id)
        for a, b in ((lc.power, rc.power), (lc.ground, rc.ground))
        if a is not None and b is not None
    ]
    pairs = []
    for (i, cl), (j, cr) in product(
        enumerate(left.colorings), enumerate(right.colorings)
    ):
        if all(cl.color(a) is not cr.color(b) for a, b in edges) and all(
            cl.color(a) is cr.color(b) for a, b in links
        ):
            pairs.append((i, j))
    return pairs


def _random_pair(rng):
    found = []
    while len(found) < 2:
        n = int(rng.integers(1, 5))
        cell = random_cell(rng, "LR"[len(found)], n_signals=n, width=8)
        try:
            colorings_for(cell, S_DP)
        except NotDecomposable:
            continue
        found.append(cell)
    return found


class TestFastPathSoundness:
    def test_fast_path_agrees_with_full_check(self):
        rng = np.random.default_rng(11)
        compatible = 0
        for _ in range(200):
            left, right = _random_pair(rng)
            pl, pr = profile_library([left, right], S_DP)
            for o_l, o_r in ORIENTATION_PAIRS:
                fast = abut_fast_path(
                    facing_abut(pl, o_l, Side.RIGHT), facing_abut(pr, o_r, Side.LEFT)
                )
                pairs = full_pair_check(pl, o_l, pr, o_r, 0, S_DP)
                assert pairs == _brute_pairs(pl, o_l, pr, o_r, 0)
                if not pg_compatible(pl.pg, pr.pg):
                    assert pairs == [], (o_l, o_r, left, right)
                elif fast is FastPath.COMPATIBLE:
                    compatible += 1
                    assert pairs, (o_l, o_r, left, right)
        assert compatible > 0

    @pytest.mark.parametrize("gap", [0, 1, S_DP, 20])
    def test_pg_incompatible_never_feasible(self, gap):
        diff, same = profile_library([diff_cell(), same_cell()], S_DP)
        assert not pg_compatible(diff.pg, same.pg)
        for left, right in ((diff, same), (same, diff)):
            for o_l, o_r in ORIENTATION_PAIRS:
                assert full_pair_check(left, o_l, right, o_r, gap, S_DP) == []

    def test_gap_at_s_dp_has_no_cross_edges(self):
        l_cell, r_cell = edge_cell("L"), edge_cell("R")
        assert cross_edges(l_cell, r_cell, S_DP, S_DP) == []
        assert cross_edges(l_cell, r_cell, 1.9, S_DP) == [("b", "a")]

    def test_negative_gap(self):
        p = profile_cell(edge_cell(), S_DP, 0)
        with pytest.raises(ValueError):
            full_pair_check(p, Orientation.R0, p, Orientation.R0, -1, S_DP)
