# Copyright (c) 2026 sadp-legal contributors. MIT License; see LICENSE for details.

"""Per-cell conflict graphs and mandrel/trim coloring enumeration.

Two patterns conflict when their clearance is strictly below ``s_dp``.  A
bipartite conflict graph with ``k`` connected components has exactly ``2**k``
two-colorings; they are listed in a canonical order so that coloring indices
stored in tables and placement files stay stable.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from itertools import combinations, product

import networkx as nx

from .errors import InvalidGeometry, NotDecomposable, TooManyComponents, UnknownPattern
from .geometry import Cell, pattern_clearance

log = logging.getLogger(__name__)

MAX_COMPONENTS = 20


class Mask(str, Enum):
    MANDREL = "mandrel"
    TRIM = "trim"

    @property
    def other(self) -> Mask:
        return Mask.TRIM if self is Mask.MANDREL else Mask.MANDREL


@dataclass(frozen=True)
class ConflictGraph:
    """Conflict graph over pattern ids; ``components`` sorted by smallest id."""

    nodes: tuple[str, ...]
    edges: frozenset[frozenset[str]]
    cell: str | None = None
    graph: nx.Graph = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        g = nx.Graph()
        g.add_nodes_from(self.nodes)
        for edge in self.edges:
            if len(edge) != 2:
                raise InvalidGeometry(f"self-loop on pattern {next(iter(edge))!r}")
            g.add_edge(*sorted(edge))
        object.__setattr__(self, "graph", g)

    @cached_property
    def components(self) -> tuple[tuple[str, ...], ...]:
        comps = (tuple(sorted(c)) for c in nx.connected_components(self.graph))
        return tuple(sorted(comps, key=lambda c: c[0]))

    def component_of(self, pattern_id: str) -> int:
        for i, comp in enumerate(self.components):
            if pattern_id in comp:
                return i
        raise UnknownPattern(pattern_id)

    def has_edge(self, a: str, b: str) -> bool:
        return bool(self.graph.has_edge(a, b))


@dataclass(frozen=True)
class ColoringCandidate:
    """One valid mask assignment; ``colors`` is sorted by pattern id."""

    colors: tuple[tuple[str, Mask], ...]

    @classmethod
    def from_mapping(cls, assignment: Mapping[str, Mask]) -> ColoringCandidate:
        return cls(tuple(sorted(assignment.items())))

    @cached_property
    def assignment(self) -> dict[str, Mask]:
        return dict(self.colors)

    def color(self, pattern_id: str) -> Mask:
        try:
            return self.assignment[pattern_id]
        except KeyError:
            raise UnknownPattern(pattern_id) from None

    def get(self, pattern_id: str | None) -> Mask | None:
        return None if pattern_id is None else self.assignment.get(pattern_id)

    def swapped(self) -> ColoringCandidate:
        return ColoringCandidate(tuple((pid, m.other) for pid, m in self.colors))


def build_conflict_graph(c: Cell, s_dp: float) -> ConflictGraph:
    if s_dp <= 0:
        raise ValueError(f"s_dp must be positive, got {s_dp}")
    edges = frozenset(
        frozenset((p.id, q.id))
        for p, q in combinations(c.patterns, 2)
        if pattern_clearance(p, q) < s_dp
    )
    return ConflictGraph(nodes=c.pattern_ids, edges=edges, cell=c.name)


def _odd_cycle(tree: nx.DiGraph, root: str, u: str, v: str) -> tuple[str, ...]:
    """Close the tree paths root->u and root->v through the same-color edge (u, v)."""
    path_u = nx.shortest_path(tree, root, u)
    path_v = nx.shortest_path(tree, root, v)
    i = 0
    while i < min(len(path_u), len(path_v)) and path_u[i] == path_v[i]:
        i += 1
    # path_u[i-1] is the lowest common ancestor
    return tuple(path_u[i - 1 :]) + tuple(reversed(path_v[i:]))


def _two_color(g: ConflictGraph, component: tuple[str, ...]) -> dict[str, Mask]:
    """BFS two-coloring rooted at the smallest id, which gets Mandrel."""
    root = component[0]
    sub = g.graph.subgraph(component)
    colors = {root: Mask.MANDREL}
    tree = nx.DiGraph()
    tree.add_node(root)
    for parent, child in nx.bfs_edges(sub, root, sort_neighbors=sorted):
        colors[child] = colors[parent].other
        tree.add_edge(parent, child)
    for u, v in sorted(tuple(sorted(e)) for e in sub.edges):
        if colors[u] is colors[v]:
            raise NotDecomposable(_odd_cycle(tree, root, u, v), g.cell)
    return colors


def enumerate_colorings(g: ConflictGraph) -> list[ColoringCandidate]:
    """All valid two-colorings in canonical order.

    Components are taken in order of their smallest pattern id; the first
    component varies slowest, and within a component the assignment giving
    the smallest id Mandrel precedes its swap.
    """
    if len(g.components) > MAX_COMPONENTS:
        raise TooManyComponents(
            f"cell {g.cell!r} has {len(g.components)} components "
            f"(limit {MAX_COMPONENTS})"
        )
    per_component = []
    for comp in g.components:
        base = _two_color(g, comp)
        per_component.append((base, {pid: m.other for pid, m in base.items()}))

    candidates = []
    for choice in product(*per_component):
        assignment: dict[str, Mask] = {}
        for part in choice:
            assignment.update(part)
        candidates.append(ColoringCandidate.from_mapping(assignment))
    log.debug(
        "cell %r: %d component(s), %d coloring(s)",
        g.cell,
        len(g.components),
        len(candidates),
    )
    return candidates


def validate_coloring(
    g: ConflictGraph, c: ColoringCandidate | Mapping[str, Mask]
) -> bool:
    assignment = c.assignment if isinstance(c, ColoringCandidate) else dict(c)
    nodes = set(g.nodes)
    unknown = set(assignment) - nodes
    if unknown:
        raise UnknownPattern(sorted(unknown)[0])
    missing = nodes - set(assignment)
    if missing:
        raise ValueError(f"coloring does not cover pattern(s) {sorted(missing)}")
    return all(
        assignment[a] is not assignment[b] for a, b in g.graph.edges
    )


def colorings_for(cell: Cell, s_dp: float) -> list[ColoringCandidate]:
    return enumerate_colorings(build_conflict_graph(cell, s_dp))

