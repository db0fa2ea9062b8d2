"""Hypergraphs of forbidden colored chains on P([n]) x {1..m}.

A vertex is ``(element, color)``; an edge is a tuple of vertices listed
bottom-to-top along a chain, which is also canonical vertex order.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Iterator

from . import lattice
from .errors import BudgetExceeded
from .patterns import ForbiddenFamily
from .templates import Template, Vertex

Edge = tuple[Vertex, ...]

EDGE_CAP = 10**8


def vertex_key(v: Vertex) -> tuple[int, int, int]:
    return (v[0].bit_count(), v[0], v[1])


def edge_key(e: Edge):
    """(uniformity, top element canonical, then (element, color) pairs)."""
    return (len(e), lattice.canonical_key(e[-1][0]), tuple(vertex_key(v) for v in e))


def forbidden_chains(T: Template, family: ForbiddenFamily, cap: int = EDGE_CAP) -> Iterator[Edge]:
    """Every colored chain contained in T that spells a pattern of ``family``.

    Patterns longer than the number of ranks in Supp(T) are skipped.
    """
    support = T.support()
    if not support:
        return
    ranks = {x.bit_count() for x in support}
    above = {x: [y for y in support if lattice.is_proper_subset(x, y)] for x in support}
    emitted = 0
    for p in family.patterns:
        if len(p) > len(ranks):
            continue
        bits = [1 << (c - 1) for c in p]

        def grow(path, t):
            nonlocal emitted
            if t == len(p):
                emitted += 1
                if emitted > cap:
                    raise BudgetExceeded(f"more than {cap} forbidden chains", partial=emitted)
                yield tuple(zip(path, p))
                return
            for y in above[path[-1]]:
                if T.sets[y] & bits[t]:
                    yield from grow(path + [y], t + 1)

        for x in support:
            if T.sets[x] & bits[0]:
                yield from grow([x], 1)


@dataclass
class LeveledHypergraph:
    """Edges grouped by uniformity, with incremental codegree counters."""

    n: int
    m: int
    edges: dict[int, list[Edge]] = field(default_factory=lambda: defaultdict(list))
    _deg: dict[int, Counter] = field(default_factory=lambda: defaultdict(Counter), repr=False)

    def add(self, e: Edge) -> None:
        ell = len(e)
        self.edges[ell].append(e)
        deg = self._deg[ell]
        for j in range(1, ell + 1):
            for A in combinations(e, j):
                deg[A] += 1

    def degree(self, ell: int, A: Iterable[Vertex]) -> int:
        """d(A) in the ell-uniform part."""
        return self._deg[ell][tuple(sorted(A, key=vertex_key))]

    def max_codegree(self, ell: int, j: int) -> int:
        return max((d for A, d in self._deg[ell].items() if len(A) == j), default=0)

    def num_edges(self, ell: int | None = None) -> int:
        if ell is None:
            return sum(len(v) for v in self.edges.values())
        return len(self.edges.get(ell, ()))

    def uniformities(self) -> list[int]:
        return sorted(ell for ell, es in self.edges.items() if es)

    def codegree_table(self) -> dict[tuple[int, int], int]:
        return {(ell, j): self.max_codegree(ell, j) for ell in self.uniformities() for j in range(1, ell + 1)}

    def all_edges(self) -> list[Edge]:
        return [e for ell in sorted(self.edges) for e in self.edges[ell]]


def recompute_codegrees(edges: Iterable[Edge]) -> dict[tuple[int, int], int]:
    """Max codegree per (uniformity, j) by scanning edges; ignores any counters."""
    by_ell: dict[int, list[frozenset]] = defaultdict(list)
    for e in edges:
        by_ell[len(e)].append(frozenset(e))
    table = {}
    for ell, es in by_ell.items():
        for j in range(1, ell + 1):
            subsets = {frozenset(A) for e in es for A in combinations(e, j)}
            table[(ell, j)] = max(sum(1 for e in es if A <= e) for A in subsets)
    return table


def ambient_hypergraph(n: int, family: ForbiddenFamily, band=None, cap: int = EDGE_CAP) -> LeveledHypergraph:
    """All colored chains of P([n]) (restricted to a rank band) spelling a pattern."""
    lo, hi = band if band is not None else (0, n)
    T = Template.full(n, family.m, (lo, hi))
    H = LeveledHypergraph(n, family.m)
    for e in sorted(forbidden_chains(T, family, cap), key=edge_key):
        H.add(e)
    return H
