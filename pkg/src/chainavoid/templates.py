"""Templates: a color set per lattice element, their weights and validity."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import comb
from numbers import Real
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import lattice
from .errors import BudgetExceeded, ParameterError
from .patterns import ForbiddenFamily, colors_of, format_colorset, is_violating_chain

ChainProfile = tuple[int, ...]  # color-set masks, bottom-to-top
Vertex = tuple[int, int]  # (element, color)

ORACLE_SUPPORT_CAP = 14
ORACLE_COLORING_CAP = 10**7


def check_beta(beta: Sequence[Real] | None, m: int) -> tuple:
    """Validate a weight vector; ``None`` means all ones (exact integer mode)."""
    if beta is None:
        return (1,) * m
    beta = tuple(beta)
    if len(beta) != m:
        raise ParameterError(f"beta: expected {m} weights, got {len(beta)}")
    for b in beta:
        if not isinstance(b, Real) or isinstance(b, bool) or not math.isfinite(b) or b <= 0:
            raise ParameterError(f"beta: weights must be positive, got {b!r}")
    return beta


def is_unit_beta(beta: Sequence[Real]) -> bool:
    return all(b == 1 and isinstance(b, (int, Fraction)) for b in beta)


def weighted_size(colors: int, beta: Sequence[Real]) -> Real:
    """Sum of weights of the colors in the set (0 for the empty set)."""
    return sum((beta[c - 1] for c in colors_of(colors)), 0)


@dataclass(frozen=True)
class Template:
    """Dense template on P([n]): ``sets[x]`` is the color-set mask at element ``x``."""

    n: int
    sets: tuple[int, ...]

    def __post_init__(self):
        if not 0 <= self.n <= lattice.MAX_N:
            raise ParameterError(f"n must lie in [0, {lattice.MAX_N}], got {self.n}")
        if len(self.sets) != 1 << self.n:
            raise ParameterError(f"template needs {1 << self.n} entries, got {len(self.sets)}")

    @classmethod
    def empty(cls, n: int) -> "Template":
        return cls(n, (0,) * (1 << n))

    @classmethod
    def from_mapping(cls, n: int, mapping: Mapping[int, int | Iterable[int]]) -> "Template":
        sets = [0] * (1 << n)
        for x, colors in mapping.items():
            lattice.check_element(x, n)
            sets[x] = colors if isinstance(colors, int) else _mask(colors)
        return cls(n, tuple(sets))

    @classmethod
    def from_vertices(cls, n: int, vertices: Iterable[Vertex]) -> "Template":
        sets = [0] * (1 << n)
        for x, c in vertices:
            sets[x] |= 1 << (c - 1)
        return cls(n, tuple(sets))

    @classmethod
    def full(cls, n: int, m: int, ranks: tuple[int, int] | None = None) -> "Template":
        """Every color on every element whose rank lies in the closed interval ``ranks``."""
        lo, hi = ranks if ranks is not None else (0, n)
        allc = (1 << m) - 1
        return cls(n, tuple(allc if lo <= x.bit_count() <= hi else 0 for x in range(1 << n)))

    def __getitem__(self, x: int) -> int:
        return self.sets[x]

    def support(self) -> list[int]:
        """Supp(T) in canonical order."""
        return [x for x in lattice.canonical_order(self.n) if self.sets[x]]

    def vertices(self) -> list[Vertex]:
        """Colored vertices (x, c) with c in T(x), canonical order then color."""
        return [(x, c) for x in self.support() for c in colors_of(self.sets[x])]

    def num_vertices(self) -> int:
        return sum(s.bit_count() for s in self.sets)

    def is_subtemplate_of(self, other: "Template") -> bool:
        return self.n == other.n and all(a & ~b == 0 for a, b in zip(self.sets, other.sets))

    def contains_coloring(self, coloring: Mapping[int, int]) -> bool:
        return all(self.sets[x] >> (c - 1) & 1 for x, c in coloring.items())

    def without_vertex(self, v: Vertex) -> "Template":
        x, c = v
        sets = list(self.sets)
        sets[x] &= ~(1 << (c - 1))
        return Template(self.n, tuple(sets))

    def describe(self) -> str:
        parts = [f"{x:0{max(self.n, 1)}b}:{format_colorset(self.sets[x])}" for x in self.support()]
        return "Template(n=%d; %s)" % (self.n, ", ".join(parts) or "empty")


def _mask(colors: Iterable[int]) -> int:
    out = 0
    for c in colors:
        out |= 1 << (c - 1)
    return out


def omega(T: Template, beta: Sequence[Real]) -> float:
    """Natural-log weight: sum over x of log(1 + |T(x)|_beta)."""
    return math.fsum(math.log1p(weighted_size(T.sets[x], beta)) for x in T.support())


def mu_contained_closed_form(T: Template, beta: Sequence[Real]):
    """Measure of the colored subsets contained in T, as a product.

    Integer (or Fraction) weights give an exact result.
    """
    return math.prod((1 + weighted_size(T.sets[x], beta) for x in T.support()), start=1)


def template_is_valid(T: Template, family: ForbiddenFamily) -> bool:
    """Lattice DP: per pattern, the longest greedily matched prefix on chains ending at x.

    Layers are processed bottom-up; the running maximum over all elements below
    x is the max over immediate predecessors.
    """
    return _first_violation(T, family) is None


def _first_violation(T: Template, family: ForbiddenFamily):
    fam = family.minimal
    P = len(fam.patterns)
    kmax = fam.k
    lengths = np.array([len(p) for p in fam.patterns], dtype=np.int64)
    # need[p, t] = color bit of symbol t; padded entries are never reached
    need = np.zeros((P, kmax + 1), dtype=np.int64)
    for i, p in enumerate(fam.patterns):
        need[i, : len(p)] = [1 << (c - 1) for c in p]
    sets = np.asarray(T.sets, dtype=np.int64)
    h = np.zeros((P, 1 << T.n), dtype=np.int64)
    rows = np.arange(P)[:, None]
    for j in range(T.n + 1):
        xs = np.asarray(lattice.layer(T.n, j), dtype=np.int64)
        M = np.zeros((P, len(xs)), dtype=np.int64)
        for b in range(T.n):
            bit = 1 << b
            has = (xs & bit) != 0
            if has.any():
                sub = xs[has]
                M[:, has] = np.maximum(M[:, has], h[:, sub ^ bit])
        hit = (need[rows, M] & sets[xs][None, :]) != 0
        hx = M + hit
        h[:, xs] = hx
        bad = np.argwhere(hx == lengths[:, None])
        if len(bad):
            p, col = bad[0]
            return int(xs[col]), fam.patterns[p]
    return None


def _support_maximal_chains(support: Sequence[int]) -> list[tuple[int, ...]]:
    """Maximal chains of the subposet ``support`` under proper inclusion."""
    sup = sorted(support, key=lattice.canonical_key)
    above = {x: [y for y in sup if lattice.is_proper_subset(x, y)] for x in sup}
    covers = {
        x: [y for y in above[x] if not any(lattice.is_proper_subset(z, y) for z in above[x])]
        for x in sup
    }
    minimal = [x for x in sup if not any(lattice.is_proper_subset(y, x) for y in sup)]
    out = []

    def walk(path):
        nxt = covers[path[-1]]
        if not nxt:
            out.append(tuple(path))
            return
        for y in nxt:
            walk(path + [y])

    for x in minimal:
        walk([x])
    return out


def template_validity_oracle(T: Template, family: ForbiddenFamily) -> bool:
    """Brute force: try every coloring with one color from T(x) per support element."""
    support = T.support()
    if len(support) > ORACLE_SUPPORT_CAP:
        raise BudgetExceeded(f"oracle support size {len(support)} exceeds {ORACLE_SUPPORT_CAP}")
    size = math.prod(T.sets[x].bit_count() + 1 for x in support)
    if size > ORACLE_COLORING_CAP:
        raise BudgetExceeded(f"oracle coloring count bound {size} exceeds {ORACLE_COLORING_CAP}")
    pos = {x: i for i, x in enumerate(support)}
    chains = [tuple(pos[x] for x in ch) for ch in _support_maximal_chains(support)]
    choices = [colors_of(T.sets[x]) for x in support]
    for coloring in product(*choices):
        for ch in chains:
            if is_violating_chain([coloring[i] for i in ch], family):
                return False
    return True


def chain_template(profile: ChainProfile) -> Template:
    """Put ``profile`` on the chain ∅ ⊊ {0} ⊊ {0,1} ⊊ ... of P([r-1])."""
    r = len(profile)
    n = max(r - 1, 0)
    sets = [0] * (1 << n)
    for j, s in enumerate(profile):
        sets[(1 << j) - 1] = s
    return Template(n, tuple(sets))


def layered_template(profile: ChainProfile, n: int, anchor: int) -> Template:
    """T(x) = profile[rank(x) - anchor] on the block of ranks starting at ``anchor``."""
    r = len(profile)
    if anchor < 0 or anchor + r - 1 > n:
        raise ParameterError(f"block [{anchor}, {anchor + r - 1}] outside ranks [0, {n}]")
    sets = [0] * (1 << n)
    for x in range(1 << n):
        j = x.bit_count() - anchor
        if 0 <= j < r:
            sets[x] = profile[j]
    return Template(n, tuple(sets))


def layered_omega(profile: ChainProfile, n: int, anchor: int, beta: Sequence[Real]) -> float:
    return math.fsum(
        comb(n, anchor + j) * math.log1p(weighted_size(s, beta)) for j, s in enumerate(profile)
    )


def best_anchor(profile: ChainProfile, n: int, beta: Sequence[Real], tol: float = 1e-12):
    """Anchor maximizing the layered template's omega; ties go to the smaller anchor."""
    r = len(profile)
    if r > n + 1:
        raise ParameterError(f"profile of length {r} does not fit in {n + 1} ranks")
    values = [layered_omega(profile, n, a, beta) for a in range(n - r + 2)]
    top = max(values)
    for a, v in enumerate(values):
        if v >= top - tol * max(1.0, abs(top)):
            return a, v
    raise AssertionError("unreachable")
