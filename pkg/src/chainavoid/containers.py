"""Fingerprint containers and the branching process over templates.

``container_step`` is the max-degree link algorithm: repeatedly take the
highest-degree available vertex of the current link hypergraph. If it belongs
to the independent set it joins the fingerprint F and the link is taken
through it; otherwise it is discarded. Once the link is 1-uniform, every
vertex it still mentions is discarded (it would complete an edge with F).
Passes restart from the hypergraph induced on what is left until F reaches
ceil(l * tau * N) vertices or no edge remains. Every choice is determined by
F alone, so the container is a function of F.
"""

from __future__ import annotations

import logging
import math
from collections import Counter, defaultdict, deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from . import lattice
from .critical import omega_crit
from .enumeration import band_allowed, check_band, iter_valid_colorings, mu_valid
from .errors import BudgetExceeded, ParameterError
from .hypergraph import Edge, edge_key, forbidden_chains, vertex_key
from .patterns import ForbiddenFamily, augment_with_all_chains, require_sparse
from .supersat import build_balanced
from .templates import Template, Vertex, check_beta, mu_contained_closed_form, omega

log = logging.getLogger(__name__)

FINGERPRINT_CAP = 10**6
CONTAINER_CAP = 10**6
COVERAGE_EXHAUSTIVE_CAP = 10**6


class _NeedDecision(Exception):
    def __init__(self, vertex):
        self.vertex = vertex


def _run(edges: Sequence[Edge], vertices: Sequence[Vertex], tau: float, in_set: Callable[[Vertex], bool]):
    order = {v: i for i, v in enumerate(sorted(vertices, key=vertex_key))}
    all_edges = [frozenset(e) for e in edges]
    ell = max((len(e) for e in all_edges), default=0)
    bound = math.ceil(ell * tau * len(vertices))
    A = set(vertices)
    F: list[Vertex] = []
    while len(F) < bound:
        link = {e for e in all_edges if e <= A}
        if not link:
            break
        while link and len(F) < bound:
            if len(next(iter(link))) == 1:
                for e in link:
                    A -= e
                break
            deg = Counter(v for e in link for v in e)
            u = min(deg, key=lambda v: (-deg[v], order[v]))
            A.discard(u)
            if in_set(u):
                F.append(u)
                link = {e - {u} for e in link if u in e}
            else:
                link = {e for e in link if u not in e}
    return tuple(F), frozenset(A) | frozenset(F)


def _is_independent(edges: Iterable[Edge], I) -> bool:
    I = set(I)
    return not any(set(e) <= I for e in edges)


def container_step(edges: Sequence[Edge], vertices: Sequence[Vertex], tau: float, I) -> tuple[tuple, frozenset]:
    """Fingerprint F and container C for an independent set I, with I inside F | C."""
    I = set(I)
    if not _is_independent(edges, I):
        raise ParameterError("I is not independent in H")
    if not I <= set(vertices):
        raise ParameterError("I has vertices outside v(H)")
    return _run(edges, vertices, tau, I.__contains__)


def container_for_fingerprint(edges, vertices, tau, F) -> frozenset:
    """Replay the algorithm knowing only F (chosen vertex is in I iff it is in F)."""
    Fs = set(F)
    F2, C = _run(edges, vertices, tau, Fs.__contains__)
    if set(F2) != Fs:
        raise ParameterError("not a fingerprint produced by this hypergraph")
    return C


def enumerate_fingerprints(edges, vertices, tau, cap: int = FINGERPRINT_CAP) -> list[tuple[tuple, frozenset]]:
    """All (F, C) pairs reachable by some independent set, breadth-first over choices."""
    by_vertex = defaultdict(list)
    for e in edges:
        for v in e:
            by_vertex[v].append(frozenset(e))
    out = []
    queue = deque([()])
    while queue:
        prefix = queue.popleft()
        it = iter(prefix)
        chosen: list[Vertex] = []

        def decide(u):
            try:
                d = next(it)
            except StopIteration:
                raise _NeedDecision(u)
            if d:
                chosen.append(u)
            return d

        try:
            out.append(_run(edges, vertices, tau, decide))
        except _NeedDecision as need:
            u = need.vertex
            sel = set(chosen) | {u}
            if not any(e <= sel for e in by_vertex[u]):
                queue.append(prefix + (True,))
            queue.append(prefix + (False,))
        if len(out) + len(queue) > cap:
            raise BudgetExceeded(f"fingerprint enumeration exceeded {cap}", partial=len(out))
    return out


# -- branching process -------------------------------------------------------


@dataclass
class RoundLog:
    round: int
    frontier: int
    max_omega: float
    containers: int
    forced_splits: int

    def line(self) -> str:
        return (
            f"round {self.round}: frontier={self.frontier} max_omega={self.max_omega:.12g} "
            f"containers={self.containers} forced_splits={self.forced_splits}"
        )


@dataclass
class BranchingRun:
    containers: list[Template]
    rounds: list[RoundLog]
    threshold: float
    omega_crit: float
    alpha: float
    delta: float
    tau: float
    band: tuple[int, int]
    union_bound: object
    forced_splits: int = 0
    container_steps: int = 0
    max_container_omega: float = 0.0
    log_lines: list[str] = field(default_factory=list)

    @property
    def total(self) -> int:
        return len(self.containers)


def greedy_pieces(T: Template, threshold: float, beta) -> tuple[Template, list[Template]]:
    """Split T's vertices, in canonical order, into pieces of omega >= threshold plus a light remainder."""
    pieces, cur = [], []
    for v in T.vertices():
        cur.append(v)
        if omega(Template.from_vertices(T.n, cur), beta) >= threshold:
            pieces.append(Template.from_vertices(T.n, cur))
            cur = []
    return Template.from_vertices(T.n, cur), pieces


def forced_split(T: Template, family: ForbiddenFamily) -> list[Template]:
    """Branch on a forbidden chain inside T: a valid set misses one of its vertices.

    The chain is the first one (edge order) through the maximum-degree vertex.
    """
    edges = sorted(forbidden_chains(T, family.minimal), key=edge_key)
    if not edges:
        raise ParameterError("template is valid; nothing to split")
    deg = Counter(v for e in edges for v in e)
    top = min(deg, key=lambda v: (-deg[v], vertex_key(v)))
    e = next(e for e in edges if top in e)
    return [T.without_vertex(w) for w in e]


def branching_run(
    n: int,
    family: ForbiddenFamily,
    beta=None,
    alpha: float = 0.5,
    delta: float = 0.5,
    tau: float | None = None,
    band: tuple[int, int] | None = None,
    *,
    max_containers: int = CONTAINER_CAP,
) -> BranchingRun:
    """Split templates until each has omega <= (omega_crit + alpha) * C(n, n/2).

    Each round runs the balanced construction on a greedy partition of the
    template, keeps the most frequent uniformity, and replaces the template by
    the containers of all reachable fingerprints. A container that fails to
    shrink is replaced by a forced split on a forbidden chain.
    """
    require_sparse(family)
    if alpha <= 0 or delta <= 0:
        raise ParameterError("alpha and delta must be positive")
    beta = check_beta(beta, family.m)
    tau = 1.0 / max(n, 1) if tau is None else tau
    lo, hi = check_band(n, band)
    wc = omega_crit(family, beta).omega_crit
    threshold = (wc + alpha) * lattice.middle_binomial(n)
    aug = augment_with_all_chains(family)
    start = Template.full(n, family.m, (lo, hi))
    frontier = {start.sets: start}
    final: dict[tuple, Template] = {}
    rounds: list[RoundLog] = []
    forced_total = steps = 0
    lines = []
    r = 0
    while frontier:
        nxt: dict[tuple, Template] = {}
        forced = 0
        for T in frontier.values():
            if omega(T, beta) <= threshold:
                final.setdefault(T.sets, T)
                continue
            children, did_force = _split(T, family, aug, beta, threshold, delta, tau)
            steps += 1
            forced += did_force
            for c in children:
                if c.sets not in final:
                    nxt.setdefault(c.sets, c)
            if len(nxt) + len(final) > max_containers:
                raise BudgetExceeded(f"more than {max_containers} templates", partial=len(final))
        still = {k: t for k, t in nxt.items() if omega(t, beta) > threshold}
        for k, t in nxt.items():
            if k not in still:
                final.setdefault(k, t)
        rec = RoundLog(
            r,
            len(frontier),
            max(omega(t, beta) for t in frontier.values()),
            len(final),
            forced,
        )
        rounds.append(rec)
        lines.append(rec.line())
        log.info(rec.line())
        forced_total += forced
        frontier = still
        r += 1
    containers = sorted(final.values(), key=lambda t: t.sets)
    union = sum(mu_contained_closed_form(t, beta) for t in containers)
    max_w = max((omega(t, beta) for t in containers), default=0.0)
    return BranchingRun(
        containers, rounds, threshold, wc, alpha, delta, tau, (lo, hi), union,
        forced_total, steps, max_w, lines,
    )


def _split(T, family, aug, beta, threshold, delta, tau):
    _, pieces = greedy_pieces(T, threshold, beta)
    results = [build_balanced(p, aug, delta, strict=False) for p in pieces]
    ells = [res.output_ell for res in results if res.output_ell is not None]
    if not ells:
        return forced_split(T, family), 1
    freq = Counter(ells)
    ell = min(freq, key=lambda e: (-freq[e], e))
    edges = sorted(
        {e for res in results if res.output_ell == ell for e in res.H.edges.get(ell, [])},
        key=edge_key,
    )
    vertices = T.vertices()
    full = frozenset(vertices)
    children = []
    no_shrink = False
    for F, C in enumerate_fingerprints(edges, vertices, tau):
        if C == full:
            no_shrink = True
            continue
        children.append(Template.from_vertices(T.n, C))
    forced = 0
    if no_shrink:
        children.extend(forced_split(T, family))
        forced = 1
    return children, forced


def verify_coverage(
    containers: Sequence[Template],
    n: int,
    family: ForbiddenFamily,
    band: tuple[int, int] | None = None,
    *,
    rng=None,
    spot_checks: int = 10_000,
) -> bool:
    """Is every valid colored subset of the band inside some container?

    Exhaustive when (m+1)^(band size) <= 10^6; otherwise rejection-sampled
    valid colorings are spot-checked.
    """
    allowed = band_allowed(n, family.m, band)
    size = sum(1 for a in allowed if a)
    if (family.m + 1) ** size <= COVERAGE_EXHAUSTIVE_CAP:
        colorings = iter_valid_colorings(n, family, allowed)
    else:
        if rng is None:
            raise ParameterError("spot-check coverage needs an explicit rng")
        colorings = _sample_valid(n, family, allowed, rng, spot_checks)
    sets = [t.sets for t in containers]
    for col in colorings:
        if not any(all(s[x] >> (c - 1) & 1 for x, c in col.items()) for s in sets):
            return False
    return True


def _sample_valid(n, family, allowed, rng, count):
    from .enumeration import is_valid_coloring

    elems = [x for x in range(1 << n) if allowed[x]]
    chains = list(lattice.maximal_chains(n))
    got = 0
    tries = 0
    while got < count and tries < 100 * count:
        tries += 1
        draw = rng.integers(0, family.m + 1, size=len(elems))
        col = {x: int(c) for x, c in zip(elems, draw) if c and allowed[x] >> (int(c) - 1) & 1}
        if is_valid_coloring(col, n, family, chains):
            got += 1
            yield col
