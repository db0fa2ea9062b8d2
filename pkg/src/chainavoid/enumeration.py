"""Exact weighted counting of validly colored subsets by pruned backtracking.

Elements are assigned in canonical order (rank, then mask), so every immediate
predecessor of ``x`` is decided before ``x``. Each assigned element carries the
per-pattern match state of the best chain ending at it; a choice that completes
a pattern is pruned. The remaining search depends only on the match states of
elements that are still predecessors of something unassigned, which is used as
a memo key.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from numbers import Real
from typing import Iterator, Sequence

import numpy as np

from . import lattice
from .critical import check_probability_vector
from .errors import BudgetExceeded, ParameterError
from .patterns import ForbiddenFamily, _recursion_headroom, colors_of, is_violating_chain
from .templates import Template, check_beta, weighted_size

log = logging.getLogger(__name__)

NODE_CAP = 10**9
PROGRESS_EVERY = 10**7
BRUTE_FORCE_CAP = 10**6
CONTAINED_CAP = 10**7

Band = tuple[int, int]


@dataclass
class CountResult:
    mu: Real
    n: int
    family_digest: str
    band: Band | None
    exact: bool
    nodes: int
    prunes: int
    memo_entries: int = 0

    @property
    def restricted(self) -> bool:
        return self.band is not None


def middle_band(n: int) -> Band:
    """Ranks strictly between n/3 and 2n/3 (possibly empty: lo > hi)."""
    return n // 3 + 1, -(-2 * n // 3) - 1


def check_band(n: int, band: Band | None) -> Band:
    if band is None:
        return 0, n
    lo, hi = band
    if lo < 0 or hi > n:
        raise ParameterError(f"band {band} outside ranks [0, {n}]")
    return lo, hi


def band_allowed(n: int, m: int, band: Band | None) -> tuple[int, ...]:
    lo, hi = check_band(n, band)
    allc = (1 << m) - 1
    return tuple(allc if lo <= x.bit_count() <= hi else 0 for x in range(1 << n))


def _is_exact(weights) -> bool:
    return all(isinstance(w, (int, Fraction)) for w in weights)


def weighted_valid_sum(
    n: int,
    family: ForbiddenFamily,
    weights: Sequence[Real],
    allowed: Sequence[int],
    *,
    memo: bool = True,
    node_cap: int = NODE_CAP,
):
    """Sum over valid colored subsets with colors drawn from ``allowed[x]``.

    Returns ``(total, nodes, prunes, memo_entries)``.
    """
    fam = family.minimal
    a = fam.automaton
    order = [x for x in lattice.canonical_order(n) if allowed[x]]
    if not order:
        return 1, 1, 0, 0
    lo, hi = order[0].bit_count(), order[-1].bit_count()
    # forced-empty elements inside the rank range still carry match states upward
    order = [x for x in lattice.canonical_order(n) if lo <= x.bit_count() <= hi]
    index = {x: i for i, x in enumerate(order)}
    preds = [[index[y] for y in lattice.predecessors(x) if y in index] for x in order]
    last_use = {}
    for i, ps in enumerate(preds):
        for j in ps:
            last_use[j] = i
    N = len(order)
    live = [[j for j in range(i) if last_use.get(j, -1) >= i] for i in range(N + 1)]
    choices = [
        [(1 << (c - 1), weights[c - 1]) for c in colors_of(allowed[x])] for x in order
    ]
    exact = _is_exact(weights)
    add = sum if exact else math.fsum
    start = a.start
    states: list = [None] * N
    table: dict = {}
    stats = [0, 0]  # nodes, prunes

    def count(i):
        if i == N:
            return 1
        if memo:
            key = (i, tuple(states[j] for j in live[i]))
            got = table.get(key)
            if got is not None:
                return got
        stats[0] += 1
        if stats[0] > node_cap:
            raise BudgetExceeded(f"node cap {node_cap} exceeded at element {i}/{N}", partial=stats[0])
        if stats[0] % PROGRESS_EVERY == 0:
            log.info("enumeration: %d nodes, %d prunes", stats[0], stats[1])
        ps = preds[i]
        if not ps:
            M = start
        else:
            M = states[ps[0]]
            for j in ps[1:]:
                M = tuple(map(max, M, states[j]))
        states[i] = M
        terms = [count(i + 1)]
        for bit, w in choices[i]:
            nxt = a.step_valid(M, bit)
            if nxt is None:
                stats[1] += 1
                continue
            states[i] = nxt
            terms.append(w * count(i + 1))
        total = add(terms)
        if memo:
            table[key] = total
        return total

    with _recursion_headroom(N + 100):
        total = count(0)
    return total, stats[0], stats[1], len(table)


def mu_valid(
    n: int,
    family: ForbiddenFamily,
    beta: Sequence[Real] | None = None,
    band: Band | None = None,
    *,
    memo: bool = True,
    node_cap: int = NODE_CAP,
) -> CountResult:
    """Weighted count of validly colored subsets of P([n]) (optionally of a rank band).

    With ``beta=None`` every weight is the integer 1 and the result is the exact
    cardinality as a Python int.
    """
    beta = check_beta(beta, family.m)
    allowed = band_allowed(n, family.m, band)
    total, nodes, prunes, entries = weighted_valid_sum(
        n, family, beta, allowed, memo=memo, node_cap=node_cap
    )
    return CountResult(total, n, family.digest(), band, _is_exact(beta), nodes, prunes, entries)


def count_contained_valid(T: Template, family: ForbiddenFamily, beta: Sequence[Real] | None = None):
    """Weighted count of valid colored subsets contained in ``T``."""
    beta = check_beta(beta, family.m)
    return weighted_valid_sum(T.n, family, beta, T.sets)[0]


def _lattice_chains(n: int):
    return list(lattice.maximal_chains(n))


def is_valid_coloring(coloring: dict[int, int], n: int, family: ForbiddenFamily, chains=None) -> bool:
    """Exhaustive check along every maximal chain of P([n])."""
    for ch in chains if chains is not None else _lattice_chains(n):
        colors = [coloring[x] for x in ch if x in coloring]
        if len(colors) >= 2 and is_violating_chain(colors, family):
            return False
    return True


def mu_valid_bruteforce(n: int, family: ForbiddenFamily, beta=None, band: Band | None = None):
    """Unpruned oracle: every assignment of {none, 1..m} to the band elements."""
    beta = check_beta(beta, family.m)
    lo, hi = check_band(n, band)
    elems = [x for x in lattice.canonical_order(n) if lo <= x.bit_count() <= hi]
    if (family.m + 1) ** len(elems) > BRUTE_FORCE_CAP:
        raise BudgetExceeded(f"(m+1)^{len(elems)} assignments exceed {BRUTE_FORCE_CAP}")
    chains = _lattice_chains(n)
    terms = []
    for assignment in product(range(family.m + 1), repeat=len(elems)):
        coloring = {x: c for x, c in zip(elems, assignment) if c}
        if is_valid_coloring(coloring, n, family, chains):
            terms.append(math.prod((beta[c - 1] for c in coloring.values()), start=1))
    return sum(terms) if _is_exact(beta) else math.fsum(terms)


def iter_valid_colorings(
    n: int, family: ForbiddenFamily, allowed: Sequence[int] | None = None
) -> Iterator[dict[int, int]]:
    """Yield every valid colored subset as a dict element -> color."""
    if allowed is None:
        allowed = band_allowed(n, family.m, None)
    a = family.minimal.automaton
    order = lattice.canonical_order(n)
    state = {}
    coloring = {}

    def walk(i):
        if i == len(order):
            yield dict(coloring)
            return
        x = order[i]
        ps = lattice.predecessors(x)
        M = a.start
        for y in ps:
            M = tuple(map(max, M, state[y]))
        state[x] = M
        yield from walk(i + 1)
        for c in colors_of(allowed[x]):
            nxt = a.step_valid(M, 1 << (c - 1))
            if nxt is None:
                continue
            state[x] = nxt
            coloring[x] = c
            yield from walk(i + 1)
            del coloring[x]

    with _recursion_headroom(len(order) + 100):
        yield from walk(0)


def mu_contained_enumerated(T: Template, beta: Sequence[Real] | None = None):
    """Direct sum over all colored subsets contained in T (no validity filter)."""
    support = T.support()
    m = max((T.sets[x].bit_length() for x in support), default=1)
    beta = check_beta(beta, len(beta) if beta is not None else m)
    size = math.prod(T.sets[x].bit_count() + 1 for x in support)
    if size > CONTAINED_CAP:
        raise BudgetExceeded(f"{size} contained colored subsets exceed {CONTAINED_CAP}")
    options = [(None,) + colors_of(T.sets[x]) for x in support]
    terms = [
        math.prod((beta[c - 1] for c in pick if c is not None), start=1)
        for pick in product(*options)
    ]
    return sum(terms) if _is_exact(beta) else math.fsum(terms)


@dataclass
class ExpectationResult:
    exact: Real
    mc_mean: float | None = None
    mc_stderr: float | None = None
    samples: int = 0

    def within(self, sigmas: float = 3.0) -> bool:
        if self.mc_mean is None:
            return True
        return abs(self.mc_mean - float(self.exact)) <= sigmas * self.mc_stderr


def expected_valid_count(
    n: int,
    family: ForbiddenFamily,
    p: Sequence[Real],
    *,
    samples: int = 0,
    rng: np.random.Generator | None = None,
) -> ExpectationResult:
    """Expected number of valid colored subsets when each element independently
    takes color c with probability p_c (uncolored otherwise).

    By linearity this equals the p-weighted count of valid colored subsets.
    With ``samples > 0`` a Monte Carlo estimate is added: each sampled coloring
    is scored by counting the valid subsets of its colored elements.
    """
    p = check_probability_vector(p, family.m)
    exact = mu_valid(n, family, p).mu
    if samples <= 0:
        return ExpectationResult(exact)
    if rng is None:
        raise ParameterError("Monte Carlo mode needs an explicit rng")
    probs = np.array([1.0 - float(sum(p))] + [float(x) for x in p])
    probs = np.clip(probs, 0.0, None)
    probs /= probs.sum()
    draws = rng.choice(family.m + 1, size=(samples, 1 << n), p=probs)
    cache: dict[tuple, int] = {}
    counts = np.empty(samples, dtype=np.float64)
    for r, row in enumerate(draws):
        key = tuple(int(c) for c in row)
        got = cache.get(key)
        if got is None:
            T = Template(n, tuple(1 << (c - 1) if c else 0 for c in key))
            got = count_contained_valid(T, family)
            cache[key] = got
        counts[r] = got
    mean = float(counts.mean())
    stderr = float(counts.std(ddof=1) / math.sqrt(samples)) if samples > 1 else float("inf")
    return ExpectationResult(exact, mean, stderr, samples)


def exponent_estimate(count: Real, n: int) -> float:
    """log(count) / C(n, floor(n/2)), the finite-n proxy for the critical exponent."""
    return math.log(count) / lattice.middle_binomial(n)
