"""Random-chain statistics behind balanced supersaturation.

For a template T and a maximal chain C:

* ``X(C)``: sum of log(1 + |T(x)|_beta) over x in C.
* ``Y(C)``: occurrences of forbidden patterns as colored subchains of C
  contained in T, counted per (pattern, embedding).
* ``Y^x(C)`` / ``Z^x(C)``: the same restricted to subchains whose top element
  is x (C then runs from the empty set up to x).

All expectations are over uniformly random maximal chains; "exact" means an
average over all of them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from math import comb, factorial
from typing import Sequence

import numpy as np

from . import lattice
from .critical import omega_crit
from .errors import BudgetExceeded, ParameterError
from .hypergraph import LeveledHypergraph, edge_key, forbidden_chains, vertex_key
from .patterns import ForbiddenFamily, require_sparse
from .templates import Template, check_beta, omega, weighted_size

EXACT_CHAIN_CAP = 10**6


@dataclass(frozen=True)
class SupersatConstants:
    C1: float
    C2: float
    C3: float
    C4: float
    Q: int | None
    omega_crit: float


def bound_constant_Q(family: ForbiddenFamily, n: int) -> int:
    """Least Q >= 0 with (s-1)^(i-1) <= Q + C(floor((s-1)/m), k-1) for 1 <= i < k, 1 <= s <= n+1."""
    k, m = family.k, family.m
    if not family.contains_all_chains_of_length(k):
        raise ParameterError("Q needs a family containing every colored chain of its top length; augment it first")
    need = 0
    for s in range(1, n + 2):
        for i in range(1, k):
            need = max(need, (s - 1) ** (i - 1) - comb((s - 1) // m, k - 1))
    return need


def constants(family: ForbiddenFamily, beta=None, n: int | None = None) -> SupersatConstants:
    require_sparse(family)
    beta = check_beta(beta, family.m)
    wc = omega_crit(family, beta).omega_crit
    C3 = math.log1p(sum(beta))
    C4 = math.log1p(min(beta))
    C1 = C4 / (C3 * 2 * wc)
    C2 = min(math.log1p(min(beta)) / (C3 * C1), wc)
    Q = bound_constant_Q(family, n) if n is not None else None
    return SupersatConstants(C1, C2, C3, C4, Q, wc)


def count_embeddings(pattern: Sequence[int], sets: Sequence[int]) -> int:
    """Ways to pick positions i_1 < ... < i_l with pattern[t] in sets[i_t]."""
    ell = len(pattern)
    if ell == 0:
        return 1
    if ell > len(sets):
        return 0
    bits = [1 << (c - 1) for c in pattern]
    cnt = [1] + [0] * ell
    for s in sets:
        for t in range(ell - 1, -1, -1):
            if bits[t] & s:
                cnt[t + 1] += cnt[t]
    return cnt[ell]


def chain_X_Y(T: Template, family: ForbiddenFamily, beta, chain: Sequence[int]) -> tuple[float, int]:
    beta = check_beta(beta, family.m)
    sets = [T.sets[x] for x in chain]
    X = math.fsum(math.log1p(weighted_size(s, beta)) for s in sets)
    Y = sum(count_embeddings(p, sets) for p in family.patterns if len(p) <= len(sets))
    return X, Y


def y_top(T: Template, family: ForbiddenFamily, chain: Sequence[int]) -> int:
    """Y^x(C) for a chain C whose last element is x."""
    top = T.sets[chain[-1]]
    if not top:
        return 0
    below = [T.sets[y] for y in chain[:-1]]
    return sum(
        count_embeddings(p[:-1], below)
        for p in family.patterns
        if len(p) <= len(chain) and top >> (p[-1] - 1) & 1
    )


def z_top(T: Template, colors_top_down: Sequence[int], chain: Sequence[int]) -> int:
    """Z^x(C): subchains topped by x = chain[-1], colored c1 (at x) > c2 > ... going down."""
    c1, *rest = colors_top_down
    if not T.sets[chain[-1]] >> (c1 - 1) & 1:
        return 0
    return count_embeddings(rest[::-1], [T.sets[y] for y in chain[:-1]])


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    samples: int
    exact: bool


def _chains_below(x: int, samples: int | None, rng):
    if samples is None:
        if factorial(x.bit_count()) > EXACT_CHAIN_CAP:
            raise BudgetExceeded(f"{x.bit_count()}! chains exceed exact budget {EXACT_CHAIN_CAP}")
        return lattice.maximal_chains_below(x)
    if rng is None:
        raise ParameterError("sampling mode needs an explicit rng")
    return (lattice.random_maximal_chain_below(x, rng) for _ in range(samples))


def _estimate(values: list, exact: bool) -> Estimate:
    arr = np.asarray(values, dtype=np.float64)
    mean = float(arr.mean())
    if exact:
        return Estimate(mean, 0.0, len(arr), True)
    stderr = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else math.inf
    return Estimate(mean, stderr, len(arr), False)


def y_x(T: Template, family: ForbiddenFamily, x: int, *, samples: int | None = None, rng=None) -> Estimate:
    """E Y^x over random maximal chains from the empty set to x."""
    vals = [y_top(T, family, ch) for ch in _chains_below(x, samples, rng)]
    return _estimate(vals, samples is None)


def z_x(T: Template, colors_top_down: Sequence[int], x: int, *, samples: int | None = None, rng=None) -> Estimate:
    vals = [z_top(T, colors_top_down, ch) for ch in _chains_below(x, samples, rng)]
    return _estimate(vals, samples is None)


@dataclass
class ChainStats:
    x_mean: float
    x_stderr: float
    y_mean: float
    y_stderr: float
    samples: int
    exact: bool


def chain_stats(T: Template, family: ForbiddenFamily, beta=None, *, samples: int | None = None, rng=None) -> ChainStats:
    """E X and E Y over maximal chains of P([n])."""
    full = (1 << T.n) - 1
    xs, ys = [], []
    for ch in _chains_below(full, samples, rng):
        X, Y = chain_X_Y(T, family, beta, ch)
        xs.append(X)
        ys.append(Y)
    ex, ey = _estimate(xs, samples is None), _estimate(ys, samples is None)
    return ChainStats(ex.mean, ex.stderr, ey.mean, ey.stderr, ex.samples, ex.exact)


def support_decomposition(T: Template, family: ForbiddenFamily, beta=None) -> tuple[float, float]:
    """(sum of X^x / C(n,|x|), sum of E Y^x / C(n,|x|)) over Supp(T), exact."""
    beta = check_beta(beta, family.m)
    sx, sy = [], []
    for x in T.support():
        w = comb(T.n, x.bit_count())
        sx.append(math.log1p(weighted_size(T.sets[x], beta)) / w)
        sy.append(y_x(T, family, x).mean / w)
    return math.fsum(sx), math.fsum(sy)


@dataclass
class WitnessReport:
    alpha: float
    constants: SupersatConstants
    witness: int | None
    witness_value: float | None
    threshold: float
    chains_checked: int
    max_pointwise: float
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.witness is not None and not self.violations


def check_pointwise(T: Template, family: ForbiddenFamily, beta=None, *, samples=None, rng=None, wc=None):
    """Max over chains of X(C) - C3*Y(C), and the chains where it exceeds omega_crit."""
    beta = check_beta(beta, family.m)
    if wc is None:
        wc = omega_crit(family, beta).omega_crit
    C3 = math.log1p(sum(beta))
    worst = -math.inf
    bad = []
    count = 0
    for ch in _chains_below((1 << T.n) - 1, samples, rng):
        X, Y = chain_X_Y(T, family, beta, ch)
        val = X - C3 * Y
        worst = max(worst, val)
        if val > wc + 1e-9:
            bad.append({"chain": list(ch), "X": X, "Y": Y})
        count += 1
    return worst, bad, count


def check_average_witness(
    T: Template, family: ForbiddenFamily, beta, alpha: float, *, chain_samples: int | None = None, rng=None
) -> WitnessReport:
    """Find x in Supp(T) with E Y^x >= C1*alpha, given omega(T) is above threshold.

    Also checks X(C) - C3*Y(C) <= omega_crit on every chain (or on samples).
    """
    beta = check_beta(beta, family.m)
    K = constants(family, beta)
    need = (K.omega_crit + alpha) * lattice.middle_binomial(T.n)
    if not 0 < alpha < K.C2:
        raise ParameterError(f"alpha={alpha} must lie in (0, C2={K.C2:.6g})")
    w = omega(T, beta)
    if w < need:
        raise ParameterError(f"omega(T)={w:.6g} below (omega_crit+alpha)*C(n,n/2)={need:.6g}")
    threshold = K.C1 * alpha
    witness = value = None
    for x in T.support():
        exact = factorial(x.bit_count()) <= EXACT_CHAIN_CAP
        est = y_x(T, family, x, samples=None if exact else 10_000, rng=rng)
        if est.mean >= threshold:
            witness, value = x, est.mean
            break
    worst, bad, count = check_pointwise(T, family, beta, samples=chain_samples, rng=rng, wc=K.omega_crit)
    return WitnessReport(alpha, K, witness, value, threshold, count, worst, bad)


@dataclass
class TopBoundReport:
    x: int
    colors: tuple[int, ...]
    Q: int
    chains_checked: int
    max_slack: float  # max of Z - (Q + Y^x); must be <= 0
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_top_bound(
    T: Template,
    family: ForbiddenFamily,
    x: int,
    colors_top_down: Sequence[int],
    *,
    Q: int | None = None,
    samples: int | None = None,
    rng=None,
) -> TopBoundReport:
    """Z^x_{c1>...>ci}(C) <= Q + Y^x(C) on each chain below x."""
    if Q is None:
        Q = bound_constant_Q(family, T.n)
    elif not family.contains_all_chains_of_length(family.k):
        raise ParameterError("family must contain every colored chain of its top length")
    worst = -math.inf
    bad = []
    count = 0
    for ch in _chains_below(x, samples, rng):
        Z = z_top(T, colors_top_down, ch)
        Y = y_top(T, family, ch)
        slack = Z - (Q + Y)
        worst = max(worst, slack)
        if slack > 0:
            bad.append({"chain": list(ch), "Z": Z, "Y": Y})
        count += 1
    return TopBoundReport(x, tuple(colors_top_down), Q, count, worst, bad)


# -- balanced hypergraph construction ---------------------------------------


@dataclass
class BalancedResult:
    H: LeveledHypergraph
    delta: float
    success_ell: int | None
    targets: dict[int, float]
    codegrees: dict[tuple[int, int], int]
    caps: dict[tuple[int, int], float]
    saturated_singletons: list
    candidates: int
    suggested_delta: float | None = None

    @property
    def output_ell(self) -> int | None:
        """The successful uniformity, else the one with most edges (smaller on ties)."""
        if self.success_ell is not None:
            return self.success_ell
        best = None
        for ell in self.H.uniformities():
            if best is None or self.H.num_edges(ell) > self.H.num_edges(best):
                best = ell
        return best


def in_balance_band(T: Template) -> bool:
    n = T.n
    return all(n <= 3 * x.bit_count() <= 2 * n for x in T.support())


def build_balanced(
    T: Template,
    family: ForbiddenFamily,
    delta: float,
    *,
    alpha: float | None = None,
    beta=None,
    strict: bool = True,
) -> BalancedResult:
    """Greedy edge-by-edge construction under the caps Delta_j(H_l) <= (delta*n)^(l-j).

    Candidates are the forbidden colored chains contained in T, in edge_key
    order. Stops as soon as some e(H_l) reaches delta^l n^(l-1) C(n, n/2);
    otherwise runs out of candidates and reports the shortfall.
    """
    if delta <= 0:
        raise ParameterError("delta must be positive")
    if not family.contains_all_chains_of_length(family.k):
        raise ParameterError("family must contain every colored chain of its top length; augment it first")
    if strict and not in_balance_band(T):
        raise ParameterError("template must be supported on ranks between n/3 and 2n/3")
    n = T.n
    dn = delta * n
    mid = lattice.middle_binomial(n)
    ells = sorted({len(p) for p in family.patterns})
    targets = {ell: delta**ell * n ** (ell - 1) * mid for ell in ells}
    caps = {(ell, j): dn ** (ell - j) for ell in ells for j in range(1, ell + 1)}
    H = LeveledHypergraph(n, family.m)
    cands = sorted(forbidden_chains(T, family), key=edge_key)
    success = None
    for e in cands:
        ell = len(e)
        if all(
            H.degree(ell, A) + 1 <= caps[(ell, j)] + 1e-9
            for j in range(1, ell + 1)
            for A in combinations(e, j)
        ):
            H.add(e)
            if H.num_edges(ell) >= targets[ell]:
                success = ell
                break
    saturated = sorted(
        {v for ell in H.uniformities() for e in H.edges[ell] for v in e if H.degree(ell, (v,)) + 1 > caps[(ell, 1)] + 1e-9},
        key=vertex_key,
    )
    suggested = None
    if alpha is not None:
        b = check_beta(beta, family.m)
        suggested = min(alpha / (2 * ell * math.log1p(sum(b))) for ell in ells)
    return BalancedResult(H, delta, success, targets, H.codegree_table(), caps, saturated, len(cands), suggested)


def audit_blocked_extensions(res: BalancedResult, T: Template, max_prefix: int | None = None) -> int:
    """Max over colored chain prefixes of one-vertex extensions blocked by a
    saturated nonempty sub-tuple."""
    H = res.H
    caps = res.caps
    ells = H.uniformities()
    if not ells:
        return 0
    kmax = max(ells)
    depth = max_prefix or kmax - 1
    support = T.support()
    below = {x: [y for y in support if lattice.is_proper_subset(y, x)] for x in support}

    def saturated(A, v, ell):
        j = len(A) + 1
        if j > ell:
            return False
        key = tuple(sorted(A + (v,), key=vertex_key))
        return H._deg[ell][key] + 1 > caps[(ell, j)] + 1e-9

    worst = 0

    def walk(prefix):
        nonlocal worst
        x = prefix[-1][0]
        blocked = 0
        for y in below[x]:
            for c in range(1, H.m + 1):
                if not T.sets[y] >> (c - 1) & 1:
                    continue
                v = (y, c)
                if any(
                    saturated(A, v, ell)
                    for ell in ells
                    for r in range(1, min(len(prefix), ell - 1) + 1)
                    for A in combinations(prefix, r)
                ):
                    blocked += 1
        worst = max(worst, blocked)
        if len(prefix) < depth:
            for y in below[x]:
                for c in range(1, H.m + 1):
                    if T.sets[y] >> (c - 1) & 1:
                        walk(prefix + ((y, c),))

    for x in support:
        for c in range(1, H.m + 1):
            if T.sets[x] >> (c - 1) & 1:
                walk(((x, c),))
    return worst
