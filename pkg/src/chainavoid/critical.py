"""The critical exponent: best weight of a valid template supported on one chain."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .errors import BudgetExceeded, ParameterError, StateSpaceTooLarge
from .patterns import (
    MAX_STATES,
    ForbiddenFamily,
    MatchState,
    _recursion_headroom,
    big_L,
    format_colorset,
    nonempty_colorsets,
    require_sparse,
)
from .templates import ChainProfile, chain_template, check_beta, template_validity_oracle, weighted_size

MAX_PROFILES = 64
TIE_TOL = 1e-12
ORACLE_BUDGET = 10**8


@dataclass
class CriticalResult:
    omega_crit: float
    optimal_profiles: list[ChainProfile]
    L: int
    truncated: bool = False
    states_explored: int = field(default=0, compare=False)

    def format_profiles(self) -> list[str]:
        return ["(" + ",".join(format_colorset(s) for s in p) + ")" for p in self.optimal_profiles]


def omega_crit(
    family: ForbiddenFamily,
    beta: Sequence[float] | None = None,
    *,
    max_profiles: int = MAX_PROFILES,
    max_states: int = MAX_STATES,
) -> CriticalResult:
    """Longest path over match states; each edge appends a nonempty color set.

    Edges that would complete a pattern are dropped, so every path spells a
    valid chain template. Sparsity makes the graph acyclic.
    """
    require_sparse(family)
    beta = check_beta(beta, family.m)
    fam = family.minimal
    a = fam.automaton
    edges = [(s, math.log1p(weighted_size(s, beta))) for s in nonempty_colorsets(fam.m)]
    best: dict[MatchState, float] = {}
    succ: dict[MatchState, list] = {}

    def solve(state):
        got = best.get(state)
        if got is not None:
            return got
        if len(best) >= max_states:
            raise StateSpaceTooLarge(
                f"state space too large: explored {len(best)} states "
                f"(product bound {a.state_space_size()})"
            )
        options = []
        value = 0.0
        for s, w in edges:
            nxt = a.step_valid(state, s)
            if nxt is None:
                continue
            v = w + solve(nxt)
            options.append((s, w, nxt))
            value = max(value, v)
        succ[state] = options
        best[state] = value
        return value

    L = big_L(family)
    with _recursion_headroom(L + 100):
        top = solve(a.start)

    profiles: list[ChainProfile] = []
    truncated = False

    def collect(state, acc, path):
        nonlocal truncated
        if truncated:
            return
        if not succ[state]:
            if acc >= top - TIE_TOL:
                if len(profiles) >= max_profiles:
                    truncated = True
                    return
                profiles.append(tuple(path))
            return
        for s, w, nxt in succ[state]:
            if acc + w + best[nxt] >= top - TIE_TOL:
                collect(nxt, acc + w, path + [s])

    collect(a.start, 0.0, [])
    uniq = sorted(set(profiles), key=lambda p: (len(p), [_colors_key(s) for s in p]))
    return CriticalResult(top, uniq, L, truncated, len(best))


def _colors_key(mask: int) -> tuple[int, ...]:
    return tuple(i + 1 for i in range(mask.bit_length()) if mask >> i & 1)


def omega_crit_oracle(family: ForbiddenFamily, beta: Sequence[float] | None, max_len: int) -> float:
    """Brute force over color-set sequences of length <= max_len.

    Each candidate is placed on a single chain and checked by the coloring
    oracle; an invalid prefix cuts off all of its extensions.
    """
    beta = check_beta(beta, family.m)
    if (1 << family.m) ** max_len > ORACLE_BUDGET:
        raise BudgetExceeded(f"(2^{family.m})^{max_len} sequences exceed budget {ORACLE_BUDGET}")
    weights = {s: math.log1p(weighted_size(s, beta)) for s in nonempty_colorsets(family.m)}
    best = 0.0

    def extend(prefix, value):
        nonlocal best
        best = max(best, value)
        if len(prefix) == max_len:
            return
        for s, w in weights.items():
            cand = prefix + (s,)
            if template_validity_oracle(chain_template(cand), family):
                extend(cand, value + w)

    extend((), 0.0)
    return best


def check_probability_vector(p: Sequence[float], m: int) -> tuple:
    p = tuple(p)
    if len(p) != m:
        raise ParameterError(f"p: expected {m} probabilities, got {len(p)}")
    if any(not pi > 0 for pi in p):
        raise ParameterError("p: probabilities must be positive (drop a zero-probability color instead)")
    if sum(p) > 1 + 1e-12:
        raise ParameterError(f"p: probabilities sum to {sum(p)} > 1")
    return p


def expectation_exponent(family: ForbiddenFamily, p: Sequence[float]) -> float:
    """Exponent constant of the expected number of valid subsets of a random coloring."""
    p = check_probability_vector(p, family.m)
    return omega_crit(family, p).omega_crit
