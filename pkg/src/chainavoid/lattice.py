"""Boolean lattice P([n]) on bitmasks.

An element is an ``int`` whose set bits (positions ``0..n-1``) are its members.
Canonical order everywhere is (rank ascending, mask ascending).
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations, permutations
from math import comb, factorial

import numpy as np

from .errors import ParameterError

MAX_N = 24

Chain = tuple[int, ...]


def rank(x: int) -> int:
    return x.bit_count()


def members(x: int) -> list[int]:
    return [i for i in range(x.bit_length()) if x >> i & 1]


def check_element(x: int, n: int) -> None:
    if x < 0 or x >> n:
        raise ParameterError(f"element {x:#b} has bits outside [0, {n})")


def _check_n(n: int) -> None:
    if not 0 <= n <= MAX_N:
        raise ParameterError(f"n must lie in [0, {MAX_N}], got {n}")


def layer(n: int, j: int) -> list[int]:
    """All rank-``j`` elements of P([n]) in ascending mask order."""
    _check_n(n)
    if not 0 <= j <= n:
        raise ParameterError(f"layer index j={j} outside [0, {n}]")
    return sorted(sum(1 << i for i in c) for c in combinations(range(n), j))


@lru_cache(maxsize=32)
def canonical_order(n: int) -> tuple[int, ...]:
    _check_n(n)
    return tuple(x for j in range(n + 1) for x in layer(n, j))


def canonical_key(x: int) -> tuple[int, int]:
    return (x.bit_count(), x)


def is_subset(x: int, y: int) -> bool:
    return x & y == x


def is_proper_subset(x: int, y: int) -> bool:
    return x & y == x and x != y


def predecessors(x: int) -> list[int]:
    """Immediate predecessors (x minus one member)."""
    return [x & ~(1 << i) for i in members(x)]


def middle_binomial(n: int) -> int:
    return comb(n, n // 2)


def make_rng(seed: int | None) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_maximal_chain(n: int, rng: np.random.Generator) -> Chain:
    """Uniform maximal chain ∅ ⊊ ... ⊊ [n], bottom-to-top."""
    _check_n(n)
    return chain_from_order([int(i) for i in rng.permutation(n)])


def random_maximal_chain_below(x: int, rng: np.random.Generator) -> Chain:
    """Uniform maximal chain from ∅ up to ``x``."""
    bits = members(x)
    return chain_from_order([bits[int(i)] for i in rng.permutation(len(bits))])


def chain_from_order(order) -> Chain:
    out = [0]
    for i in order:
        out.append(out[-1] | 1 << i)
    return tuple(out)


def maximal_chains_below(x: int, limit: int = 10**6):
    """Yield all rank(x)! maximal chains from ∅ to ``x``."""
    if factorial(rank(x)) > limit:
        raise ParameterError(f"{rank(x)}! chains below {x:#b} exceed limit {limit}")
    for order in permutations(members(x)):
        yield chain_from_order(order)


def maximal_chains(n: int, limit: int = 10**6):
    yield from maximal_chains_below((1 << n) - 1, limit)


def is_maximal_chain(chain, top: int) -> bool:
    """True iff ``chain`` runs from ∅ to ``top`` adding exactly one bit per step."""
    if not chain or chain[0] != 0 or chain[-1] != top:
        return False
    return all(
        is_proper_subset(a, b) and rank(b) == rank(a) + 1 for a, b in zip(chain, chain[1:])
    )
