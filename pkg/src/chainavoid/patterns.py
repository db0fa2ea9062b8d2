"""Forbidden families of colored chain patterns and greedy subsequence matching.

Colors are ``1..m``. A *color set* is an ``int`` bitmask with bit ``c-1`` standing
for color ``c``. Patterns are read bottom-to-top.
"""

from __future__ import annotations

import hashlib
import json
import math
import sys
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations, product
from typing import Iterable, Sequence

from .errors import BudgetExceeded, NotSparseError, ParameterError, StateSpaceTooLarge

Pattern = tuple[int, ...]
MatchState = tuple[int, ...]

MAX_STATES = 2_000_000
AUGMENT_CAP = 10**6


def cset(*colors: int) -> int:
    """Color set bitmask from color ids."""
    mask = 0
    for c in colors:
        mask |= 1 << (c - 1)
    return mask


def colors_of(mask: int) -> tuple[int, ...]:
    return tuple(i + 1 for i in range(mask.bit_length()) if mask >> i & 1)


def as_mask(colors: int | Iterable[int]) -> int:
    return colors if isinstance(colors, int) else cset(*colors)


def format_colorset(mask: int) -> str:
    return "{" + ",".join(map(str, colors_of(mask))) + "}"


def nonempty_colorsets(m: int) -> range:
    return range(1, 1 << m)


@dataclass(frozen=True)
class ForbiddenFamily:
    """A set of forbidden colored chain patterns over colors ``1..m``.

    Patterns are stored sorted by (length, colors); duplicates and patterns of
    length < 2 are rejected.
    """

    m: int
    patterns: tuple[Pattern, ...]

    def __post_init__(self):
        if not isinstance(self.m, int) or self.m < 1:
            raise ParameterError(f"m must be a positive integer, got {self.m!r}")
        pats = [tuple(int(c) for c in p) for p in self.patterns]
        if not pats:
            raise ParameterError("patterns: family must contain at least one pattern")
        seen = set()
        for p in pats:
            if len(p) < 2:
                raise ParameterError(f"patterns: pattern length < 2: {list(p)}")
            bad = [c for c in p if not 1 <= c <= self.m]
            if bad:
                raise ParameterError(f"patterns: color {bad[0]} out of range 1..{self.m} in {list(p)}")
            if p in seen:
                raise ParameterError(f"patterns: duplicate pattern {list(p)}")
            seen.add(p)
        object.__setattr__(self, "patterns", tuple(sorted(pats, key=lambda p: (len(p), p))))

    @property
    def k(self) -> int:
        return max(len(p) for p in self.patterns)

    def __len__(self) -> int:
        return len(self.patterns)

    def digest(self) -> str:
        blob = json.dumps({"m": self.m, "patterns": self.patterns}, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    @cached_property
    def minimal(self) -> "ForbiddenFamily":
        """Drop patterns containing another pattern as a subsequence.

        Same valid colorings and templates; Y-style occurrence counts differ,
        so only validity machinery uses this.
        """
        keep = []
        for p in self.patterns:  # sorted by length, so shorter ones are seen first
            if not any(_is_subsequence(q, p) for q in keep):
                keep.append(p)
        if len(keep) == len(self.patterns):
            return self
        return ForbiddenFamily(self.m, tuple(keep))

    @cached_property
    def automaton(self) -> "_Automaton":
        return _Automaton(self)

    def contains_all_chains_of_length(self, length: int) -> bool:
        have = {p for p in self.patterns if len(p) == length}
        return len(have) == self.m**length


def _is_subsequence(short: Sequence[int], long: Sequence[int]) -> bool:
    it = iter(long)
    return all(c in it for c in short)


class _Automaton:
    """Per-pattern greedy matcher precomputed for a family."""

    def __init__(self, family: ForbiddenFamily):
        self.lengths = tuple(len(p) for p in family.patterns)
        # needs[p][t]: color-set bit of the (t+1)-st symbol of pattern p
        self.needs = tuple(tuple(1 << (c - 1) for c in p) for p in family.patterns)
        self.start: MatchState = (0,) * len(family.patterns)
        self._rows = tuple(zip(self.lengths, self.needs))

    def step(self, state: MatchState, mask: int) -> MatchState:
        return tuple(
            t + 1 if t < ln and need[t] & mask else t
            for t, (ln, need) in zip(state, self._rows)
        )

    def step_valid(self, state: MatchState, mask: int) -> MatchState | None:
        """Advance, or ``None`` if some pattern becomes fully matched."""
        out = []
        for t, (ln, need) in zip(state, self._rows):
            if t < ln and need[t] & mask:
                t += 1
                if t == ln:
                    return None
            out.append(t)
        return tuple(out)

    def saturated(self, state: MatchState) -> bool:
        return any(t == ln for t, ln in zip(state, self.lengths))

    def state_space_size(self) -> int:
        return math.prod(ln + 1 for ln in self.lengths)


@dataclass(frozen=True)
class SparsityReport:
    is_sparse: bool
    missing_colors: list[int]


def sparsity_report(family: ForbiddenFamily) -> SparsityReport:
    mono = {p[0] for p in family.patterns if len(set(p)) == 1}
    missing = [c for c in range(1, family.m + 1) if c not in mono]
    return SparsityReport(not missing, missing)


def require_sparse(family: ForbiddenFamily) -> None:
    rep = sparsity_report(family)
    if not rep.is_sparse:
        raise NotSparseError(rep.missing_colors)


def initial_state(family: ForbiddenFamily) -> MatchState:
    return family.automaton.start


def advance(family: ForbiddenFamily, state: MatchState, colors: int | Iterable[int]) -> MatchState:
    """One greedy step: each unsaturated pattern advances if its next color is offered."""
    return family.automaton.step(state, as_mask(colors))


def fold_advance(family: ForbiddenFamily, color_sets) -> MatchState:
    a = family.automaton
    state = a.start
    for s in color_sets:
        state = a.step(state, as_mask(s))
    return state


def is_saturated(family: ForbiddenFamily, state: MatchState) -> bool:
    return family.automaton.saturated(state)


def is_violating_chain(colors: Sequence[int], family: ForbiddenFamily) -> bool:
    """Exhaustive check: does some pattern occur as a subsequence of ``colors``?

    ``colors`` lists the colors of a chain bottom-to-top. Independent of the
    automaton on purpose (it is the oracle for it).
    """
    seq = tuple(colors)
    for p in family.patterns:
        if len(p) > len(seq):
            continue
        for idx in combinations(range(len(seq)), len(p)):
            if all(seq[i] == c for i, c in zip(idx, p)):
                return True
    return False


def longest_valid_length(family: ForbiddenFamily, max_states: int = MAX_STATES) -> int:
    """Length of the longest color sequence avoiding every pattern."""
    require_sparse(family)
    fam = family.minimal
    a = fam.automaton
    singles = [1 << c for c in range(fam.m)]
    memo: dict[MatchState, int] = {}

    def longest(state):
        got = memo.get(state)
        if got is not None:
            return got
        if len(memo) >= max_states:
            raise StateSpaceTooLarge(
                f"state space too large: explored {len(memo)} states "
                f"(product bound {a.state_space_size()})"
            )
        best = 0
        for s in singles:
            nxt = a.step_valid(state, s)
            if nxt is not None:
                best = max(best, 1 + longest(nxt))
        memo[state] = best
        return best

    with _recursion_headroom(fam.m * fam.k + 100):
        return longest(a.start)


def big_L(family: ForbiddenFamily) -> int:
    return longest_valid_length(family) + 1


def augment_with_all_chains(family: ForbiddenFamily) -> ForbiddenFamily:
    """Add every color sequence of length k*m. Valid colorings are unchanged."""
    require_sparse(family)
    length = family.k * family.m
    if family.m**length > AUGMENT_CAP:
        raise BudgetExceeded(f"augmenting adds up to {family.m}^{length} patterns (cap {AUGMENT_CAP})")
    have = set(family.patterns)
    extra = [p for p in product(range(1, family.m + 1), repeat=length) if p not in have]
    if not extra:
        return family
    return ForbiddenFamily(family.m, family.patterns + tuple(extra))


def monochromatic_chain(k: int) -> ForbiddenFamily:
    """One color, forbidden k-chain: the k-chain-free sets."""
    return ForbiddenFamily(1, ((1,) * k,))


def random_sparse_family(rng, m: int, max_patterns: int = 5, max_len: int = 3) -> ForbiddenFamily:
    """One monochromatic pattern per color plus random extra patterns (at most max_patterns total)."""
    if max_patterns < m:
        raise ParameterError("patterns: a sparse family needs at least m patterns")
    pats = {(c,) * int(rng.integers(2, max_len + 1)) for c in range(1, m + 1)}
    for _ in range(int(rng.integers(0, max_patterns - m + 1))):
        length = int(rng.integers(2, max_len + 1))
        pats.add(tuple(int(c) for c in rng.integers(1, m + 1, size=length)))
    return ForbiddenFamily(m, tuple(pats))


# Allowed 2-chains are 3<1, 4<1, 4<2; every other ordered pair is forbidden.
FOUR_COLOR_ALLOWED = frozenset({(3, 1), (4, 1), (4, 2)})


def four_color_example() -> ForbiddenFamily:
    pairs = [(a, b) for a in range(1, 5) for b in range(1, 5) if (a, b) not in FOUR_COLOR_ALLOWED]
    return ForbiddenFamily(4, tuple(pairs))


class _recursion_headroom:
    def __init__(self, depth: int):
        self.depth = depth

    def __enter__(self):
        self.old = sys.getrecursionlimit()
        sys.setrecursionlimit(max(self.old, self.depth + 1000))

    def __exit__(self, *exc):
        sys.setrecursionlimit(self.old)
