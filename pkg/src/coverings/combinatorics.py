"""Exact integer combinatorics on fixed-size subsets.

Subsets are plain tuples of strictly increasing non-negative ints. Ranks use
colexicographic order, where ``rank(s) = sum(C(s[i], i + 1))``; the rank of a
subset does not depend on the size of the ground set.
"""

from __future__ import annotations

import functools
import itertools
import math
from collections.abc import Iterator, Sequence

import numpy as np

from coverings.errors import BudgetError, ParameterError

Subset = tuple[int, ...]

INT64_MAX = np.iinfo(np.int64).max


def binomial(n: int, r: int) -> int:
    if n < 0 or r < 0:
        raise ParameterError(f"binomial needs non-negative arguments, got ({n}, {r})")
    return math.comb(n, r)


@functools.lru_cache(maxsize=32)
def binomial_table(n_max: int, r_max: int) -> np.ndarray:
    """int64 table ``T[n, r] = C(n, r)`` for ``n <= n_max``, ``r <= r_max``.

    Used by the compiled kernels. Raises BudgetError if an entry does not fit
    in a signed 64-bit integer instead of letting it wrap.
    """
    if math.comb(n_max, min(r_max, n_max // 2)) > INT64_MAX:
        raise BudgetError(f"C({n_max}, r<={r_max}) overflows int64")
    table = np.zeros((n_max + 1, r_max + 1), dtype=np.int64)
    for n in range(n_max + 1):
        for r in range(min(n, r_max) + 1):
            table[n, r] = math.comb(n, r)
    table.setflags(write=False)
    return table


def _check_subset(s: Sequence[int]) -> None:
    for i, x in enumerate(s):
        if x < 0 or (i and x <= s[i - 1]):
            raise ParameterError(f"not a strictly increasing subset: {tuple(s)}")


def colex_rank(s: Sequence[int]) -> int:
    _check_subset(s)
    return sum(math.comb(x, i + 1) for i, x in enumerate(s))


def colex_unrank(rank: int, r: int) -> Subset:
    if rank < 0 or r < 0:
        raise ParameterError(f"bad colex_unrank arguments ({rank}, {r})")
    out = []
    for i in range(r, 0, -1):
        # largest c with C(c, i) <= rank; c >= i - 1 since C(i-1, i) = 0
        c = i - 1
        while math.comb(c + 1, i) <= rank:
            c += 1
        out.append(c)
        rank -= math.comb(c, i)
    return tuple(reversed(out))


def random_k_subset(v: int, k: int, rng: np.random.Generator) -> Subset:
    """Uniform random k-subset of ``range(v)`` by Floyd's algorithm."""
    if not 0 <= k <= v:
        raise ParameterError(f"cannot draw a {k}-subset from {v} points")
    chosen: set[int] = set()
    for j in range(v - k, v):
        x = int(rng.integers(0, j + 1))
        chosen.add(j if x in chosen else x)
    return tuple(sorted(chosen))


def t_subsets_of(block: Sequence[int], t: int) -> list[Subset]:
    """All t-subsets of ``block`` in colex order."""
    if not 0 <= t <= len(block):
        raise ParameterError(f"t={t} does not fit a block of size {len(block)}")
    return sorted(itertools.combinations(sorted(block), t), key=lambda s: s[::-1])


def all_subsets(v: int, r: int) -> Iterator[Subset]:
    """Every r-subset of ``range(v)`` in colex order (rank 0 first)."""
    if r == 0:
        yield ()
        return
    for top in range(r - 1, v):
        for rest in all_subsets(top, r - 1):
            yield rest + (top,)
