"""Covering-design data model, coverage bookkeeping, verification and I/O."""

from __future__ import annotations

import itertools
import json
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal

import numpy as np

from coverings import _kernels
from coverings.combinatorics import (
    Subset,
    binomial,
    binomial_table,
    colex_rank,
    colex_unrank,
)
from coverings.errors import BudgetError, DesignFormatError, ParameterError

#: Largest number of t-subsets (bits) an exhaustive check will allocate.
EXHAUSTIVE_BUDGET = 10**8


@dataclass(frozen=True, order=True)
class DesignParams:
    v: int
    k: int
    t: int

    def __post_init__(self):
        if not 1 <= self.t <= self.k <= self.v:
            raise ParameterError(f"need 1 <= t <= k <= v, got (v,k,t)=({self.v},{self.k},{self.t})")

    @property
    def n_tsets(self) -> int:
        return binomial(self.v, self.t)

    @property
    def tsets_per_block(self) -> int:
        return binomial(self.k, self.t)

    def __str__(self):
        return f"({self.v},{self.k},{self.t})"


def _as_block(block: Iterable[int], params: DesignParams) -> Subset:
    b = tuple(sorted(int(x) for x in block))
    if len(b) != params.k or len(set(b)) != params.k:
        raise ParameterError(f"block {b} is not a {params.k}-set")
    if b and (b[0] < 0 or b[-1] >= params.v):
        raise ParameterError(f"block {b} has points outside range({params.v})")
    return b


@dataclass(frozen=True)
class CoveringDesign:
    """A (v,k,t) block family. Being a covering is checked by :func:`verify`."""

    params: DesignParams
    blocks: tuple[Subset, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(_as_block(b, self.params) for b in self.blocks))

    @classmethod
    def from_array(cls, params: DesignParams, blocks: np.ndarray) -> CoveringDesign:
        """Build from an ``(n, k)`` int array, validated in bulk."""
        a = np.sort(np.asarray(blocks, dtype=np.int64).reshape(-1, params.k), axis=1)
        if a.size and (a[:, 0].min() < 0 or a[:, -1].max() >= params.v or (np.diff(a, axis=1) <= 0).any()):
            raise ParameterError(f"blocks are not {params.k}-subsets of range({params.v})")
        d = object.__new__(cls)
        object.__setattr__(d, "params", params)
        object.__setattr__(d, "blocks", tuple(map(tuple, a.tolist())))
        return d

    def __len__(self):
        return len(self.blocks)

    def canonical(self) -> CoveringDesign:
        d = object.__new__(CoveringDesign)
        object.__setattr__(d, "params", self.params)
        object.__setattr__(d, "blocks", tuple(sorted(self.blocks)))
        return d

    def as_array(self) -> np.ndarray:
        if not self.blocks:
            return np.empty((0, self.params.k), dtype=np.int64)
        return np.asarray(self.blocks, dtype=np.int64)


class CoverageBitmap:
    """One bit per t-subset of ``range(v)``, indexed by colex rank."""

    def __init__(self, params: DesignParams, budget: int = EXHAUSTIVE_BUDGET):
        n = params.n_tsets
        if n > budget:
            raise BudgetError(f"{n} t-subsets exceed the bitmap budget of {budget}")
        self.params = params
        self.total = n
        self.bits = np.zeros((n + 7) // 8, dtype=np.uint8)
        self.covered_count = 0
        self.table = binomial_table(params.v, params.t)

    def _array(self, block: Sequence[int]) -> np.ndarray:
        return np.asarray(_as_block(block, self.params), dtype=np.int64)

    def mark_block(self, block: Sequence[int]) -> int:
        fresh = _kernels.mark_block(self.bits, self._array(block), self.params.t, self.table)
        self.covered_count += fresh
        return fresh

    def mark_blocks(self, blocks: np.ndarray) -> int:
        if len(blocks) == 0:
            return 0
        fresh = _kernels.mark_blocks(self.bits, np.ascontiguousarray(blocks, dtype=np.int64), self.params.t, self.table)
        self.covered_count += fresh
        return fresh

    def block_is_clean(self, block: Sequence[int]) -> bool:
        return bool(_kernels.block_is_clean(self.bits, self._array(block), self.params.t, self.table))

    def mark_tset(self, tset: Sequence[int]) -> bool:
        """Set a single t-subset; True if it was not set before."""
        if len(tset) != self.params.t:
            raise ParameterError(f"{tuple(tset)} is not a {self.params.t}-set")
        r = colex_rank(tset)
        if r >= self.total:
            raise ParameterError(f"{tuple(tset)} has points outside range({self.params.v})")
        if self.is_covered(tset):
            return False
        self.bits[r >> 3] |= np.uint8(1 << (r & 7))
        self.covered_count += 1
        return True

    def is_covered(self, tset: Sequence[int]) -> bool:
        r = colex_rank(tset)
        return bool((self.bits[r >> 3] >> (r & 7)) & 1)

    def uncovered(self) -> np.ndarray:
        """Colex ranks of all t-subsets not yet covered, ascending."""
        return _kernels.uncovered_ranks(self.bits, self.total)

    @property
    def is_full(self) -> bool:
        return self.covered_count == self.total

    def __repr__(self):
        return f"CoverageBitmap({self.params}, covered={self.covered_count}/{self.total})"


def mark_block(bm: CoverageBitmap, block: Sequence[int]) -> int:
    return bm.mark_block(block)


def block_is_clean(bm: CoverageBitmap, block: Sequence[int]) -> bool:
    return bm.block_is_clean(block)


def density(d: CoveringDesign) -> Fraction:
    """Average number of blocks containing a t-set, as an exact fraction."""
    p = d.params
    return Fraction(len(d.blocks) * p.tsets_per_block, p.n_tsets)


@dataclass(frozen=True)
class VerifyReport:
    mode: Literal["exhaustive", "sampled"]
    checked: int
    uncovered_found: tuple[Subset, ...] = ()
    n_uncovered: int = 0
    # None in sampled mode: a sample cannot certify a covering
    is_covering: bool | None = None
    truncated: bool = field(default=False)

    @property
    def ok(self) -> bool:
        return self.n_uncovered == 0


def verify(
    d: CoveringDesign,
    mode: Literal["exhaustive", "sampled"] = "exhaustive",
    n: int = 10**6,
    rng: np.random.Generator | None = None,
    budget: int = EXHAUSTIVE_BUDGET,
    max_report: int = 100,
) -> VerifyReport:
    """Check that every t-subset lies in some block.

    Exhaustive mode is definitive but needs a bitmap of C(v,t) bits; it
    refuses designs beyond ``budget``. Sampled mode tests ``n`` uniform random
    t-subsets and only ever reports failures.
    """
    p = d.params
    if mode == "exhaustive":
        if p.n_tsets > budget:
            raise BudgetError(
                f"C({p.v},{p.t}) = {p.n_tsets} t-subsets exceeds the exhaustive budget {budget}; use sampled mode"
            )
        bm = CoverageBitmap(p, budget=budget)
        bm.mark_blocks(d.as_array())
        missing = bm.uncovered()
        shown = tuple(colex_unrank(int(r), p.t) for r in missing[:max_report])
        return VerifyReport(
            mode="exhaustive",
            checked=p.n_tsets,
            uncovered_found=shown,
            n_uncovered=len(missing),
            is_covering=len(missing) == 0,
            truncated=len(missing) > max_report,
        )
    if mode != "sampled":
        raise ParameterError(f"unknown verify mode {mode!r}")
    if rng is None:
        rng = np.random.default_rng(0)
    blocks = d.as_array()
    sample = np.sort(_floyd_rows(p.v, p.t, n, rng), axis=1)
    cols = [list(c) for c in itertools.combinations(range(p.k), p.t)]
    try:
        table = binomial_table(p.v, p.t)
    except BudgetError:
        # ranks overflow int64; fall back to hashing t-subsets as tuples
        seen = {tuple(row) for c in cols for row in blocks[:, c].tolist()}
        bad = np.array([tuple(row) not in seen for row in sample.tolist()], dtype=bool)
    else:
        covered = np.unique(np.concatenate([_rank_rows(blocks[:, c], table) for c in cols]))
        bad = ~np.isin(_rank_rows(sample, table), covered)
    n_bad = int(bad.sum())
    found = [tuple(map(int, row)) for row in sample[bad][:max_report]]
    return VerifyReport(
        mode="sampled",
        checked=n,
        uncovered_found=tuple(found),
        n_uncovered=n_bad,
        truncated=n_bad > max_report,
    )


def _rank_rows(rows: np.ndarray, table: np.ndarray) -> np.ndarray:
    """Colex ranks of the sorted rows of ``rows``."""
    ranks = np.zeros(len(rows), dtype=np.int64)
    for i in range(rows.shape[1]):
        ranks += table[rows[:, i], i + 1]
    return ranks


def _floyd_rows(v: int, r: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` independent uniform r-subsets of ``range(v)`` (rows unsorted)."""
    out = np.empty((n, r), dtype=np.int64)
    for j in range(r):
        top = v - r + j
        x = rng.integers(0, top + 1, size=n, dtype=np.int64)
        clash = (out[:, :j] == x[:, None]).any(axis=1)
        out[:, j] = np.where(clash, top, x)
    return out


def write_design(d: CoveringDesign) -> str:
    c = d.canonical()
    p = c.params
    header = json.dumps({"v": p.v, "k": p.k, "t": p.t, "blocks": len(c.blocks)}, separators=(",", ":"))
    lines = [header] + [" ".join(map(str, b)) for b in c.blocks]
    return "\n".join(lines) + "\n"


def read_design(text: str) -> CoveringDesign:
    if not text.endswith("\n"):
        raise DesignFormatError("design text must end with a newline")
    lines = text[:-1].split("\n")
    try:
        header = json.loads(lines[0])
        params = DesignParams(int(header["v"]), int(header["k"]), int(header["t"]))
        n_blocks = int(header["blocks"])
    except (ValueError, KeyError, TypeError) as exc:
        raise DesignFormatError(f"line 1: bad header: {exc}") from None
    body = lines[1:] if lines[1:] != [""] else []
    if len(body) != n_blocks:
        raise DesignFormatError(f"header announces {n_blocks} blocks, found {len(body)} lines")
    blocks = []
    for lineno, line in enumerate(body, start=2):
        try:
            b = tuple(int(tok) for tok in line.split(" "))
        except ValueError:
            raise DesignFormatError(f"line {lineno}: not a list of integers: {line!r}") from None
        if len(b) != params.k:
            raise DesignFormatError(f"line {lineno}: expected {params.k} points, got {len(b)}")
        if any(x < 0 or x >= params.v for x in b):
            raise DesignFormatError(f"line {lineno}: point outside range({params.v})")
        if any(b[i] >= b[i + 1] for i in range(len(b) - 1)):
            raise DesignFormatError(f"line {lineno}: points not strictly ascending: {line!r}")
        blocks.append(b)
    return CoveringDesign(params, tuple(blocks))
