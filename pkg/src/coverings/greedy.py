"""Random greedy coverings with early abort.

The random ordering of all k-sets is realized lazily as an i.i.d. stream of
uniform k-sets. A repeated k-set is never clean the second time, so skipping
it matches walking a uniformly random permutation. After ``budget`` draws the
packing phase stops and every t-set still uncovered gets a block of its own.

With ``saturate=True`` the packing phase is instead run to the true end of the
random ordering: after the budgeted draws, all still-clean k-sets are
enumerated and visited in random order. Those k-sets have never been drawn, so
their relative order in the full permutation is uniform and the result has
exactly the distribution of the unabridged algorithm.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import TypeVar

import numpy as np

from coverings import _kernels
from coverings.combinatorics import binomial
from coverings.design import CoverageBitmap, CoveringDesign, DesignParams
from coverings.errors import BudgetError, ParameterError

DEFAULT_BETA = 2.0
#: draws generated per call into the compiled packing loop
CHUNK = 1 << 16
#: refuse a saturation scan when C(v,k) is beyond this
SATURATE_LIMIT = 10**10
#: with saturate=True and no explicit budget, draws made before the scan, in
#: units of C(v,t)/C(k,t); any value gives the same distribution, this is fast
SATURATE_TAU = 10

T = TypeVar("T")


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent stream for trial ``trial`` of a run seeded with ``seed``.

    Uses :class:`numpy.random.SeedSequence` with ``spawn_key=(trial,)``, the
    same derivation as ``SeedSequence(seed).spawn(...)[trial]``, so results do
    not depend on which worker runs which trial.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))


def map_trials(fn: Callable[[int], T], n: int, threads: int = 1) -> list[T]:
    if threads <= 1 or n <= 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n)))


def default_budget(p: DesignParams, beta: float = DEFAULT_BETA) -> int:
    """``ceil(beta * v**t * ln v)`` draws, at least 1."""
    b = math.ceil(beta * p.v**p.t * math.log(p.v))
    if b > np.iinfo(np.int64).max:
        raise BudgetError(f"draw budget {b} overflows int64")
    return max(1, b)


@dataclass(frozen=True)
class GreedyConfig:
    seed: int = 0
    budget: int | None = None  # None: see budget_for
    record_trajectory: bool = False
    saturate: bool = False
    beta: float = DEFAULT_BETA

    def __post_init__(self):
        if self.budget is not None and self.budget < 1:
            raise ParameterError(f"budget must be >= 1, got {self.budget}")

    def budget_for(self, p: DesignParams) -> int:
        if self.budget is not None:
            return self.budget
        if self.saturate:
            return max(1, math.ceil(SATURATE_TAU * p.n_tsets / p.tsets_per_block))
        return default_budget(p, self.beta)


@dataclass
class GreedyStats:
    draws_used: int = 0
    blocks_from_packing: int = 0
    blocks_from_completion: int = 0
    uncovered_at_abort: int = 0
    saturation_candidates: int = 0
    trajectory: np.ndarray | None = field(default=None, repr=False)

    @property
    def total_blocks(self) -> int:
        return self.blocks_from_packing + self.blocks_from_completion

    def trajectory_pairs(self) -> list[tuple[int, int]]:
        """``(draw index, covered count)`` after each draw, 1-based draw index."""
        if self.trajectory is None:
            return []
        return [(i + 1, int(c)) for i, c in enumerate(self.trajectory)]


def _saturate(bm: CoverageBitmap, rng: np.random.Generator, accepted: np.ndarray, n_acc: int) -> tuple[int, int]:
    p = bm.params
    if binomial(p.v, p.k) > SATURATE_LIMIT:
        raise BudgetError(f"saturation scan over C({p.v},{p.k}) k-sets refused")
    buf = np.empty((1 << 15, p.k), dtype=np.int64)
    while True:
        n = _kernels.clean_ksets(bm.bits, p.v, p.k, p.t, bm.table, buf)
        if n <= len(buf):
            break
        buf = np.empty((n, p.k), dtype=np.int64)
    order = rng.permutation(n)
    covered, n_acc = _kernels.accept_in_order(bm.bits, bm.covered_count, buf, order, p.t, bm.table, accepted, n_acc)
    bm.covered_count = covered
    return n, n_acc


def _pack(
    p: DesignParams,
    rng: np.random.Generator,
    budget: int,
    record_trajectory: bool = False,
    saturate: bool = False,
) -> tuple[np.ndarray, CoverageBitmap, GreedyStats]:
    bm = CoverageBitmap(p)
    # a packing holds at most C(v,t)/C(k,t) blocks
    accepted = np.empty((bm.total // p.tsets_per_block, p.k), dtype=np.int64)
    trajectory = np.zeros(budget if record_trajectory else 0, dtype=np.int64)
    highs = np.arange(p.v - p.k + 1, p.v + 1, dtype=np.int64)
    stats = GreedyStats()
    n_acc = 0
    used = 0
    while used < budget and not bm.is_full:
        m = min(CHUNK, budget - used)
        raw = rng.integers(0, highs, size=(m, p.k), dtype=np.int64)
        done, covered, n_acc = _kernels.pack_draws(
            bm.bits, bm.covered_count, bm.total, raw, p.v, p.t, bm.table, accepted, n_acc, trajectory, used
        )
        bm.covered_count = covered
        used += done
    stats.draws_used = used
    if record_trajectory:
        stats.trajectory = trajectory[:used]
    if saturate and not bm.is_full:
        stats.saturation_candidates, n_acc = _saturate(bm, rng, accepted, n_acc)
    stats.blocks_from_packing = n_acc
    stats.uncovered_at_abort = bm.total - bm.covered_count
    return accepted[:n_acc].copy(), bm, stats


def greedy_pack(p: DesignParams, cfg: GreedyConfig = GreedyConfig(), rng: np.random.Generator | None = None):
    """Steps 1-3: accept each drawn k-set that contains no covered t-set.

    Returns ``(blocks, bitmap, stats)`` where ``blocks`` is an int64 array of
    the accepted (pairwise t-set-disjoint) blocks in acceptance order.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    return _pack(p, rng, cfg.budget_for(p), cfg.record_trajectory, cfg.saturate)


def greedy_complete(partial: np.ndarray | Sequence[Sequence[int]], bm: CoverageBitmap, stats: GreedyStats | None = None) -> CoveringDesign:
    """Step 4: one block per remaining t-set, visited in colex order.

    Each uncovered t-set is padded with the smallest points outside it. A t-set
    already covered by an earlier completion block is skipped.
    """
    p = bm.params
    extra = complete_blocks(bm)
    if stats is not None:
        stats.blocks_from_completion = len(extra)
    partial = np.asarray(partial, dtype=np.int64).reshape(-1, p.k)
    return CoveringDesign.from_array(p, np.concatenate([partial, extra]))


def complete_blocks(bm: CoverageBitmap) -> np.ndarray:
    """Completion blocks for ``bm`` as an int64 array; marks them in ``bm``."""
    p = bm.params
    out = np.empty((bm.total - bm.covered_count, p.k), dtype=np.int64)
    n, fresh = _kernels.complete_uncovered(bm.bits, bm.total, p.v, p.k, p.t, bm.table, out)
    bm.covered_count += fresh
    return out[:n]


def greedy_cover(p: DesignParams, cfg: GreedyConfig = GreedyConfig(), rng: np.random.Generator | None = None):
    """Random greedy (v,k,t) covering. Returns ``(design, stats)``."""
    blocks, bm, stats = greedy_pack(p, cfg, rng)
    design = greedy_complete(blocks, bm, stats)
    return design, stats


def uncovered_fraction_at_tau(
    p: DesignParams, tau: float, trials: int, seed: int = 0, threads: int = 1
) -> tuple[float, float]:
    """Mean fraction of t-sets left uncovered after packing up to time ``tau``.

    In the continuous-time model every k-set arrives at rate 1/C(v-t,k-t), so
    time ``tau`` corresponds to ``round(tau * C(v,t) / C(k,t))`` draws.
    Returns ``(mean, standard error)``.
    """
    if tau < 0 or trials < 1:
        raise ParameterError("need tau >= 0 and trials >= 1")
    m = round(tau * p.n_tsets / p.tsets_per_block)
    if m == 0:
        return 1.0, 0.0

    def one(i: int) -> float:
        _, bm, _ = _pack(p, trial_rng(seed, i), m)
        return (bm.total - bm.covered_count) / bm.total

    fr = np.array(map_trials(one, trials, threads))
    se = float(fr.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return float(fr.mean()), se
