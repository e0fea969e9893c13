"""Affine-geometry coverings over GF(p) and induced coverings of arbitrary v.

Points of AG(t, p) are coordinate vectors in GF(p)^t, indexed by their base-p
encoding with the first coordinate most significant. A hyperplane is the
solution set of ``d . x = b`` where the direction ``d`` is normalized so its
first nonzero coordinate is 1; that gives ``(p^t - 1)/(p - 1)`` directions
times ``p`` offsets, each hyperplane listed once.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from coverings.combinatorics import binomial
from coverings.design import CoveringDesign, DesignParams, read_design, verify, write_design
from coverings.errors import BudgetError, CoveringError, ParameterError
from coverings.greedy import SATURATE_LIMIT, GreedyConfig, greedy_cover

log = logging.getLogger(__name__)

#: largest p^t for which the full AG covering is materialized
AG_POINT_BUDGET = 10**6


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def primes_in(lo: int, hi: int) -> list[int]:
    """Primes ``p`` with ``lo <= p <= hi``."""
    if hi < 2:
        return []
    sieve = np.ones(hi + 1, dtype=bool)
    sieve[:2] = False
    for f in range(2, math.isqrt(hi) + 1):
        if sieve[f]:
            sieve[f * f :: f] = False
    return [int(x) for x in np.flatnonzero(sieve) if x >= lo]


def directions(p: int, t: int) -> np.ndarray:
    """All normalized hyperplane directions of GF(p)^t, one per row."""
    rows = []
    for lead in range(t):
        for tail in itertools.product(range(p), repeat=t - lead - 1):
            rows.append((0,) * lead + (1,) + tail)
    return np.array(rows, dtype=np.int64)


def decode_points(codes: np.ndarray, p: int, t: int) -> np.ndarray:
    """Base-p codes -> ``(n, t)`` coordinate array."""
    codes = np.asarray(codes, dtype=np.int64)
    out = np.empty((len(codes), t), dtype=np.int64)
    for i in range(t - 1, -1, -1):
        out[:, i] = codes % p
        codes = codes // p
    return out


@dataclass(frozen=True)
class AffinePlaneCovering:
    p: int
    t: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise ParameterError(f"{self.p} is not prime")
        if self.t < 2:
            raise ParameterError(f"dimension t must be >= 2, got {self.t}")

    @property
    def n_points(self) -> int:
        return self.p**self.t

    @property
    def n_hyperplanes(self) -> int:
        return (self.p ** (self.t + 1) - self.p) // (self.p - 1)

    def hyperplanes(self):
        """Yield ``(direction, offset, point codes)`` in enumeration order."""
        coords = decode_points(np.arange(self.n_points), self.p, self.t)
        for d in directions(self.p, self.t):
            vals = coords @ d % self.p
            order = np.argsort(vals, kind="stable")
            bounds = np.searchsorted(vals[order], np.arange(self.p + 1))
            for b in range(self.p):
                yield d, b, order[bounds[b] : bounds[b + 1]]

    def design(self) -> CoveringDesign:
        params = DesignParams(self.n_points, self.p ** (self.t - 1), self.t)
        blocks = np.array([pts for _, _, pts in self.hyperplanes()], dtype=np.int64)
        return CoveringDesign.from_array(params, blocks)


def ag_hyperplane_covering(p: int, t: int) -> CoveringDesign:
    """The (p^t, p^(t-1), t) covering formed by all hyperplanes of AG(t, p)."""
    ag = AffinePlaneCovering(p, t)
    if ag.n_points > AG_POINT_BUDGET:
        raise BudgetError(f"AG({t},{p}) has {ag.n_points} points, over the budget of {AG_POINT_BUDGET}")
    return ag.design()


@dataclass(frozen=True)
class InducedConfig:
    ell: int
    p: int
    precompute_trials: int | None = None  # None: ceil(log2 l') + 1 per cached size
    seed: int = 0

    def cache_range(self, k: int, t: int) -> range:
        """Intersection sizes served from the cache: ell < l' < 9 ell, l' >= max(k, t)."""
        return range(max(self.ell + 1, k, t), 9 * self.ell)


def ell_for(v: int, t: int) -> int:
    """``ceil(v^(1 - 1/t) / 9)`` in exact integer arithmetic."""
    # smallest ell with (9 ell)^t >= v^(t-1)
    target = v ** (t - 1)
    ell = max(1, int(v ** (1 - 1 / t) / 9))
    while ell > 1 and (9 * (ell - 1)) ** t >= target:
        ell -= 1
    while (9 * ell) ** t < target:
        ell += 1
    return ell


def select_induced_params(params: DesignParams, seed: int = 0) -> InducedConfig:
    """Pick ``ell`` and the smallest prime ``p`` with ``4 ell p <= v - t <= 8 ell p`` and ``p^t > v``."""
    v, k, t = params.v, params.k, params.t
    if t < 2:
        raise ParameterError("induced coverings need t >= 2; use greedy instead")
    ell = ell_for(v, t)
    lo = -(-(v - t) // (8 * ell))
    hi = (v - t) // (4 * ell)
    # with ell rounded up, the smallest prime in the interval can fall short of
    # p^t > v (e.g. v=529, t=2 gives p=23), so both conditions are applied
    candidates = [q for q in primes_in(max(lo, 2), hi) if q**t > v]
    if not candidates:
        raise ParameterError(
            f"no prime p with 4*{ell}*p <= {v - t} <= 8*{ell}*p and p^{t} > {v}; v is too small, use greedy instead"
        )
    p = candidates[0]
    assert 4 * ell * p <= v - t <= 8 * ell * p and p**t > v
    if 9 * ell - 1 < max(k, t):
        raise ParameterError(f"no cacheable intersection size for k={k} with ell={ell}; use greedy instead")
    return InducedConfig(ell=ell, p=p, seed=seed)


def cache_filename(ell_prime: int, k: int, t: int) -> str:
    return f"ellprime-{ell_prime}_k{k}_t{t}.cov"


@dataclass
class SmallCoverCache:
    k: int
    t: int
    ell: int
    designs: dict[int, CoveringDesign] = field(default_factory=dict)

    def __getitem__(self, ell_prime: int) -> CoveringDesign:
        try:
            return self.designs[ell_prime]
        except KeyError:
            raise CoveringError(f"small-cover cache has no ({ell_prime},{self.k},{self.t}) design") from None

    def keys(self) -> range:
        return range(max(self.ell + 1, self.k, self.t), 9 * self.ell)

    def save(self, directory: str | Path) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        for lp, d in sorted(self.designs.items()):
            (directory / cache_filename(lp, self.k, self.t)).write_text(write_design(d), encoding="utf-8")

    @classmethod
    def load(cls, directory: str | Path, k: int, t: int, ell: int) -> SmallCoverCache:
        """Read a cache directory; raises if a size is missing or does not verify."""
        cache = cls(k, t, ell)
        for lp in cache.keys():
            path = Path(directory) / cache_filename(lp, k, t)
            if not path.exists():
                raise CoveringError(f"cache file {path} missing")
            d = read_design(path.read_text(encoding="utf-8"))
            if d.params != DesignParams(lp, k, t) or not verify(d).is_covering:
                raise CoveringError(f"cache file {path} is not a ({lp},{k},{t}) covering")
            cache.designs[lp] = d
        return cache


def precompute_small_covers(k: int, t: int, ell: int, seed: int = 0, trials: int | None = None) -> SmallCoverCache:
    """Best of ``ceil(log2 l') + 1`` greedy runs for every cached size ``l'``."""
    if ell < 1:
        raise ParameterError(f"ell must be >= 1, got {ell}")
    cache = SmallCoverCache(k, t, ell)
    for lp in cache.keys():
        params = DesignParams(lp, k, t)
        n_trials = trials if trials is not None else math.ceil(math.log2(lp)) + 1
        saturate = binomial(lp, k) <= SATURATE_LIMIT
        best = None
        for i in range(n_trials):
            rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(lp, i)))
            d, _ = greedy_cover(params, GreedyConfig(saturate=saturate), rng)
            if not verify(d).is_covering:
                raise CoveringError(f"greedy produced a non-covering for {params}")
            if best is None or len(d) < len(best):
                best = d
        cache.designs[lp] = best.canonical()
    return cache


def sample_points(v: int, p: int, t: int, rng: np.random.Generator) -> np.ndarray:
    """``v`` distinct random base-p codes of points of GF(p)^t, in draw order."""
    n = p**t
    if v > n:
        raise ParameterError(f"cannot choose {v} distinct points from {n}")
    seen: set[int] = set()
    codes: list[int] = []
    while len(codes) < v:
        for c in rng.integers(0, n, size=2 * (v - len(codes))).tolist():
            if c not in seen:
                seen.add(c)
                codes.append(c)
                if len(codes) == v:
                    break
    return np.array(codes, dtype=np.int64)


@dataclass
class InducedStats:
    p: int
    ell: int
    hyperplanes: int = 0
    cached: int = 0
    trivial: int = 0
    blocks_from_cache: int = 0
    blocks_trivial: int = 0
    ell_prime_hist: Counter = field(default_factory=Counter)

    @property
    def small_prime(self) -> bool:
        # the analysis behind the parameter choice assumes p >= 5
        return self.p < 5


def _trivial_blocks(S: np.ndarray, v: int, k: int, t: int) -> list[tuple[int, ...]]:
    """One k-block per t-subset of S, padded with the smallest points of S,
    then of the rest of V, not already in it."""
    inside = set(S.tolist())
    outside = (x for x in range(v) if x not in inside)
    pad_pool = S.tolist() + list(itertools.islice(outside, k))
    out = []
    for T in itertools.combinations(S.tolist(), t):
        block = set(T)
        for x in pad_pool:
            if len(block) == k:
                break
            block.add(int(x))
        out.append(tuple(sorted(block)))
    return out


def induced_cover(params: DesignParams, cache: SmallCoverCache, cfg: InducedConfig) -> tuple[CoveringDesign, InducedStats]:
    """Cover ``range(v)`` by embedding it at random in AG(t, p).

    Point ``i`` of the design is the ``i``-th sampled point of GF(p)^t. Every
    hyperplane meets the sample in a set S; sizes in the cache range get the
    cached covering relabeled onto S (ascending order to ascending order),
    any other size gets one padded block per t-subset of S.
    """
    v, k, t = params.v, params.k, params.t
    if (cache.k, cache.t, cache.ell) != (k, t, cfg.ell):
        raise ParameterError("cache does not match (k, t, ell)")
    rng = np.random.default_rng(cfg.seed)
    codes = sample_points(v, cfg.p, t, rng)
    coords = decode_points(codes, cfg.p, t)
    cached_range = cfg.cache_range(k, t)
    relabeled = {lp: cache[lp].as_array() for lp in cached_range}
    stats = InducedStats(p=cfg.p, ell=cfg.ell)
    chunks: list[np.ndarray] = []
    for d in directions(cfg.p, t):
        vals = coords @ d % cfg.p
        order = np.argsort(vals, kind="stable")
        bounds = np.searchsorted(vals[order], np.arange(cfg.p + 1))
        for b in range(cfg.p):
            S = order[bounds[b] : bounds[b + 1]]
            lp = len(S)
            stats.hyperplanes += 1
            stats.ell_prime_hist[lp] += 1
            if lp in cached_range:
                blocks = S[relabeled[lp]]
                stats.cached += 1
                stats.blocks_from_cache += len(blocks)
            else:
                triv = _trivial_blocks(S, v, k, t)
                blocks = np.array(triv, dtype=np.int64).reshape(-1, k)
                stats.trivial += 1
                stats.blocks_trivial += len(blocks)
            chunks.append(blocks)
    all_blocks = np.concatenate(chunks) if chunks else np.empty((0, k), dtype=np.int64)
    return CoveringDesign.from_array(params, all_blocks), stats
