"""Quantitative laws of random greedy coverings and the tools to test them.

* :func:`p_tau` -- probability that a t-set is still uncovered at time tau in
  the idealized dependence tree, ``(tau*D + 1) ** (-1/D)``.
* :func:`simulate_idealized_tree` -- Monte Carlo estimate of the same quantity
  by growing the tree in continuous time.
* :func:`density_experiment` / :func:`fit_alpha` -- mean greedy density over a
  range of v, and the exponent of ``delta - 1 ~ v**-alpha``.
* :func:`clique_statistic` -- how many uncovered t-sets lie in no k-clique of
  the uncovered hypergraph.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from collections.abc import Callable, Iterable, Sequence
from dataclasses import asdict, dataclass

import numpy as np

from coverings import _kernels
from coverings.combinatorics import binomial
from coverings.design import CoverageBitmap, DesignParams
from coverings.errors import BudgetError, CoveringError, ParameterError
from coverings.greedy import GreedyConfig, _pack, complete_blocks, greedy_pack, map_trials, trial_rng

# ---------------------------------------------------------------------------
# closed form and idealized tree


def p_tau(tau: float, D: int) -> float:
    if tau < 0 or D < 1:
        raise ParameterError(f"need tau >= 0 and D >= 1, got tau={tau}, D={D}")
    return (tau * D + 1.0) ** (-1.0 / D)


class TreeExplosion(CoveringError):
    """A simulated tree outgrew ``max_nodes``."""


@dataclass(frozen=True)
class IdealizedTreeConfig:
    tau: float
    D: int
    trials: int = 10_000
    max_nodes: int = 10**6
    seed: int = 0
    safety: float = 10.0

    def __post_init__(self):
        if self.D < 1 or self.tau < 0 or self.trials < 1:
            raise ParameterError("need D >= 1, tau >= 0, trials >= 1")

    @property
    def expected_size(self) -> float:
        """Mean number of t-vertices in the fully grown tree, ``e^(tau D)``."""
        return math.exp(self.tau * self.D)


@dataclass(frozen=True)
class TreeEstimate:
    estimate: float
    stderr: float
    trials: int
    mean_nodes: float
    closed_form: float


class _ExpStream:
    """Buffered unit exponentials from a numpy Generator."""

    def __init__(self, rng: np.random.Generator, size: int = 1024):
        self.rng = rng
        self.size = size
        self.buf = rng.standard_exponential(size).tolist()
        self.i = 0

    def __call__(self) -> float:
        if self.i == self.size:
            self.buf = self.rng.standard_exponential(self.size).tolist()
            self.i = 0
        x = self.buf[self.i]
        self.i += 1
        return x


def _root_uncovered(tau: float, D: int, draw: Callable[[], float], max_nodes: int) -> tuple[bool, int]:
    # Labels are evaluated lazily: a t-vertex stops spawning children as soon
    # as one is accepted, a k-vertex stops at its first covered child. Subtrees
    # are independent, so this does not change the root's label distribution.
    nodes = 0

    def t_uncovered(s: float) -> bool:
        nonlocal nodes
        nodes += 1
        if nodes > max_nodes:
            raise TreeExplosion(f"tree exceeded {max_nodes} nodes")
        # children at the points of a unit-rate Poisson process on (0, s),
        # generated backwards from s
        u = s - draw()
        while u > 0:
            if k_accepted(u):
                return False
            u -= draw()
        return True

    def k_accepted(u: float) -> bool:
        nonlocal nodes
        nodes += 1
        for _ in range(D):
            if not t_uncovered(u):
                return False
        return True

    return t_uncovered(tau), nodes


def simulate_idealized_tree(cfg: IdealizedTreeConfig, threads: int = 1) -> TreeEstimate:
    """Fraction of simulated trees whose root t-vertex ends uncovered."""
    if cfg.expected_size * cfg.safety > cfg.max_nodes:
        raise BudgetError(
            f"expected tree size e^(tau D) = {cfg.expected_size:.3g} times safety {cfg.safety} exceeds max_nodes={cfg.max_nodes}"
        )

    def one(i: int) -> tuple[bool, int]:
        draw = _ExpStream(trial_rng(cfg.seed, i), size=256)
        try:
            return _root_uncovered(cfg.tau, cfg.D, draw, cfg.max_nodes)
        except TreeExplosion as exc:
            raise TreeExplosion(f"trial {i}: {exc}") from None

    results = map_trials(one, cfg.trials, threads)
    hits = sum(r for r, _ in results)
    est = hits / cfg.trials
    return TreeEstimate(
        estimate=est,
        stderr=math.sqrt(est * (1 - est) / cfg.trials),
        trials=cfg.trials,
        mean_nodes=sum(n for _, n in results) / cfg.trials,
        closed_form=p_tau(cfg.tau, cfg.D),
    )


# ---------------------------------------------------------------------------
# density experiments

def budget_for_rule(p: DesignParams, rule: str) -> tuple[int, bool]:
    """Translate a budget rule into ``(draw budget, saturate)``.

    ``"saturate"`` runs the random ordering to the end, ``"default"`` aborts
    after ``ceil(2 v^t ln v)`` draws, ``"beta=X"`` after ``ceil(X v^t ln v)``.
    """
    if rule == "saturate":
        return GreedyConfig(saturate=True).budget_for(p), True
    if rule == "default":
        return GreedyConfig().budget_for(p), False
    if rule.startswith("beta="):
        return GreedyConfig(beta=float(rule[5:])).budget_for(p), False
    raise ParameterError(f"unknown budget rule {rule!r}")


@dataclass(frozen=True)
class DensityPoint:
    v: int
    k: int
    t: int
    trials: int
    mean_density: float
    stderr: float
    mean_blocks: float
    seed: int


CSV_HEADER = ["v", "k", "t", "trials", "mean_density", "stderr", "mean_blocks", "seed"]


def greedy_size(p: DesignParams, rng: np.random.Generator, budget: int, saturate: bool) -> int:
    """Number of blocks of one greedy covering, without materializing it."""
    blocks, bm, _ = _pack(p, rng, budget, saturate=saturate)
    return len(blocks) + len(complete_blocks(bm))


def density_experiment(
    k: int,
    t: int,
    v_list: Iterable[int],
    trials_per_v: int,
    budget_rule: str = "saturate",
    seed: int = 0,
    threads: int = 1,
    progress: Callable[[DensityPoint], None] | None = None,
) -> list[DensityPoint]:
    """Mean density of ``trials_per_v`` independent greedy coverings per v.

    Trial ``i`` at size ``v`` draws from ``SeedSequence(seed, spawn_key=(v, i))``.
    """
    if trials_per_v < 1:
        raise ParameterError("trials_per_v must be >= 1")
    out = []
    for v in v_list:
        p = DesignParams(v, k, t)
        budget, saturate = budget_for_rule(p, budget_rule)

        def one(i: int, p=p, budget=budget, saturate=saturate) -> int:
            rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(p.v, i)))
            return greedy_size(p, rng, budget, saturate)

        sizes = np.array(map_trials(one, trials_per_v, threads), dtype=np.float64)
        dens = sizes * p.tsets_per_block / p.n_tsets
        se = float(dens.std(ddof=1) / math.sqrt(trials_per_v)) if trials_per_v > 1 else 0.0
        point = DensityPoint(v, k, t, trials_per_v, float(dens.mean()), se, float(sizes.mean()), seed)
        if progress is not None:
            progress(point)
        out.append(point)
    return out


def write_density_csv(points: Sequence[DensityPoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for pt in points:
        w.writerow([pt.v, pt.k, pt.t, pt.trials, repr(pt.mean_density), repr(pt.stderr), repr(pt.mean_blocks), pt.seed])
    return buf.getvalue()


def read_density_csv(text: str) -> list[DensityPoint]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != CSV_HEADER:
        raise ParameterError(f"bad CSV header, expected {','.join(CSV_HEADER)}")
    out = []
    for row in rows[1:]:
        v, k, t, trials, dens, se, blocks, seed = row
        out.append(DensityPoint(int(v), int(k), int(t), int(trials), float(dens), float(se), float(blocks), int(seed)))
    return out


# ---------------------------------------------------------------------------
# power-law fit


@dataclass(frozen=True)
class AlphaFit:
    k: int | None
    t: int | None
    points: tuple[tuple[int, float], ...]
    fit_range: tuple[int, int]
    alpha: float
    intercept: float
    residual: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "k": self.k,
                "t": self.t,
                "alpha": self.alpha,
                "residual": self.residual,
                "v_lo": self.fit_range[0],
                "v_hi": self.fit_range[1],
            },
            separators=(",", ":"),
        )


def fit_alpha(
    points: Iterable[tuple[int, float]],
    fit_range: tuple[int, int],
    k: int | None = None,
    t: int | None = None,
) -> AlphaFit:
    """Least squares of ``ln(delta - 1)`` on ``ln v`` over ``fit_range``.

    ``alpha`` is the negated slope, ``residual`` the RMS of the fit. Points
    with ``delta <= 1`` have no logarithm and are dropped with a warning.
    """
    lo, hi = fit_range
    pts = tuple((int(v), float(d)) for v, d in points)
    used = []
    for v, d in pts:
        if not lo <= v <= hi:
            continue
        if d <= 1:
            warnings.warn(f"dropping v={v}: density {d} <= 1", stacklevel=2)
            continue
        used.append((v, d))
    if len(used) < 3:
        raise ParameterError(f"need >= 3 usable points in [{lo}, {hi}], got {len(used)}")
    x = np.log([v for v, _ in used])
    y = np.log([d - 1 for _, d in used])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return AlphaFit(k, t, pts, (lo, hi), float(-slope), float(intercept), float(np.sqrt(np.mean(resid**2))))


def fit_alpha_from_csv(text: str, v_lo: int, v_hi: int) -> AlphaFit:
    rows = read_density_csv(text)
    ks = {r.k for r in rows}
    ts = {r.t for r in rows}
    if len(ks) > 1 or len(ts) > 1:
        raise ParameterError("CSV mixes several (k, t)")
    return fit_alpha(
        [(r.v, r.mean_density) for r in rows], (v_lo, v_hi), k=ks.pop() if ks else None, t=ts.pop() if ts else None
    )


# ---------------------------------------------------------------------------
# clique statistic

CLIQUE_SCAN_LIMIT = 10**8


@dataclass(frozen=True)
class CliqueStat:
    uncovered: int
    in_no_clique: int

    @property
    def fraction(self) -> float | None:
        """Share of uncovered t-sets in no k-clique; None if nothing is uncovered."""
        if self.uncovered == 0:
            return None
        return self.in_no_clique / self.uncovered

    def asdict(self) -> dict:
        d = asdict(self)
        d["fraction"] = self.fraction
        return d


def clique_statistic(p: DesignParams, cfg: GreedyConfig = GreedyConfig(), rng: np.random.Generator | None = None) -> CliqueStat:
    """Run the packing phase, then scan the hypergraph of uncovered t-sets.

    A k-clique is a k-set all of whose t-subsets are uncovered, i.e. a k-set
    the packing could still accept. An uncovered t-set in no k-clique can only
    be covered by the completion step.
    """
    if binomial(p.v, p.k) > CLIQUE_SCAN_LIMIT:
        raise BudgetError(f"clique scan over C({p.v},{p.k}) k-sets refused")
    _, bm, _ = greedy_pack(p, cfg, rng)
    uncovered = bm.total - bm.covered_count
    if uncovered == 0:
        return CliqueStat(0, 0)
    buf = np.empty((1 << 12, p.k), dtype=np.int64)
    while True:
        n = _kernels.clean_ksets(bm.bits, p.v, p.k, p.t, bm.table, buf)
        if n <= len(buf):
            break
        buf = np.empty((n, p.k), dtype=np.int64)
    in_clique = CoverageBitmap(p)
    in_clique.mark_blocks(buf[:n])
    return CliqueStat(uncovered, uncovered - in_clique.covered_count)
