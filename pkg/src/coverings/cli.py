"""Command-line front end: ``coverings <subcommand> ...``.

Exit status is 2 for bad parameters, 1 when a verification finds an uncovered
t-set, 0 otherwise. Errors go to stderr as a single ``error: ...`` line.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from coverings.analysis import (
    IdealizedTreeConfig,
    clique_statistic,
    density_experiment,
    fit_alpha_from_csv,
    simulate_idealized_tree,
    write_density_csv,
)
from coverings.bounds import density_lower_bound, schonheim_bound
from coverings.design import CoveringDesign, DesignParams, density, read_design, verify, write_design
from coverings.errors import CoveringError
from coverings.geometry import (
    SmallCoverCache,
    ag_hyperplane_covering,
    induced_cover,
    precompute_small_covers,
    select_induced_params,
)
from coverings.greedy import GreedyConfig, greedy_cover, trial_rng

log = logging.getLogger("coverings")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _seed(text: str) -> int:
    if text == "random":
        return int(np.random.SeedSequence().entropy % 2**63)
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer or 'random', got {text!r}") from None


def _add_vkt(p: argparse.ArgumentParser) -> None:
    p.add_argument("--v", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--t", type=int, required=True)


def _add_seed(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=_seed, default=0, help="integer, or 'random' for fresh entropy (default 0)")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def _report_design(d: CoveringDesign) -> None:
    print(f"blocks: {len(d)}  density: {float(density(d)):.6f}  schonheim: {schonheim_bound(d.params).value}", file=sys.stderr)


def cmd_greedy(a) -> int:
    p = DesignParams(a.v, a.k, a.t)
    cfg = GreedyConfig(seed=a.seed, budget=a.budget, saturate=a.saturate)
    d, stats = greedy_cover(p, cfg)
    _emit(write_design(d), a.out)
    print(
        f"draws: {stats.draws_used}  packing: {stats.blocks_from_packing}  completion: {stats.blocks_from_completion}"
        f"  uncovered_at_abort: {stats.uncovered_at_abort}",
        file=sys.stderr,
    )
    _report_design(d)
    return 0


def cmd_induced(a) -> int:
    p = DesignParams(a.v, a.k, a.t)
    cfg = select_induced_params(p, seed=a.seed)
    cache = None
    if a.cache and Path(a.cache).is_dir():
        try:
            cache = SmallCoverCache.load(a.cache, p.k, p.t, cfg.ell)
            print(f"cache: loaded {len(cache.designs)} designs from {a.cache}", file=sys.stderr)
        except CoveringError as exc:
            print(f"cache: rebuilding ({exc})", file=sys.stderr)
    if cache is None:
        cache = precompute_small_covers(p.k, p.t, cfg.ell, seed=a.seed)
        if a.cache:
            cache.save(a.cache)
    d, stats = induced_cover(p, cache, cfg)
    _emit(write_design(d), a.out)
    print(
        f"p: {cfg.p}  ell: {cfg.ell}  hyperplanes: {stats.hyperplanes}  cached: {stats.cached}  trivial: {stats.trivial}",
        file=sys.stderr,
    )
    if stats.small_prime:
        print(f"note: p={cfg.p} < 5", file=sys.stderr)
    _report_design(d)
    return 0


def cmd_ag(a) -> int:
    d = ag_hyperplane_covering(a.p, a.t)
    _emit(write_design(d), a.out)
    _report_design(d)
    return 0


def cmd_verify(a) -> int:
    d = read_design(Path(a.file).read_text(encoding="utf-8"))
    if a.sample:
        rep = verify(d, "sampled", n=a.sample, rng=np.random.default_rng(a.seed))
    else:
        rep = verify(d)
    print(f"mode: {rep.mode}")
    print(f"params: {d.params}")
    print(f"blocks: {len(d)}")
    print(f"checked: {rep.checked}")
    print(f"uncovered: {rep.n_uncovered}")
    for s in rep.uncovered_found[:10]:
        print("  " + " ".join(map(str, s)))
    if rep.mode == "exhaustive":
        print(f"is_covering: {str(rep.is_covering).lower()}")
    return 0 if rep.ok else 1


def cmd_bound(a) -> int:
    p = DesignParams(a.v, a.k, a.t)
    print(schonheim_bound(p).value)
    print(f"density_bound: {density_lower_bound(p)}", file=sys.stderr)
    return 0


def cmd_experiment_density(a) -> int:
    vs = range(a.vmin, a.vmax + 1, a.step)
    pts = density_experiment(
        a.k,
        a.t,
        vs,
        a.trials,
        budget_rule=a.budget_rule,
        seed=a.seed,
        threads=a.threads,
        progress=lambda pt: log.info("v=%d mean density %.6f", pt.v, pt.mean_density),
    )
    _emit(write_density_csv(pts), a.out)
    return 0


def cmd_experiment_tree(a) -> int:
    cfg = IdealizedTreeConfig(tau=a.tau, D=a.D, trials=a.trials, max_nodes=a.max_nodes, seed=a.seed)
    r = simulate_idealized_tree(cfg, threads=a.threads)
    print(
        json.dumps(
            {
                "tau": a.tau,
                "D": a.D,
                "trials": r.trials,
                "estimate": r.estimate,
                "stderr": r.stderr,
                "closed_form": r.closed_form,
                "mean_nodes": r.mean_nodes,
            },
            separators=(",", ":"),
        )
    )
    return 0


def cmd_fit_alpha(a) -> int:
    fit = fit_alpha_from_csv(Path(a.csvfile).read_text(encoding="utf-8"), a.vlo, a.vhi)
    print(fit.to_json())
    return 0


def cmd_clique_stat(a) -> int:
    p = DesignParams(a.v, a.k, a.t)
    fractions = []
    for i in range(a.trials):
        s = clique_statistic(p, GreedyConfig(budget=a.budget), rng=trial_rng(a.seed, i))
        fractions.append(s.fraction)
        print(json.dumps({"trial": i, **s.asdict()}, separators=(",", ":")))
    defined = [f for f in fractions if f is not None]
    summary = {
        "trials": a.trials,
        "defined": len(defined),
        "positive": sum(f > 0 for f in defined),
        "mean_fraction": sum(defined) / len(defined) if defined else None,
    }
    print(json.dumps(summary, separators=(",", ":")))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="coverings", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("greedy", help="random greedy covering")
    _add_vkt(p)
    _add_seed(p)
    p.add_argument("--budget", type=int, help="random k-set draws before completion (default ceil(2 v^t ln v))")
    p.add_argument("--saturate", action="store_true", help="run the packing phase to exhaustion")
    p.add_argument("--out")
    p.set_defaults(func=cmd_greedy, seeded=True)

    p = sub.add_parser("induced", help="induced covering from AG(t,p) hyperplanes")
    _add_vkt(p)
    _add_seed(p)
    p.add_argument("--cache", help="directory of precomputed small coverings (created if absent)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_induced, seeded=True)

    p = sub.add_parser("ag", help="hyperplanes of AG(t,p)")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_ag, seeded=False)

    p = sub.add_parser("verify", help="check a design file")
    p.add_argument("file")
    p.add_argument("--sample", type=int, help="test this many random t-sets instead of all")
    _add_seed(p)
    p.set_defaults(func=cmd_verify, seeded=True)

    p = sub.add_parser("bound", help="Schonheim lower bound")
    _add_vkt(p)
    p.set_defaults(func=cmd_bound, seeded=False)

    p = sub.add_parser("experiment-density", help="mean greedy density over a range of v (CSV)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--vmin", type=int, required=True)
    p.add_argument("--vmax", type=int, required=True)
    p.add_argument("--step", type=int, default=10)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--budget-rule", default="saturate", help="saturate | default | beta=X")
    p.add_argument("--threads", type=int, default=1)
    _add_seed(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_experiment_density, seeded=True)

    p = sub.add_parser("experiment-tree", help="idealized tree Monte Carlo vs closed form")
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--D", type=int, required=True)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--max-nodes", type=int, default=10**6)
    p.add_argument("--threads", type=int, default=1)
    _add_seed(p)
    p.set_defaults(func=cmd_experiment_tree, seeded=True)

    p = sub.add_parser("fit-alpha", help="fit delta - 1 ~ v^-alpha to an experiment CSV")
    p.add_argument("csvfile")
    p.add_argument("--vlo", type=int, required=True)
    p.add_argument("--vhi", type=int, required=True)
    p.set_defaults(func=cmd_fit_alpha, seeded=False)

    p = sub.add_parser("clique-stat", help="uncovered t-sets contained in no k-clique")
    _add_vkt(p)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--budget", type=int)
    _add_seed(p)
    p.set_defaults(func=cmd_clique_stat, seeded=True)
    return parser


def run(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.seeded:
        print(f"seed: {args.seed}", file=sys.stderr)
    try:
        return args.func(args)
    except (CoveringError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
