"""Covering designs: random greedy and induced affine-geometry constructions."""

from coverings.bounds import BoundResult, density_lower_bound, schonheim_bound, schonheim_step
from coverings.combinatorics import (
    binomial,
    colex_rank,
    colex_unrank,
    random_k_subset,
    t_subsets_of,
)
from coverings.design import (
    CoverageBitmap,
    CoveringDesign,
    DesignParams,
    VerifyReport,
    density,
    read_design,
    verify,
    write_design,
)
from coverings.greedy import GreedyConfig, GreedyStats, default_budget, greedy_cover

__all__ = [
    "BoundResult",
    "CoverageBitmap",
    "CoveringDesign",
    "DesignParams",
    "GreedyConfig",
    "GreedyStats",
    "VerifyReport",
    "binomial",
    "colex_rank",
    "colex_unrank",
    "default_budget",
    "density",
    "density_lower_bound",
    "greedy_cover",
    "random_k_subset",
    "read_design",
    "schonheim_bound",
    "schonheim_step",
    "t_subsets_of",
    "verify",
    "write_design",
]
