"""Lower bounds on the covering number C(v,k,t)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

from coverings.combinatorics import binomial
from coverings.design import DesignParams


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


@dataclass(frozen=True)
class BoundResult:
    params: DesignParams
    value: int
    method: Literal["schonheim", "trivial_density"]


def schonheim_step(v: int, k: int, t: int, inner: int) -> int:
    """One level of C(v,k,t) >= ceil(v/k * C(v-1,k-1,t-1)), given a bound ``inner``."""
    return ceil_div(v * inner, k)


def schonheim_bound(p: DesignParams) -> BoundResult:
    v, k, t = p.v, p.k, p.t
    value = 1
    # innermost level is ceil((v-t+1)/(k-t+1)), i.e. a step with inner = 1
    for i in range(t - 1, -1, -1):
        value = schonheim_step(v - i, k - i, t - i, value)
    return BoundResult(p, value, "schonheim")


def density_lower_bound(p: DesignParams) -> int:
    return ceil_div(binomial(p.v, p.t), binomial(p.k, p.t))
