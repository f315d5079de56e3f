"""Exact actuator security index by exhaustive subset search.

A set of attacked components can hide an attack that actively uses
component ``i`` iff dropping ``i``'s column from ``G`` leaves the normal
rank unchanged.  The index is the size of the smallest such set that
contains ``i``.  The search is exponential; ``budget`` caps the set size.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations

from .model import INF, Component, ComponentSet, Realization, u
from .transfer import SampledTransfer


@dataclass(frozen=True)
class IndexReport:
    component: Component
    value: object  # int or INF; a lower bound when ``truncated``
    witness: ComponentSet | None = None
    borderline: bool = False
    truncated: bool = False

    def describe(self) -> str:
        if self.truncated:
            return f">={self.value} (possibly inf)"
        if self.value is INF:
            return "inf"
        return f"{self.value} {self.witness.label()}"


def _feasible_columns(sampler: SampledTransfer, cols: tuple, col_i: int):
    full = sampler.rank(cols)
    rest = sampler.rank(c for c in cols if c != col_i)
    return full.rank == rest.rank, full.borderline or rest.borderline


def _column_of(comp: Component, n_u: int) -> int:
    return comp.index if comp.kind == "u" else n_u + comp.index


def feasible(r: Realization, attacked: ComponentSet, i: Component, seed: int | None = 0,
             sampler: SampledTransfer | None = None) -> bool:
    """True iff ``attacked`` admits a perfectly undetectable attack actively using ``i``."""
    if i not in attacked:
        raise ValueError(f"{i} is not in the attacked set")
    sampler = sampler or SampledTransfer(r, seed)
    ok, _ = _feasible_columns(sampler, tuple(attacked.columns(r.n_u)), _column_of(i, r.n_u))
    return ok


def delta(r: Realization, i: int, budget: int | None = None, seed: int | None = 0,
          sampler: SampledTransfer | None = None) -> IndexReport:
    """Security index of actuator ``i``.

    Subsets containing ``i`` are tried by increasing size, lexicographically
    by attack-vector column within a size; the first feasible one is the
    witness.
    """
    if not 0 <= i < r.n_u:
        raise ValueError(f"actuator id {i} out of range")
    sampler = sampler or SampledTransfer(r, seed)
    n_cols = r.n_u + r.n_y
    limit = n_cols if budget is None else min(budget, n_cols)
    others = [c for c in range(n_cols) if c != i]
    borderline = False
    for p in range(1, limit + 1):
        for rest in combinations(others, p - 1):
            cols = tuple(sorted(rest + (i,)))
            ok, flag = _feasible_columns(sampler, cols, i)
            borderline = borderline or flag
            if ok:
                return IndexReport(u(i), p, ComponentSet.from_columns(cols, r.n_u), flag)
    if limit < n_cols:
        return IndexReport(u(i), limit + 1, None, borderline, truncated=True)
    return IndexReport(u(i), INF, None, borderline)


def delta_all(r: Realization, budget: int | None = None, seed: int | None = 0,
              jobs: int = 1) -> list[IndexReport]:
    sampler = SampledTransfer(r, seed)
    if jobs <= 1:
        return [delta(r, i, budget, sampler=sampler) for i in range(r.n_u)]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda i: delta(r, i, budget, sampler=sampler), range(r.n_u)))
