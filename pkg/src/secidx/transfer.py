"""Attack-to-output transfer matrix and its normal rank.

``G(z) = C (zI - A)^-1 B_a + D_a`` has one column per attackable component,
actuators first and unprotected sensors after.  The normal rank is
estimated as the largest numeric rank over a few random points of the
complex plane; it equals the true normal rank except on a finite set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .model import ComponentSet, Realization

N_POINTS = 3
MODULUS_RANGE = (1.1, 2.5)
EIGEN_CLEARANCE = 0.05
RANK_TOL = 1e-9
BORDERLINE_FACTOR = 10.0


class SingularPointError(ArithmeticError):
    """``zI - A`` is singular (``z`` is an eigenvalue of ``A``)."""


@dataclass(frozen=True)
class RankResult:
    rank: int
    borderline: bool = False


def eval_G(r: Realization, z: complex) -> np.ndarray:
    n_rows = r.c.shape[0]
    if r.n_x == 0 or n_rows == 0:
        return np.zeros((n_rows, r.n_u + r.n_y), dtype=complex)
    pencil = z * np.eye(r.n_x) - r.a
    try:
        resolvent_b = np.linalg.solve(pencil, r.b_attack().astype(complex))
    except np.linalg.LinAlgError:
        raise SingularPointError(f"z={z} is an eigenvalue of A") from None
    if not np.all(np.isfinite(resolvent_b)):
        raise SingularPointError(f"z={z} is numerically an eigenvalue of A")
    return r.c @ resolvent_b + r.d_attack()


def numeric_rank(mat, rel_tol: float = RANK_TOL) -> RankResult:
    """Rank by Gaussian elimination with partial pivoting.

    A pivot counts when its magnitude exceeds ``rel_tol * max(max|entry|, 1)``.
    The result is flagged borderline when any pivot candidate lies within a
    factor of ten of that threshold.
    """
    a = np.array(mat, dtype=complex)
    if a.size == 0:
        return RankResult(0)
    n_rows, n_cols = a.shape
    thresh = rel_tol * max(float(np.abs(a).max()), 1.0)
    rank = 0
    borderline = False
    for col in range(n_cols):
        if rank == n_rows:
            break
        mags = np.abs(a[rank:, col])
        p = rank + int(np.argmax(mags))
        pivot = mags[p - rank]
        if thresh / BORDERLINE_FACTOR <= pivot <= thresh * BORDERLINE_FACTOR:
            borderline = True
        if pivot <= thresh:
            continue
        if p != rank:
            a[[rank, p]] = a[[p, rank]]
        factors = a[rank + 1 :, col] / a[rank, col]
        a[rank + 1 :, col:] -= np.outer(factors, a[rank, col:])
        rank += 1
    return RankResult(rank, borderline)


def sample_points(r: Realization, rng: np.random.Generator, n: int = N_POINTS) -> list[complex]:
    """Random points away from the spectrum of ``A``."""
    eig = np.linalg.eigvals(r.a) if r.n_x else np.zeros(0)
    points: list[complex] = []
    while len(points) < n:
        z = complex(rng.uniform(*MODULUS_RANGE) * np.exp(1j * rng.uniform(0.0, 2 * math.pi)))
        if eig.size and np.min(np.abs(eig - z)) < EIGEN_CLEARANCE:
            continue
        points.append(z)
    return points


class SampledTransfer:
    """``G`` evaluated once at a fixed set of random points.

    Rank queries on column subsets reuse the cached evaluations, which is
    what makes brute-force subset searches affordable.
    """

    def __init__(self, r: Realization, seed: int | None = 0, n_points: int = N_POINTS):
        self.realization = r
        rng = np.random.default_rng(seed)
        self.points: list[complex] = []
        self.values: list[np.ndarray] = []
        while len(self.points) < n_points:
            (z,) = sample_points(r, rng, 1)
            try:
                g = eval_G(r, z)
            except SingularPointError:
                continue
            self.points.append(z)
            self.values.append(g)

    @property
    def n_columns(self) -> int:
        return self.realization.n_u + self.realization.n_y

    def ranks(self, columns: Iterable[int]) -> list[RankResult]:
        cols = sorted(columns)
        return [numeric_rank(g[:, cols]) for g in self.values]

    def rank(self, columns: Iterable[int]) -> RankResult:
        cols = sorted(columns)
        if not cols:
            return RankResult(0)
        results = self.ranks(cols)
        best = max(res.rank for res in results)
        return RankResult(best, any(res.borderline for res in results))

    def normrank(self, cols: ComponentSet) -> int:
        return self.rank(cols.columns(self.realization.n_u)).rank


def normrank(r: Realization, cols: ComponentSet, seed: int | None = 0) -> int:
    """Normal rank of the columns of ``G`` selected by ``cols``."""
    if len(cols) == 0:
        return 0
    return SampledTransfer(r, seed).normrank(cols)
