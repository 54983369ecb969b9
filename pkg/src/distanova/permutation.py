"""Exact and Monte Carlo permutation p-values for the DBF statistic.

These are the reference against which the approximate null is validated.
For a permutation ``pi`` the between-group part is

    B_pi = sum_g (1/N_g) * sum_{i, j in group g} G[pi(i), pi(j)]  -  sum(G) / N

which needs one indicator-times-matrix product per group and never builds a
permuted copy of ``G``. When ``G`` has low rank, ``G = V diag(lam) V'`` and the
group sums reduce to gathered row sums of ``V``. Since ``T`` does not change,
``F_pi = B_pi / (T - B_pi)``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .core import GroupAssignment
from .errors import InvalidAssignmentError, SampleSizeError
from .moments import MAX_ENUMERATION_N, all_permutations, permutation_generator, random_permutations

# Permutations per Monte Carlo chunk; each chunk has its own generator stream.
CHUNK = 10_000
MIN_MONTE_CARLO = 1_000
# Relative tolerance under which a permuted statistic counts as a tie.
TIE_RTOL = 1e-10
# Largest rank for which the factored (gather) evaluation is used.
MAX_FACTOR_RANK = 16


@dataclass(frozen=True)
class PermutationPlan:
    """How to draw permutations.

    ``include_identity`` counts the observed labelling as the first Monte Carlo
    draw, so a Monte Carlo p-value is never below ``1 / n_pi``. Set it to False
    for the plain proportion over random draws.
    """

    mode: Literal["exact", "monte_carlo"] = "monte_carlo"
    n_pi: int = 10_000
    seed: int = 0
    include_identity: bool = True

    def __post_init__(self) -> None:
        if self.mode not in ("exact", "monte_carlo"):
            raise ValueError(f"unknown permutation mode {self.mode!r}")
        if self.mode == "monte_carlo" and self.n_pi < MIN_MONTE_CARLO:
            raise ValueError(f"Monte Carlo needs n_pi >= {MIN_MONTE_CARLO}, got {self.n_pi}")


def _as_groups(groups) -> GroupAssignment:
    if isinstance(groups, GroupAssignment):
        return groups
    arr = np.asarray(groups)
    if arr.ndim == 2:
        # A projector matrix: samples in one group share identical rows.
        _, labels = np.unique(np.round(arr, 12), axis=0, return_inverse=True)
        return GroupAssignment.from_labels(labels.ravel())
    return GroupAssignment.from_labels(arr)


def low_rank_factor(gower: np.ndarray, rtol: float = 1e-12) -> tuple[np.ndarray, np.ndarray] | None:
    """``(lam, V)`` with ``G = V diag(lam) V'`` if the rank is at most ``MAX_FACTOR_RANK``."""
    lam, vecs = np.linalg.eigh(gower)
    keep = np.abs(lam) > rtol * max(float(np.abs(lam).max()), np.finfo(float).tiny)
    if np.count_nonzero(keep) > min(MAX_FACTOR_RANK, gower.shape[0] // 4):
        return None
    return lam[keep], vecs[:, keep]


def between_for_permutations(
    gower: np.ndarray,
    groups: GroupAssignment,
    perms: np.ndarray,
    factor: tuple[np.ndarray, np.ndarray] | None = None,
) -> np.ndarray:
    """``B_pi`` for every row ``pi`` of ``perms`` (shape ``(count, N)``).

    ``factor`` is an optional ``(lam, V)`` from :func:`low_rank_factor`.
    """
    g = np.asarray(gower, dtype=np.float64)
    n = g.shape[0]
    if groups.n != n:
        raise InvalidAssignmentError(f"{groups.n} labels for a {n}x{n} matrix")
    count = perms.shape[0]
    out = np.full(count, -float(g.sum()) / n)
    if factor is not None:
        lam, vecs = factor
        for label, size in enumerate(groups.group_sizes):
            members = np.flatnonzero(groups.labels == label)
            sums = vecs[perms[:, members]].sum(axis=1)
            out += (sums * sums) @ lam / size
        return out
    rows = np.arange(count)[:, None]
    for label, size in enumerate(groups.group_sizes):
        members = np.flatnonzero(groups.labels == label)
        z = np.zeros((count, n))
        z[rows, perms[:, members]] = 1.0
        out += np.einsum("kn,kn->k", z @ g, z) / size
    return out


def _f_from_b(b: np.ndarray, total: float) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        return b / (total - b)


def perm_between_values(gower, groups, plan: PermutationPlan, *, workers: int = 1) -> np.ndarray:
    """``B_pi`` over the permutations described by ``plan`` (identity first)."""
    ga = _as_groups(groups)
    g = np.asarray(gower, dtype=np.float64)
    n = g.shape[0]
    if plan.mode == "exact":
        if n > MAX_ENUMERATION_N:
            raise SampleSizeError(f"exact enumeration limited to N <= {MAX_ENUMERATION_N}, got {n}")
        return between_for_permutations(g, ga, all_permutations(n))

    n_random = plan.n_pi - 1 if plan.include_identity else plan.n_pi
    sizes = [min(CHUNK, n_random - s) for s in range(0, n_random, CHUNK)]
    factor = low_rank_factor(g)

    def run_chunk(index: int) -> np.ndarray:
        rng = permutation_generator((plan.seed, index))
        return between_for_permutations(g, ga, random_permutations(n, sizes[index], rng), factor)

    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run_chunk, range(len(sizes))))
    else:
        parts = [run_chunk(i) for i in range(len(sizes))]
    if plan.include_identity:
        parts.insert(0, between_for_permutations(g, ga, np.arange(n)[None, :]))
    return np.concatenate(parts) if parts else np.empty(0)


def perm_F_values(gower, groups, plan: PermutationPlan, *, workers: int = 1) -> np.ndarray:
    """Permuted DBF statistics ``F_pi = B_pi / (T - B_pi)``."""
    total = float(np.trace(np.asarray(gower, dtype=np.float64)))
    return _f_from_b(perm_between_values(gower, groups, plan, workers=workers), total)


def perm_pvalue(f_hat: float, f_values: Sequence[float] | np.ndarray, *, rtol: float = TIE_RTOL) -> float:
    """Fraction of permuted statistics at least as large as ``f_hat``.

    Values within ``rtol`` (relative) of ``f_hat`` count as ties, and ties count
    as exceedances, so relabelings that give the same statistic up to rounding
    are treated alike.
    """
    f = np.asarray(f_values, dtype=np.float64)
    if f.size == 0:
        raise ValueError("no permuted statistics supplied")
    tol = rtol * max(abs(float(f_hat)), np.finfo(float).tiny)
    return float(np.count_nonzero(f >= f_hat - tol)) / f.size
