"""One-call DBF tests: approximate (moment-matched) and permutation based."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    WITHIN_ZERO_RTOL,
    GroupAssignment,
    VarianceDecomposition,
    gower_center,
    group_projector,
    variance_decomposition,
)
from .errors import DegenerateDistributionError, DegenerateWithinError, InvalidAssignmentError
from .moments import MIN_APPROX_N, Backend, ExactMoments, MonteCarloConfig, PermMoments, perm_moments
from .pearson3 import DbfNull, dbf_pvalue
from .permutation import PermutationPlan, perm_F_values, perm_pvalue

# Flags describing why a test has no regular p-value.
WITHIN_ZERO = "within_zero"
POINT_MASS = "point_mass"


@dataclass(frozen=True)
class DbfResult:
    """Outcome of one DBF test.

    ``flag`` is None for a regular result. With ``WITHIN_ZERO`` the statistic is
    infinite and the p-value is 0 by convention; with ``POINT_MASS`` every
    relabelling gives the same ``B`` and the p-value is NaN.
    """

    statistic: float
    pvalue: float
    decomposition: VarianceDecomposition
    moments: PermMoments | None = None
    null: DbfNull | None = None
    flag: str | None = None


def _prepare(delta, groups) -> tuple[GroupAssignment, np.ndarray, VarianceDecomposition]:
    ga = groups if isinstance(groups, GroupAssignment) else GroupAssignment.from_labels(groups)
    if ga.n_groups < 2:
        raise InvalidAssignmentError("testing needs at least two groups")
    g = gower_center(delta)
    if ga.n != g.shape[0]:
        raise InvalidAssignmentError(f"{ga.n} labels for {g.shape[0]} samples")
    return ga, g, variance_decomposition(g, group_projector(ga))


def _within_is_zero(v: VarianceDecomposition) -> bool:
    return abs(v.within) <= WITHIN_ZERO_RTOL * max(abs(v.total), np.finfo(float).tiny)


def _degenerate(v: VarianceDecomposition, strict: bool) -> DbfResult | None:
    if v.total <= np.finfo(float).tiny:
        if strict:
            raise DegenerateDistributionError("all samples coincide")
        return DbfResult(math.nan, math.nan, v, flag=POINT_MASS)
    if _within_is_zero(v):
        if strict:
            raise DegenerateWithinError("within-group variability is zero")
        return DbfResult(math.inf, 0.0, v, flag=WITHIN_ZERO)
    return None


def dbf_test(
    delta,
    groups: GroupAssignment | Sequence,
    *,
    backend: Backend = "closed_form",
    mc_config: MonteCarloConfig | None = None,
    exact: ExactMoments | None = None,
    strict: bool = False,
) -> DbfResult:
    """DBF statistic with its p-value from the fitted Pearson type III null.

    Args:
        delta: ``N x N`` distance matrix.
        groups: group labels or a :class:`GroupAssignment`.
        backend: how the skewness of ``B`` is obtained.
        mc_config: settings for the ``monte_carlo`` backend.
        exact: prepared third-moment weights for this grouping, reused across calls.
        strict: raise on degenerate inputs instead of returning a flagged result.
    """
    ga, g, v = _prepare(delta, groups)
    early = _degenerate(v, strict)
    if early is not None:
        return early
    h = group_projector(ga)
    try:
        m = perm_moments(h, g, backend=backend, mc_config=mc_config, min_n=MIN_APPROX_N, exact=exact)
    except DegenerateDistributionError:
        if strict:
            raise
        return DbfResult(v.between / v.within, math.nan, v, flag=POINT_MASS)
    null = DbfNull.from_moments(m, v.total)
    f = v.between / v.within
    return DbfResult(f, float(dbf_pvalue(f, null)), v, moments=m, null=null)


def dbf_permutation_test(
    delta,
    groups: GroupAssignment | Sequence,
    plan: PermutationPlan,
    *,
    workers: int = 1,
    strict: bool = False,
) -> DbfResult:
    """DBF statistic with its exact or Monte Carlo permutation p-value."""
    ga, g, v = _prepare(delta, groups)
    early = _degenerate(v, strict)
    if early is not None:
        return early
    f = v.between / v.within
    values = perm_F_values(g, ga, plan, workers=workers)
    return DbfResult(f, perm_pvalue(f, values), v)
