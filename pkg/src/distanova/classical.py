"""Classical one-way ANOVA, Hotelling's T^2 and their links to the DBF statistic.

These serve as oracles: for scalar data under Euclidean distance the DBF
statistic is the ANOVA F up to degrees of freedom, and for two groups under the
total-sum-of-squares Mahalanobis metric it is a monotone function of T^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .core import GroupAssignment
from .errors import DegenerateWithinError, InvalidAssignmentError, PoleError, SampleSizeError, SingularMetricError
from .special import betainc

# Relative pivot size below which a Cholesky factor counts as singular.
SINGULAR_RTOL = 1e-12


def _groups(groups) -> GroupAssignment:
    return groups if isinstance(groups, GroupAssignment) else GroupAssignment.from_labels(groups)


def f_cdf(x, d1: float, d2: float):
    """CDF of the F distribution with ``(d1, d2)`` degrees of freedom."""
    x = np.asarray(x, dtype=np.float64)
    if d1 <= 0 or d2 <= 0:
        raise ValueError("degrees of freedom must be positive")
    pos = np.maximum(x, 0.0)
    with np.errstate(invalid="ignore"):
        z = np.where(np.isposinf(pos), 1.0, d1 * pos / (d1 * pos + d2))
    out = np.where(x <= 0, 0.0, betainc(d1 / 2.0, d2 / 2.0, z))
    return out if out.ndim else float(out)


def f_sf(x, d1: float, d2: float):
    """Upper tail ``P(F > x)``, evaluated directly so small p-values keep precision."""
    x = np.asarray(x, dtype=np.float64)
    if d1 <= 0 or d2 <= 0:
        raise ValueError("degrees of freedom must be positive")
    pos = np.maximum(x, 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        z = np.where(np.isposinf(pos), 0.0, d2 / (d2 + d1 * pos))
    out = np.where(x <= 0, 1.0, betainc(d2 / 2.0, d1 / 2.0, z))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class FTest:
    """A statistic whose multiple ``scale * statistic`` is exactly ``F(d1, d2)``."""

    statistic: float
    d1: float
    d2: float
    scale: float = 1.0

    @property
    def pvalue(self) -> float:
        return float(f_sf(self.scale * self.statistic, self.d1, self.d2))


def anova_f(y, groups) -> FTest:
    """Classical one-way ANOVA F for scalar observations.

    Raises:
        DegenerateWithinError: if every group is constant.
    """
    y = np.asarray(y, dtype=np.float64).ravel()
    ga = _groups(groups)
    if ga.n != y.size:
        raise InvalidAssignmentError(f"{ga.n} labels for {y.size} observations")
    n, k = y.size, ga.n_groups
    if k < 2 or n <= k:
        raise SampleSizeError(f"need at least 2 groups and N > G, got N={n}, G={k}")
    means = np.bincount(ga.labels, weights=y) / ga.group_sizes
    resid = y - means[ga.labels]
    ss_within = float(np.dot(resid, resid))
    ss_between = float(np.dot(ga.group_sizes, (means - y.mean()) ** 2))
    if ss_within <= SINGULAR_RTOL * max(ss_between, np.finfo(float).tiny):
        raise DegenerateWithinError("within-group sum of squares is zero")
    d1, d2 = k - 1, n - k
    return FTest((ss_between / d1) / (ss_within / d2), d1, d2)


def _spd_solve(matrix: np.ndarray, rhs: np.ndarray, what: str) -> np.ndarray:
    scale = float(np.max(np.abs(np.diag(matrix)))) if matrix.size else 0.0
    try:
        factor = cho_factor(matrix, lower=True)
    except LinAlgError as exc:
        raise SingularMetricError(f"{what} matrix is not positive definite") from exc
    if scale <= 0 or np.min(np.diag(factor[0])) ** 2 <= SINGULAR_RTOL * scale:
        raise SingularMetricError(f"{what} matrix is numerically singular")
    return cho_solve(factor, rhs)


def sscp_matrices(y, groups) -> tuple[np.ndarray, np.ndarray]:
    """Total and pooled within-group sums-of-squares-and-cross-products."""
    y = np.asarray(y, dtype=np.float64)
    if y.ndim == 1:
        y = y[:, None]
    ga = _groups(groups)
    centred = y - y.mean(axis=0)
    total = centred.T @ centred
    means = np.stack([y[ga.labels == g].mean(axis=0) for g in range(ga.n_groups)])
    resid = y - means[ga.labels]
    return total, resid.T @ resid


def hotelling_t2(y, groups) -> FTest:
    """Two-sample Hotelling T^2 with its exact F transform.

    Returns an :class:`FTest` whose ``statistic`` is T^2 itself, scaled so that
    ``(N - P - 1) T^2 / ((N - 2) P) ~ F(P, N - P - 1)``.

    Raises:
        SingularMetricError: if the pooled within matrix is not positive definite.
    """
    y = np.asarray(y, dtype=np.float64)
    if y.ndim == 1:
        y = y[:, None]
    ga = _groups(groups)
    if ga.n_groups != 2:
        raise InvalidAssignmentError(f"Hotelling T^2 needs exactly 2 groups, got {ga.n_groups}")
    n, p = y.shape
    if n <= p + 1:
        raise SampleSizeError(f"need N > P + 1, got N={n}, P={p}")
    _, within = sscp_matrices(y, ga)
    diff = y[ga.labels == 0].mean(axis=0) - y[ga.labels == 1].mean(axis=0)
    n1, n2 = (int(s) for s in ga.group_sizes)
    t2 = n1 * n2 * (n - 2) * float(diff @ _spd_solve(within, diff, "within")) / n
    return FTest(t2, p, n - p - 1, scale=(n - p - 1) / ((n - 2) * p))


def t2_from_dbf(f_dt: float, n: int, p: int) -> float:
    """Hotelling T^2 from the DBF statistic under the total-SSCP metric."""
    denom = 1.0 + (1.0 - p) * f_dt
    if denom == 0:
        raise PoleError("1 + (1 - P) F vanishes")
    return (n - 2) * p * f_dt / denom


def exact_f_from_dbf(f_dt: float, n: int, p: int) -> float:
    """``(N - P - 1) F / (1 + (1 - P) F)``, exactly ``F(P, N - P - 1)`` under the null."""
    denom = 1.0 + (1.0 - p) * f_dt
    if denom == 0:
        raise PoleError("1 + (1 - P) F vanishes")
    return (n - p - 1) * f_dt / denom


def pillai_trace(y, groups) -> float:
    """``tr(T^{-1} B)`` computed from the sums-of-squares matrices."""
    total, within = sscp_matrices(y, groups)
    return float(np.trace(_spd_solve(total, total - within, "total")))


def pillai_from_dbf(f_dt: float, p: int) -> float:
    """Pillai trace from the DBF statistic under the total-SSCP metric: ``P F / (1 + F)``."""
    if f_dt == -1.0:
        raise PoleError("1 + F vanishes")
    return p * f_dt / (1.0 + f_dt)


def lawley_hotelling_from_dbf(f_dw: float, p: int) -> float:
    """Lawley-Hotelling trace from the DBF statistic under the within-SSCP metric."""
    return p * f_dw


def anova_from_dbf(f_delta: float, n: int, n_groups: int) -> float:
    """Rescale a scalar Euclidean DBF statistic to the ANOVA F."""
    if n_groups < 2 or n <= n_groups:
        raise SampleSizeError("need at least 2 groups and N > G")
    return f_delta * (n - n_groups) / (n_groups - 1)


__all__ = [
    "FTest",
    "anova_f",
    "anova_from_dbf",
    "exact_f_from_dbf",
    "f_cdf",
    "f_sf",
    "hotelling_t2",
    "lawley_hotelling_from_dbf",
    "pillai_from_dbf",
    "pillai_trace",
    "sscp_matrices",
    "t2_from_dbf",
]
