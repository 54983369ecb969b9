"""Distance-based variance decomposition and the DBF ratio statistic.

Given an ``N x N`` distance matrix and a grouping of the ``N`` samples, the
total distance-based variability ``T`` splits into a between-group part ``B``
and a within-group part ``W``. All three are traces of products of Gower's
centred matrix with the group projector, and ``F = B / W`` is the statistic
that the rest of the package tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateWithinError,
    DimensionMismatchError,
    InvalidAssignmentError,
    InvalidDistanceMatrixError,
)

# Relative size of W (versus T) below which the within-group part counts as zero.
WITHIN_ZERO_RTOL = 1e-12


@dataclass(frozen=True)
class GroupAssignment:
    """Group index per sample plus the size of every group.

    ``labels`` holds integers ``0..G-1`` in sample order; groups need not be
    contiguous. Use :meth:`from_labels` to build one from arbitrary labels.
    """

    labels: np.ndarray
    group_sizes: np.ndarray

    def __post_init__(self) -> None:
        labels = np.asarray(self.labels, dtype=np.intp)
        sizes = np.asarray(self.group_sizes, dtype=np.intp)
        if labels.ndim != 1 or labels.size == 0:
            raise InvalidAssignmentError("labels must be a non-empty 1-d sequence")
        if labels.min() < 0 or labels.max() >= sizes.size:
            raise InvalidAssignmentError("labels must index into group_sizes")
        counts = np.bincount(labels, minlength=sizes.size)
        if not np.array_equal(counts, sizes):
            raise InvalidAssignmentError("group_sizes do not match the label counts")
        if np.any(sizes < 1):
            raise InvalidAssignmentError("every group needs at least one member")
        labels.setflags(write=False)
        sizes.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "group_sizes", sizes)

    @classmethod
    def from_labels(cls, labels: Sequence) -> "GroupAssignment":
        """Encode arbitrary hashable labels; groups are numbered in sorted label order."""
        raw = np.asarray(labels)
        if raw.ndim != 1 or raw.size == 0:
            raise InvalidAssignmentError("labels must be a non-empty 1-d sequence")
        _, codes = np.unique(raw, return_inverse=True)
        codes = codes.astype(np.intp)
        return cls(codes, np.bincount(codes))

    @property
    def n(self) -> int:
        return int(self.labels.size)

    @property
    def n_groups(self) -> int:
        return int(self.group_sizes.size)


@dataclass(frozen=True)
class VarianceDecomposition:
    """Total, between-group and within-group distance-based variability."""

    total: float
    between: float
    within: float


def as_distance_matrix(delta, *, atol: float = 1e-10) -> np.ndarray:
    """Validate and return ``delta`` as a float64 distance matrix.

    Raises:
        InvalidDistanceMatrixError: if the matrix is not square, not symmetric,
            has a nonzero diagonal, or contains negative or non-finite entries.
    """
    d = np.asarray(delta, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise InvalidDistanceMatrixError(f"expected a square matrix, got shape {d.shape}")
    if not np.all(np.isfinite(d)):
        raise InvalidDistanceMatrixError("distance matrix contains non-finite entries")
    scale = max(1.0, float(np.max(np.abs(d)))) if d.size else 1.0
    if np.any(d < -atol * scale):
        raise InvalidDistanceMatrixError("distance matrix has negative entries")
    if not np.allclose(d, d.T, rtol=0.0, atol=atol * scale):
        raise InvalidDistanceMatrixError("distance matrix is not symmetric")
    if np.any(np.abs(np.diag(d)) > atol * scale):
        raise InvalidDistanceMatrixError("distance matrix has a nonzero diagonal")
    return d


def double_center(a: np.ndarray) -> np.ndarray:
    """Return ``C a C`` with ``C = I - J/N``, computed from row/column means."""
    row = a.mean(axis=1, keepdims=True)
    col = a.mean(axis=0, keepdims=True)
    return a - row - col + a.mean()


def gower_center(delta, *, validate: bool = True) -> np.ndarray:
    """Gower's centred inner-product matrix ``C(-1/2 delta**2)C``.

    Its trace is the total variability ``T = (1/2N) sum_ij d_ij**2``.
    """
    d = as_distance_matrix(delta) if validate else np.asarray(delta, dtype=np.float64)
    if d.shape[0] < 1:
        raise InvalidDistanceMatrixError("distance matrix is empty")
    g = double_center(-0.5 * (d * d))
    # Exact symmetry keeps downstream traces independent of operand order.
    return 0.5 * (g + g.T)


def group_projector(groups: GroupAssignment | Sequence) -> np.ndarray:
    """Centred group-membership matrix ``blockdiag(J/N_g) - J/N``.

    Entries are scattered by label lookup, so samples of one group need not be
    adjacent. A single group gives the zero matrix.
    """
    if not isinstance(groups, GroupAssignment):
        groups = GroupAssignment.from_labels(groups)
    labels = groups.labels
    n = labels.size
    same = labels[:, None] == labels[None, :]
    inv_size = 1.0 / groups.group_sizes[labels].astype(np.float64)
    return np.where(same, inv_size[:, None], 0.0) - 1.0 / n


def variance_decomposition(gower: np.ndarray, projector: np.ndarray) -> VarianceDecomposition:
    """Split ``tr(G)`` into ``tr(H G)`` (between) and ``tr((I - H) G)`` (within)."""
    g = np.asarray(gower, dtype=np.float64)
    h = np.asarray(projector, dtype=np.float64)
    if g.shape != h.shape or g.ndim != 2:
        raise DimensionMismatchError(f"Gower matrix {g.shape} and projector {h.shape} differ")
    total = float(np.trace(g))
    # tr(H G) for symmetric H and G is the Frobenius inner product.
    between = float(np.sum(h * g))
    return VarianceDecomposition(total=total, between=between, within=total - between)


def dbf_statistic(v: VarianceDecomposition) -> float:
    """The ratio ``F = B / W``.

    Raises:
        DegenerateWithinError: if ``W`` is zero (relative to ``T``); the
            statistic is then infinite.
    """
    if abs(v.within) <= WITHIN_ZERO_RTOL * max(abs(v.total), np.finfo(float).tiny):
        raise DegenerateWithinError(
            f"within-group variability is zero (W={v.within!r}, T={v.total!r})"
        )
    return v.between / v.within


def dbf(delta, groups: GroupAssignment | Sequence) -> float:
    """Convenience wrapper: the DBF statistic straight from distances and labels."""
    g = gower_center(delta)
    return dbf_statistic(variance_decomposition(g, group_projector(groups)))


def gower_center_weighted(delta_unique, weights) -> np.ndarray:
    """Gower matrix restricted to unique samples, for data with repeated rows.

    ``delta_unique`` holds distances between ``u`` distinct samples and
    ``weights`` their multiplicities. The result ``g`` satisfies
    ``G_full = Z g Z'`` where ``Z`` maps each sample to its pattern.
    """
    d = np.asarray(delta_unique, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    n = w.sum()
    a = -0.5 * (d * d)
    row = a @ w / n
    g = a - row[:, None] - row[None, :] + float(w @ row) / n
    return 0.5 * (g + g.T)


def pattern_projector(pattern_counts) -> np.ndarray:
    """``Z' H Z`` for the group projector ``H``, from per-pattern group counts.

    ``pattern_counts[a, k]`` is the number of samples with pattern ``a`` in group
    ``k``. Then ``tr(H G_full) = sum(pattern_projector * g)`` for a unique-row
    Gower matrix ``g``.
    """
    c = np.asarray(pattern_counts, dtype=np.float64)
    sizes = c.sum(axis=0)
    w = c.sum(axis=1)
    inv = np.divide(1.0, sizes, out=np.zeros_like(sizes), where=sizes > 0)
    return (c * inv) @ c.T - np.outer(w, w) / w.sum()


def variance_decomposition_weighted(g_unique, weights, projector_unique) -> VarianceDecomposition:
    """:func:`variance_decomposition` evaluated on unique rows."""
    g = np.asarray(g_unique, dtype=np.float64)
    total = float(np.asarray(weights, dtype=np.float64) @ np.diag(g))
    between = float(np.sum(np.asarray(projector_unique) * g))
    return VarianceDecomposition(total=total, between=between, within=total - between)
