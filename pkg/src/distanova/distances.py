"""Pairwise distances for real vectors, genotype vectors and sampled curves.

Scalar kernels (:func:`vector_distance`, :func:`genetic_distance`,
:func:`functional_distance`) compute one distance from its definition.
:func:`pairwise_matrix` builds the full matrix through vectorized code paths
that tests check against those kernels.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .classical import sscp_matrices
from .core import GroupAssignment
from .errors import DataFormatError, DimensionMismatchError, SingularMetricError

VectorMeasure = Literal["euclidean", "manhattan", "maximum", "canberra", "bray_curtis"]
GeneticMeasure = Literal["ibs", "simple_matching", "sokal_sneath", "rogers_tanimoto1", "hamman1"]
FunctionalMeasure = Literal["l2", "curvature", "visual_l2"]

VECTOR_MEASURES: tuple[str, ...] = ("euclidean", "manhattan", "maximum", "canberra", "bray_curtis")
GENETIC_MEASURES: tuple[str, ...] = ("ibs", "simple_matching", "sokal_sneath", "rogers_tanimoto1", "hamman1")
FUNCTIONAL_MEASURES: tuple[str, ...] = ("l2", "curvature", "visual_l2")

# Short names accepted on the command line.
ALIASES = {"sm": "simple_matching", "ss": "sokal_sneath", "rti": "rogers_tanimoto1", "hamman": "hamman1"}

_PDIST_NAME = {
    "euclidean": "euclidean",
    "manhattan": "cityblock",
    "maximum": "chebyshev",
    "canberra": "canberra",
    "bray_curtis": "braycurtis",
}
# Rows of a genotype window processed together when forming pairwise counts.
_ROW_BLOCK = 64


def canonical_measure(name: str) -> str:
    """Resolve an alias such as ``"rti"`` to its canonical measure name."""
    key = name.strip().lower().replace("-", "_")
    key = ALIASES.get(key, key)
    if key not in VECTOR_MEASURES + GENETIC_MEASURES + FUNCTIONAL_MEASURES:
        raise ValueError(f"unknown distance measure {name!r}")
    return key


@dataclass(frozen=True)
class CurveSet:
    """Curves sampled on a shared, strictly increasing grid."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        grid = np.asarray(self.grid, dtype=np.float64)
        values = np.atleast_2d(np.asarray(self.values, dtype=np.float64))
        _check_grid(grid)
        if values.shape[1] != grid.size:
            raise DimensionMismatchError(f"curves have {values.shape[1]} samples, grid has {grid.size}")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[0]


def _check_grid(grid: np.ndarray) -> None:
    if grid.ndim != 1 or grid.size < 4:
        raise DimensionMismatchError("a curve grid needs at least 4 points")
    if np.any(np.diff(grid) <= 0):
        raise DimensionMismatchError("curve grid must be strictly increasing")


def _pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise DimensionMismatchError(f"vectors have lengths {a.size} and {b.size}")
    return a, b


# ---------------------------------------------------------------- vectors


def vector_distance(a, b, measure: VectorMeasure) -> float:
    """Distance between two real vectors.

    Canberra and Bray-Curtis use absolute values of the inputs. A Canberra term
    with ``|a_k| + |b_k| = 0`` contributes 0, and Bray-Curtis between two zero
    vectors is 0.
    """
    a, b = _pair(a, b)
    if measure in ("canberra", "bray_curtis"):
        a, b = np.abs(a), np.abs(b)
    diff = np.abs(a - b)
    if measure == "euclidean":
        return float(np.sqrt(np.dot(diff, diff)))
    if measure == "manhattan":
        return float(diff.sum())
    if measure == "maximum":
        return float(diff.max()) if diff.size else 0.0
    if measure == "canberra":
        denom = a + b
        safe = np.where(denom > 0, denom, 1.0)
        return float(np.sum(np.where(denom > 0, diff / safe, 0.0)))
    if measure == "bray_curtis":
        denom = float((a + b).sum())
        return float(diff.sum()) / denom if denom > 0 else 0.0
    raise ValueError(f"unknown vector measure {measure!r}")


def _vector_matrix(y: np.ndarray, measure: str) -> np.ndarray:
    if measure in ("canberra", "bray_curtis"):
        y = np.abs(y)
    with np.errstate(invalid="ignore", divide="ignore"):
        condensed = pdist(y, metric=_PDIST_NAME[measure])
    # Bray-Curtis of two zero vectors is 0/0 in scipy; define it as 0.
    condensed = np.nan_to_num(condensed, nan=0.0)
    return squareform(condensed)


# ---------------------------------------------------------------- genotypes


def _as_genotypes(x) -> np.ndarray:
    arr = np.asarray(x)
    if not np.all(np.isin(arr, (0, 1, 2))):
        raise DataFormatError("genotype entries must be 0, 1 or 2")
    return arr.astype(np.int8)


def _matching_from_counts(m_plus: np.ndarray, p: int, measure: str) -> np.ndarray:
    m_minus = p - m_plus
    if measure == "simple_matching":
        return 1.0 - m_plus / p
    if measure == "sokal_sneath":
        return 1.0 - m_plus / (m_plus + 0.5 * m_minus)
    if measure == "rogers_tanimoto1":
        return 1.0 - m_plus / (m_plus + 2.0 * m_minus)
    raise ValueError(f"unknown matching measure {measure!r}")


def genetic_distance(a, b, measure: GeneticMeasure) -> float:
    """Distance between two genotype vectors of minor-allele counts.

    ``hamman1`` is cohort-relative and only defined through
    :func:`hamman_distances`.
    """
    a, b = _as_genotypes(a), _as_genotypes(b)
    if a.shape != b.shape or a.ndim != 1 or a.size == 0:
        raise DimensionMismatchError("genotype vectors must be non-empty and of equal length")
    p = a.size
    if measure == "ibs":
        shared = 2 - np.abs(a.astype(int) - b.astype(int))
        return float(1.0 - shared.sum() / (2.0 * p))
    if measure == "hamman1":
        raise ValueError("hamman1 depends on the whole cohort; use hamman_distances")
    m_plus = float(np.count_nonzero(a == b))
    return float(_matching_from_counts(np.float64(m_plus), p, measure))


def _genotype_counts(w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Pairwise matches ``m+`` and absolute count differences summed over SNPs."""
    n = w.shape[0]
    matches = np.empty((n, n))
    absdiff = np.empty((n, n))
    wi = w.astype(np.int16)
    for start in range(0, n, _ROW_BLOCK):
        block = wi[start:start + _ROW_BLOCK, None, :]
        diff = block - wi[None, :, :]
        matches[start:start + _ROW_BLOCK] = np.count_nonzero(diff == 0, axis=2)
        absdiff[start:start + _ROW_BLOCK] = np.abs(diff).sum(axis=2)
    return matches, absdiff


def _hamman_from_matches(matches: np.ndarray, p: int, weights: np.ndarray | None = None) -> np.ndarray:
    n = matches.shape[0]
    s_hi = (2.0 * matches - p) / p
    iu = np.triu_indices(n, k=1)
    pairs = s_hi[iu]
    # Two subjects sharing a pattern form a pair with similarity 1.
    if weights is not None and np.any(np.asarray(weights) >= 2):
        pairs_all = np.append(pairs, 1.0)
    else:
        pairs_all = pairs
    d = np.zeros((n, n))
    if pairs_all.size == 0:
        return d
    shift = abs(pairs_all.min())
    top = pairs_all.max() + shift
    if top > 0:
        d[iu] = 1.0 - (pairs + shift) / top
        d += d.T
    return d


def hamman_distances(window) -> np.ndarray:
    """Hamman I distances for all subject pairs of one genotype window.

    The similarity ``(m+ - m-)/P`` is shifted by the absolute value of its
    minimum over all pairs and divided by the shifted maximum, so the most
    similar pair sits at distance 0. If the shifted maximum is 0 (every pair
    equally similar) all distances are 0.
    """
    w = _as_genotypes(window)
    if w.ndim != 2:
        raise DimensionMismatchError("a genotype window is a subjects x SNPs matrix")
    matches, _ = _genotype_counts(w)
    return _hamman_from_matches(matches, w.shape[1])


def genetic_matrices(window, measures, weights=None) -> dict[str, np.ndarray]:
    """Distance matrices for several genetic measures sharing one pass over the window.

    If ``weights`` is given, the rows of ``window`` are distinct genotype
    patterns occurring ``weights`` times each; only the cohort-relative
    Hamman I normalization depends on it.
    """
    w = _as_genotypes(window)
    if w.ndim != 2 or w.shape[1] == 0:
        raise DimensionMismatchError("a genotype window is a non-empty subjects x SNPs matrix")
    p = w.shape[1]
    matches, absdiff = _genotype_counts(w)
    out = {}
    for name in measures:
        measure = canonical_measure(name)
        if measure == "ibs":
            d = absdiff / (2.0 * p)
        elif measure == "hamman1":
            d = _hamman_from_matches(matches, p, weights)
        elif measure in GENETIC_MEASURES:
            d = _matching_from_counts(matches, p, measure)
        else:
            raise ValueError(f"{name!r} is not a genetic measure")
        np.fill_diagonal(d, 0.0)
        out[measure] = d
    return out


# ---------------------------------------------------------------- curves


def _trapezoid(values: np.ndarray, grid: np.ndarray) -> np.ndarray:
    return np.trapezoid(values, grid, axis=-1)


def second_derivative(values, grid) -> np.ndarray:
    """Second differences on a possibly uneven grid; the end points reuse the adjacent stencil."""
    y = np.asarray(values, dtype=np.float64)
    t = np.asarray(grid, dtype=np.float64)
    h = np.diff(t)
    slopes = np.diff(y, axis=-1) / h
    inner = 2.0 * np.diff(slopes, axis=-1) / (h[:-1] + h[1:])
    return np.concatenate([inner[..., :1], inner, inner[..., -1:]], axis=-1)


def _rescale(values: np.ndarray, grid: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    t = (grid - grid[0]) / (grid[-1] - grid[0])
    lo = values.min(axis=-1, keepdims=True)
    span = values.max(axis=-1, keepdims=True) - lo
    # A flat curve has no shape; it maps to the horizontal line at 0.5.
    safe = np.where(span > 0, span, 1.0)
    y = np.where(span > 0, (values - lo) / safe, 0.5)
    return t, y


def _point_to_polyline(px: np.ndarray, py: np.ndarray, qx: np.ndarray, qy: np.ndarray) -> np.ndarray:
    """Minimum Euclidean distance from each point ``(px, py)`` to the polyline through ``(qx, qy)``."""
    ax, ay = qx[:-1], qy[:-1]
    dx, dy = np.diff(qx), np.diff(qy)
    seg_len2 = dx * dx + dy * dy
    rx = px[:, None] - ax[None, :]
    ry = py[:, None] - ay[None, :]
    s = np.clip((rx * dx + ry * dy) / seg_len2, 0.0, 1.0)
    ex = rx - s * dx
    ey = ry - s * dy
    return np.sqrt(np.min(ex * ex + ey * ey, axis=1))


def _visual_l2(t: np.ndarray, yi: np.ndarray, yj: np.ndarray) -> float:
    dij = _point_to_polyline(t, yi, t, yj)
    dji = _point_to_polyline(t, yj, t, yi)
    return float(np.sqrt(_trapezoid(dij * dij, t) + _trapezoid(dji * dji, t)))


def functional_distance(c1, c2, grid, measure: FunctionalMeasure) -> float:
    """Distance between two curves sampled on the same grid.

    * ``l2``: root of the trapezoid-rule integral of the squared difference.
    * ``curvature``: absolute difference of the integrated squared second derivatives.
    * ``visual_l2``: both curves are rescaled to the unit square and each sample
      point is measured against the other curve's piecewise-linear interpolant;
      the squared gaps are integrated in both directions.
    """
    t = np.asarray(grid, dtype=np.float64)
    _check_grid(t)
    y1, y2 = _pair(c1, c2)
    if y1.size != t.size:
        raise DimensionMismatchError(f"curves have {y1.size} samples, grid has {t.size}")
    if measure == "l2":
        return float(np.sqrt(max(_trapezoid((y1 - y2) ** 2, t), 0.0)))
    if measure == "curvature":
        e1 = _trapezoid(second_derivative(y1, t) ** 2, t)
        e2 = _trapezoid(second_derivative(y2, t) ** 2, t)
        return float(abs(e1 - e2))
    if measure == "visual_l2":
        ts, ys = _rescale(np.stack([y1, y2]), t)
        return _visual_l2(ts, ys[0], ys[1])
    raise ValueError(f"unknown functional measure {measure!r}")


def _functional_matrix(curves: CurveSet, measure: str) -> np.ndarray:
    y, t = curves.values, curves.grid
    n = y.shape[0]
    if measure == "l2":
        d = np.zeros((n, n))
        for i in range(n):
            d[i] = np.sqrt(np.maximum(_trapezoid((y - y[i]) ** 2, t), 0.0))
        return 0.5 * (d + d.T)
    if measure == "curvature":
        energy = _trapezoid(second_derivative(y, t) ** 2, t)
        return np.abs(energy[:, None] - energy[None, :])
    if measure == "visual_l2":
        ts, ys = _rescale(y, t)
        d = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                d[i, j] = d[j, i] = _visual_l2(ts, ys[i], ys[j])
        return d
    raise ValueError(f"unknown functional measure {measure!r}")


# ---------------------------------------------------------------- metrics


def mahalanobis_metric(y, groups, kind: Literal["total", "within"] = "total") -> np.ndarray:
    """Distances ``sqrt((y_i - y_j)' M^{-1} (y_i - y_j))`` with ``M`` the total or within SSCP matrix.

    Raises:
        SingularMetricError: if ``M`` is singular (for instance ``N <= P``).
    """
    y = np.asarray(y, dtype=np.float64)
    if y.ndim == 1:
        y = y[:, None]
    ga = groups if isinstance(groups, GroupAssignment) else GroupAssignment.from_labels(groups)
    if kind not in ("total", "within"):
        raise ValueError(f"kind must be 'total' or 'within', got {kind!r}")
    total, within = sscp_matrices(y, ga)
    m = total if kind == "total" else within
    if y.shape[0] <= y.shape[1]:
        raise SingularMetricError(f"N={y.shape[0]} must exceed P={y.shape[1]}")
    try:
        lower = np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise SingularMetricError(f"{kind} SSCP matrix is not positive definite") from exc
    if np.min(np.diag(lower)) ** 2 <= 1e-12 * np.max(np.diag(m)):
        raise SingularMetricError(f"{kind} SSCP matrix is numerically singular")
    # Whitening by the Cholesky factor turns the metric into a plain Euclidean one.
    z = np.linalg.solve(lower, y.T).T
    return squareform(pdist(z, metric="euclidean"))


# ---------------------------------------------------------------- dispatch


def pairwise_matrix(data, measure: str) -> np.ndarray:
    """Full symmetric distance matrix for a dataset.

    Args:
        data: an ``N x P`` real array (vector measures), an ``N x P`` array of
            genotype counts (genetic measures) or a :class:`CurveSet`.
        measure: any vector, genetic or functional measure name or alias.

    Returns:
        An ``N x N`` symmetric matrix with zero diagonal.
    """
    name = canonical_measure(measure)
    if name in FUNCTIONAL_MEASURES:
        if not isinstance(data, CurveSet):
            raise TypeError("functional measures need a CurveSet")
        d = _functional_matrix(data, name)
    elif name in GENETIC_MEASURES:
        d = genetic_matrices(data, [name])[name]
    else:
        y = np.asarray(data, dtype=np.float64)
        if y.ndim == 1:
            y = y[:, None]
        if not np.all(np.isfinite(y)):
            raise DataFormatError("vector data contain non-finite values")
        d = _vector_matrix(y, name) if y.shape[0] > 1 else np.zeros((y.shape[0],) * 2)
    np.fill_diagonal(d, 0.0)
    return d
