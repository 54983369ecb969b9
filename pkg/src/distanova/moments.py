"""Exact permutational moments of the between-group variability ``B``.

Under the permutation null, ``B_pi = tr(H P G P')`` for a uniformly random
permutation matrix ``P``. Mean and variance have a classical closed form in
six traces of ``H`` and ``G``. For the third moment we evaluate the expectation
exactly by summing over equality patterns of the six indices involved:

    E[B^3] = sum_p  S_H(p) S_G(p) / (N)_k(p)

where ``p`` runs over set partitions of the index positions, ``S_A(p)`` is the
sum of the matrix product over index tuples whose equalities are exactly ``p``
and ``(N)_k`` is the falling factorial. Exact-pattern sums come from
unrestricted tensor contractions by Mobius inversion on the partition lattice.
Both matrices are first trace-centred, which turns raw moments into central
ones and keeps the sums well conditioned.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal

import numpy as np

from .errors import DegenerateDistributionError, DimensionMismatchError, SampleSizeError

Backend = Literal["closed_form", "enumerated", "monte_carlo"]

MAX_ENUMERATION_N = 9
MIN_APPROX_N = 7
# |gamma| below this is treated as zero skewness.
GAMMA_ZERO_TOL = 1e-8
# sigma^2 below this fraction of mu^2 + T^2 scale is treated as a point mass.
VARIANCE_ZERO_RTOL = 1e-13


@dataclass(frozen=True)
class TraceQuantities:
    """The six traces entering the permutational mean and variance."""

    a1: float
    a2: float
    a3: float
    b1: float
    b2: float
    b3: float


@dataclass(frozen=True)
class PermMoments:
    mu: float
    sigma2: float
    gamma: float
    backend: str

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)


def _check_pair(h: np.ndarray, g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    h = np.asarray(h, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    if h.ndim != 2 or h.shape != g.shape or h.shape[0] != h.shape[1]:
        raise DimensionMismatchError(f"projector {h.shape} and Gower matrix {g.shape} differ")
    return h, g


def trace_quantities(h, g) -> TraceQuantities:
    """``A1 = tr H``, ``A2 = tr(H H)``, ``A3 = sum_i h_ii^2`` and likewise ``B*`` for ``G``."""
    h, g = _check_pair(h, g)
    dh, dg = np.diag(h), np.diag(g)
    return TraceQuantities(
        a1=float(dh.sum()),
        a2=float(np.sum(h * h)),
        a3=float(np.sum(dh * dh)),
        b1=float(dg.sum()),
        b2=float(np.sum(g * g)),
        b3=float(np.sum(dg * dg)),
    )


def mean_variance(q: TraceQuantities, n: int, *, min_n: int = 4) -> tuple[float, float]:
    """Closed-form permutational mean and variance of ``B``.

    ``min_n`` defaults to 4, the smallest size for which the formula is
    defined; the approximate-inference path passes :data:`MIN_APPROX_N`.
    """
    if n < max(min_n, 4):
        raise SampleSizeError(f"closed-form moments need N >= {max(min_n, 4)}, got {n}")
    mu = q.a1 * q.b1 / (n - 1)
    first = (
        2.0
        * ((n - 1) * q.a2 - q.a1**2)
        * ((n - 1) * q.b2 - q.b1**2)
        / ((n - 1) ** 2 * (n + 1) * (n - 2))
    )
    second = (
        (n * (n + 1) * q.a3 - (n - 1) * (q.a1**2 + 2 * q.a2))
        * (n * (n + 1) * q.b3 - (n - 1) * (q.b1**2 + 2 * q.b2))
        / ((n + 1) * n * (n - 1) * (n - 2) * (n - 3))
    )
    return mu, first + second


# ---------------------------------------------------------------------------
# Partition-lattice machinery for exact moments of tr(H P G P').


def _set_partitions(m: int):
    """All set partitions of ``range(m)`` as restricted-growth tuples."""

    def grow(prefix: list[int], top: int):
        if len(prefix) == m:
            yield tuple(prefix)
            return
        for b in range(top + 2):
            prefix.append(b)
            yield from grow(prefix, max(top, b))
            prefix.pop()

    yield from grow([], -1)


def _graph_key(edges: tuple[tuple[int, int], ...], k: int) -> tuple:
    """Canonical form of a multigraph (loops allowed) on ``k`` vertices."""
    best = None
    for perm in itertools.permutations(range(k)):
        key = tuple(sorted(tuple(sorted((perm[u], perm[v]))) for u, v in edges))
        if best is None or key < best:
            best = key
    return (k, best)


def _mobius(p: tuple[int, ...], q: tuple[int, ...]) -> int | None:
    """Mobius function mu(p, q) if ``q`` is coarser than ``p``, else None."""
    image: dict[int, int] = {}
    for bp, bq in zip(p, q):
        if image.setdefault(bp, bq) != bq:
            return None
    counts: dict[int, int] = {}
    for bq in image.values():
        counts[bq] = counts.get(bq, 0) + 1
    out = 1
    for c in counts.values():
        out *= (-1) ** (c - 1) * math.factorial(c - 1)
    return out


@lru_cache(maxsize=None)
def _pattern_table(order: int):
    """Graph types and Mobius data for the ``order``-th moment."""
    parts = list(_set_partitions(2 * order))
    type_index: dict[tuple, int] = {}
    part_type = []
    for p in parts:
        k = max(p) + 1
        edges = tuple((p[2 * e], p[2 * e + 1]) for e in range(order))
        key = _graph_key(edges, k)
        part_type.append(type_index.setdefault(key, len(type_index)))
    n_types = len(type_index)
    # rows[p] = (k(p), vector over types of sum_{q >= p} mu(p, q))
    rows = []
    for p in parts:
        vec = np.zeros(n_types)
        for q, t in zip(parts, part_type):
            mu = _mobius(p, q)
            if mu is not None:
                vec[t] += mu
        rows.append((max(p) + 1, vec))
    types = [None] * n_types
    for key, t in type_index.items():
        types[t] = key
    return types, rows


def _vanishes_when_centred(key: tuple) -> bool:
    k, edges = key
    degree = [0] * k
    for u, v in edges:
        degree[u] += 1
        degree[v] += 1
    return any(d == 1 for d in degree)


@lru_cache(maxsize=256)
def _moment_kernel(order: int, n: int) -> tuple[tuple, np.ndarray]:
    """Bilinear form ``M`` with ``E[B^order] = c_H' M c_G`` over surviving graph types."""
    types, rows = _pattern_table(order)
    m = np.zeros((len(types), len(types)))
    for k, vec in rows:
        if k > n:
            continue
        falling = math.prod(range(n - k + 1, n + 1))
        m += np.outer(vec, vec) / falling
    keep = [i for i, key in enumerate(types) if not _vanishes_when_centred(key)]
    return tuple(types[i] for i in keep), m[np.ix_(keep, keep)]


_LETTERS = "abcdefgh"


def _contract(a: np.ndarray, key: tuple) -> float:
    _, edges = key
    subs = ",".join(_LETTERS[u] + _LETTERS[v] for u, v in edges)
    return float(np.einsum(subs + "->", *([a] * len(edges)), optimize=True))


def _direct_contractions(a: np.ndarray) -> dict[tuple, float]:
    """The contractions that survive centring, from the diagonal, ``a*a`` and ``a@a``."""
    d = np.diag(a)
    s = float(d.sum())
    sq = a * a
    d2 = float(d @ d)
    f2 = float(sq.sum())
    return {
        (1, ((0, 0), (0, 0))): d2,
        (2, ((0, 0), (1, 1))): s * s,
        (2, ((0, 1), (0, 1))): f2,
        (1, ((0, 0), (0, 0), (0, 0))): float(np.sum(d**3)),
        (2, ((0, 0), (0, 0), (1, 1))): d2 * s,
        (2, ((0, 0), (0, 1), (0, 1))): float(d @ sq.sum(axis=1)),
        (2, ((0, 0), (0, 1), (1, 1))): float(d @ a @ d),
        (3, ((0, 0), (1, 1), (2, 2))): s**3,
        (3, ((0, 0), (1, 2), (1, 2))): s * f2,
        (2, ((0, 1), (0, 1), (0, 1))): float(np.sum(sq * a)),
        (3, ((0, 1), (0, 2), (1, 2))): float(np.sum((a @ a) * a)),
    }


def _weighted_contractions(gt: np.ndarray, w: np.ndarray, total: float) -> dict[tuple, float]:
    """:func:`_direct_contractions` of the trace-centred full matrix, from unique rows.

    The full Gower matrix is ``Z gt Z'`` for an indicator ``Z`` with column
    sums ``w``. Its trace-centred version is ``A = Z K Z' - t I`` with
    ``K = gt + t/N`` and ``t = T/(N-1)``; every contraction below expands that
    identity so only ``u x u`` arrays are touched. The trace of ``A`` is zero,
    so the contractions carrying a factor ``tr(A)`` vanish.
    """
    n = float(w.sum())
    t = total / (n - 1.0)
    k = gt + t / n
    kd = np.diag(k)
    d = kd - t
    ksq = k * k
    row_sq = ksq @ w - kd * kd + d * d
    wd = w * d
    xk = k * w[None, :]
    tr_k = float(w @ kd)
    tr_k2 = float(w @ ksq @ w)
    tr_k3 = float(np.sum((xk @ xk) * xk.T))
    d2 = float(w @ (d * d))
    return {
        (1, ((0, 0), (0, 0))): d2,
        (2, ((0, 0), (1, 1))): 0.0,
        (2, ((0, 1), (0, 1))): tr_k2 - 2.0 * t * tr_k + t * t * n,
        (1, ((0, 0), (0, 0), (0, 0))): float(w @ d**3),
        (2, ((0, 0), (0, 0), (1, 1))): 0.0,
        (2, ((0, 0), (0, 1), (0, 1))): float(wd @ row_sq),
        (2, ((0, 0), (0, 1), (1, 1))): float(wd @ k @ wd) - t * d2,
        (3, ((0, 0), (1, 1), (2, 2))): 0.0,
        (3, ((0, 0), (1, 2), (1, 2))): 0.0,
        (2, ((0, 1), (0, 1), (0, 1))): float(w @ (ksq * k) @ w + w @ (d**3 - kd**3)),
        (3, ((0, 1), (0, 2), (1, 2))): tr_k3 - 3.0 * t * tr_k2 + 3.0 * t * t * tr_k - t**3 * n,
    }


def _contractions(a: np.ndarray, keys: tuple) -> np.ndarray:
    known = _direct_contractions(a)
    return np.array([known[key] if key in known else _contract(a, key) for key in keys])


def _trace_centre(a: np.ndarray) -> np.ndarray:
    """Subtract ``tr(a)/(N-1)`` times the centring matrix, giving trace zero."""
    n = a.shape[0]
    c = np.eye(n) - 1.0 / n
    return a - (np.trace(a) / (n - 1)) * c


class ExactMoments:
    """Exact permutational central moments of ``tr(H P G P')`` for a fixed ``H``.

    The ``H``-side contractions are prepared once, so evaluating many Gower
    matrices (one per genome window, say) costs one matrix product each.
    """

    def __init__(self, h) -> None:
        h = np.asarray(h, dtype=np.float64)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise DimensionMismatchError(f"projector must be square, got {h.shape}")
        self.n = h.shape[0]
        if self.n < 2:
            raise SampleSizeError("need at least two samples")
        self.h = h
        self.trace_h = float(np.trace(h))
        hc = _trace_centre(h)
        self._weights = {}
        for order in (2, 3):
            keys, kernel = _moment_kernel(order, self.n)
            self._weights[order] = (keys, kernel @ _contractions(hc, keys))

    def central(self, g, order: int) -> float:
        """``E[(B - mu)^order]`` for ``order`` in {2, 3}."""
        g = np.asarray(g, dtype=np.float64)
        if g.shape != self.h.shape:
            raise DimensionMismatchError(f"Gower matrix {g.shape} does not match {self.h.shape}")
        keys, w = self._weights[order]
        return float(w @ _contractions(_trace_centre(g), keys))

    def central_weighted(self, gt, weights, order: int) -> float:
        """Like :meth:`central` for a Gower matrix given by unique rows ``gt`` and multiplicities.

        ``gt[a, b]`` is the Gower entry shared by every sample of pattern ``a``
        and every sample of pattern ``b``; ``weights`` sum to ``N``.
        """
        gt = np.asarray(gt, dtype=np.float64)
        w = np.asarray(weights, dtype=np.float64)
        if gt.shape != (w.size, w.size) or not np.isclose(w.sum(), self.n):
            raise DimensionMismatchError("unique-row Gower matrix and weights do not match N")
        keys, coef = self._weights[order]
        known = _weighted_contractions(gt, w, float(w @ np.diag(gt)))
        return float(coef @ np.array([known[key] for key in keys]))

    def moments(self, g) -> tuple[float, float, float]:
        """Return ``(mu, sigma2, third_central)``."""
        g = np.asarray(g, dtype=np.float64)
        mu = self.trace_h * float(np.trace(g)) / (self.n - 1)
        gc = _trace_centre(g)
        out = []
        for order in (2, 3):
            keys, w = self._weights[order]
            out.append(float(w @ _contractions(gc, keys)))
        return mu, out[0], out[1]


# ---------------------------------------------------------------------------
# Enumeration and Monte Carlo oracles.


def _between_for_perms(h: np.ndarray, g: np.ndarray, perms: np.ndarray) -> np.ndarray:
    """``sum_ij h_ij g[pi_i, pi_j]`` for each row ``pi`` of ``perms``."""
    n = h.shape[0]
    out = np.empty(perms.shape[0])
    chunk = max(1, 4_000_000 // (n * n))
    for start in range(0, perms.shape[0], chunk):
        p = perms[start : start + chunk]
        gp = g[p[:, :, None], p[:, None, :]]
        out[start : start + chunk] = np.einsum("ij,kij->k", h, gp)
    return out


def all_permutations(n: int) -> np.ndarray:
    if n > MAX_ENUMERATION_N:
        raise SampleSizeError(f"full enumeration limited to N <= {MAX_ENUMERATION_N}, got {n}")
    return np.array(list(itertools.permutations(range(n))), dtype=np.intp).reshape(-1, n)


def enumerate_B(h, g) -> np.ndarray:
    """``B`` for all ``N!`` simultaneous row/column relabelings of ``G``."""
    h, g = _check_pair(h, g)
    return _between_for_perms(h, g, all_permutations(h.shape[0]))


def permutation_generator(seed) -> np.random.Generator:
    """Counter-based (Philox) generator; ``seed`` may be an int or a sequence of ints."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def random_permutations(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` independent uniform permutations of ``range(n)`` (row-wise Fisher-Yates)."""
    base = np.broadcast_to(np.arange(n, dtype=np.intp), (count, n))
    return rng.permuted(base, axis=1)


@dataclass(frozen=True)
class MonteCarloConfig:
    n_perm: int = 10_000
    seed: int | tuple[int, ...] = 0


@dataclass(frozen=True)
class MonteCarloSkewness:
    gamma: float
    std_error: float
    n_perm: int


def monte_carlo_skewness(h, g, config: MonteCarloConfig = MonteCarloConfig()) -> MonteCarloSkewness:
    """Estimate the skewness from sampled permutations.

    The mean and variance are the exact closed-form values; only the third
    central moment is estimated, as the sample mean of ``(B - mu)^3``.
    """
    h, g = _check_pair(h, g)
    n = h.shape[0]
    if config.n_perm < 2:
        raise ValueError("need at least two permutations")
    mu, sigma2 = mean_variance(trace_quantities(h, g), n)
    if sigma2 <= 0:
        raise DegenerateDistributionError("permutation variance is zero")
    rng = permutation_generator(config.seed)
    cubes = np.empty(config.n_perm)
    block = 100_000
    for start in range(0, config.n_perm, block):
        count = min(block, config.n_perm - start)
        b = _between_for_perms(h, g, random_permutations(n, count, rng))
        cubes[start : start + count] = (b - mu) ** 3
    sigma3 = sigma2**1.5
    return MonteCarloSkewness(
        gamma=float(cubes.mean() / sigma3),
        std_error=float(cubes.std(ddof=1) / math.sqrt(config.n_perm) / sigma3),
        n_perm=config.n_perm,
    )


def enumerated_moments(h, g) -> PermMoments:
    """Moments by brute force over all ``N!`` permutations (N <= 9)."""
    b = enumerate_B(h, g)
    mu = float(b.mean())
    d = b - mu
    sigma2 = float(np.mean(d * d))
    if sigma2 <= VARIANCE_ZERO_RTOL * max(mu * mu, 1e-300):
        raise DegenerateDistributionError("every permutation gives the same B")
    return PermMoments(mu, sigma2, float(np.mean(d**3) / sigma2**1.5), "enumerated")


def _is_point_mass(mu: float, sigma2: float, g: np.ndarray) -> bool:
    scale = max(mu * mu, float(np.trace(g)) ** 2, 1e-300)
    return sigma2 <= VARIANCE_ZERO_RTOL * scale


def skewness(h, g, backend: Backend = "closed_form", mc_config: MonteCarloConfig | None = None) -> float:
    """Skewness of the permutation distribution of ``B``.

    Raises:
        DegenerateDistributionError: if the distribution is a point mass.
        SampleSizeError: for ``enumerated`` with ``N > 9``.
    """
    return perm_moments(h, g, backend=backend, mc_config=mc_config).gamma


def perm_moments(
    h,
    g,
    backend: Backend = "closed_form",
    mc_config: MonteCarloConfig | None = None,
    *,
    min_n: int = 4,
    exact: ExactMoments | None = None,
) -> PermMoments:
    """Mean, variance and skewness of the permutation distribution of ``B``.

    Pass ``exact`` (built once from ``h``) to reuse its preparation when many
    Gower matrices share the same grouping.
    """
    h, g = _check_pair(h, g)
    n = h.shape[0]
    if backend == "enumerated":
        return enumerated_moments(h, g)
    mu, sigma2 = mean_variance(trace_quantities(h, g), n, min_n=min_n)
    if _is_point_mass(mu, sigma2, g):
        raise DegenerateDistributionError("permutation variance is zero")
    if backend == "closed_form":
        third = (exact or ExactMoments(h)).central(g, 3)
        gamma = third / sigma2**1.5
    elif backend == "monte_carlo":
        gamma = monte_carlo_skewness(h, g, mc_config or MonteCarloConfig()).gamma
    else:
        raise ValueError(f"unknown skewness backend {backend!r}")
    return PermMoments(mu, sigma2, gamma, backend)
