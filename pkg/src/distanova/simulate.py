"""Null-data generators and the experiments comparing approximate and reference p-values.

Three experiments are provided:

* :func:`compare_classical` compares the approximate DBF p-value with the exact ANOVA
  (scalar data, Euclidean distance) or Hotelling (multivariate data, total
  SSCP metric) p-value.
* :func:`compare_permutation` compares it with an exact or Monte Carlo permutation
  p-value for vector, genotype and curve data under several distances.
* :func:`ks_experiment` measures, by the KS distance, how well the approximate null
  CDF and permutation CDFs of growing size match the exact ANOVA-derived CDF.

Every run draws from its own generator seeded by ``(seed, run, attempt)``, so
results do not depend on how runs are scheduled.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np
from scipy.optimize import brentq
from scipy.signal import savgol_filter

from .classical import anova_f, f_cdf, hotelling_t2
from .core import GroupAssignment, gower_center, group_projector, variance_decomposition
from .dbf import dbf_permutation_test, dbf_test
from .distances import (
    FUNCTIONAL_MEASURES,
    GENETIC_MEASURES,
    CurveSet,
    canonical_measure,
    mahalanobis_metric,
    pairwise_matrix,
)
from .errors import DistanovaError, SampleSizeError
from .moments import perm_moments
from .pearson3 import DbfNull, dbf_cdf
from .permutation import PermutationPlan, perm_F_values

Scenario = Literal["univariate_normal", "mvn_wishart", "vector_normal", "snp_resample", "bezier_curves"]

# Smallest variance drawn for the scalar scenario; U(0, 10) can produce values arbitrarily near 0.
MIN_VARIANCE = 1e-6
BEZIER_SPAN = 48.0
BEZIER_RAW_POINTS = 1000
BEZIER_GRID_POINTS = 100
SMOOTHING_WINDOW = 101
# Permutation budgets of the KS experiment; smaller sets are prefixes of larger ones.
KS_BUDGETS = (1_000, 10_000, 50_000, 100_000)
KS_GRID_POINTS = 1000
KS_UPPER_QUANTILE = 0.9999
# Redraws allowed when a generated dataset has no defined p-value.
MAX_ATTEMPTS = 20


@dataclass(frozen=True)
class SimConfig:
    """Settings for one simulation experiment.

    ``n_perm=None`` requests full enumeration of the permutation reference.
    ``pool`` is the genotype pool for ``snp_resample``; a synthetic one is made
    from ``seed`` when omitted.
    """

    scenario: Scenario = "univariate_normal"
    n: int = 100
    g: int = 2
    p: int = 1
    runs: int = 200
    seed: int = 0
    measure: str | None = None
    n_perm: int | None = None
    workers: int = 1
    pool: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.runs < 1:
            raise ValueError("runs must be at least 1")
        if self.n < 2 or self.g < 1 or self.p < 1:
            raise ValueError("n, g and p must be positive (n >= 2)")
        if self.g > self.n:
            raise ValueError("more groups than samples")


@dataclass
class ComparisonResult:
    """Per-run p-values of an experiment and their summary."""

    p_approx: np.ndarray
    p_reference: np.ndarray
    ks_values: dict[int, np.ndarray] = field(default_factory=dict)
    ks_approx: float | None = None
    redraws: int = 0

    @property
    def abs_diff(self) -> np.ndarray:
        return np.abs(self.p_approx - self.p_reference)

    @property
    def mean_abs_diff(self) -> float:
        return float(self.abs_diff.mean()) if self.abs_diff.size else math.nan

    @property
    def sd_abs_diff(self) -> float:
        return float(self.abs_diff.std(ddof=1)) if self.abs_diff.size > 1 else math.nan


def derive_seed(*keys: int) -> int:
    """A 64-bit seed mixed from integer keys."""
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1, np.uint64)[0])


def balanced_labels(n: int, g: int) -> np.ndarray:
    """Group labels ``0..g-1`` in contiguous blocks whose sizes differ by at most one."""
    sizes = np.full(g, n // g)
    sizes[: n % g] += 1
    return np.repeat(np.arange(g), sizes)


# ---------------------------------------------------------------- generators


def gen_univariate_normal(config: SimConfig, run_seed: int) -> np.ndarray:
    """``N`` draws from ``N(mu, s2)`` with ``mu ~ U(-10, 10)`` and ``s2 ~ U(0, 10)``."""
    rng = np.random.default_rng(run_seed)
    mu = rng.uniform(-10.0, 10.0)
    var = max(rng.uniform(0.0, 10.0), MIN_VARIANCE)
    return rng.normal(mu, math.sqrt(var), size=config.n)


def wishart_identity(p: int, rng: np.random.Generator) -> np.ndarray:
    """A Wishart matrix with ``p`` degrees of freedom and identity scale."""
    z = rng.standard_normal((p, p))
    return z @ z.T


def gen_mvn_wishart(config: SimConfig, run_seed: int) -> np.ndarray:
    """``N`` draws from ``N_P(mu, S)``, ``mu_j ~ U(-6, 6)`` and ``S`` Wishart."""
    rng = np.random.default_rng(run_seed)
    mu = rng.uniform(-6.0, 6.0, size=config.p)
    chol = np.linalg.cholesky(wishart_identity(config.p, rng))
    return mu + rng.standard_normal((config.n, config.p)) @ chol.T


def gen_vector_normal(config: SimConfig, run_seed: int) -> np.ndarray:
    """``N x P`` independent ``N(0, 4)`` entries."""
    return np.random.default_rng(run_seed).normal(0.0, 2.0, size=(config.n, config.p))


def synthetic_genotype_pool(n_subjects: int = 153, n_snps: int = 2000, seed: int = 0) -> np.ndarray:
    """Minor-allele counts under Hardy-Weinberg with allele frequencies ``U(0.05, 0.5)``."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 7919]))
    maf = rng.uniform(0.05, 0.5, size=n_snps)
    return rng.binomial(2, maf, size=(n_subjects, n_snps)).astype(np.int8)


def gen_snp_resample(pool, n: int, p: int, run_seed: int) -> np.ndarray:
    """``n`` subjects and ``p`` SNP columns drawn without replacement from ``pool``."""
    pool = np.asarray(pool)
    if pool.ndim != 2 or n > pool.shape[0] or p > pool.shape[1]:
        raise SampleSizeError(f"pool of shape {pool.shape} cannot supply {n} x {p}")
    rng = np.random.default_rng(run_seed)
    rows = rng.choice(pool.shape[0], size=n, replace=False)
    cols = rng.choice(pool.shape[1], size=p, replace=False)
    return pool[np.ix_(rows, cols)]


def bezier_time_to_parameter(t, c: float, span: float = BEZIER_SPAN) -> np.ndarray:
    """Invert ``t(s) = 2 s (1 - s) c + s^2 span`` for ``s`` in ``[0, 1]`` (``0 < c < span``)."""
    t = np.asarray(t, dtype=np.float64)
    return t / (c + np.sqrt(c * c + (span - 2.0 * c) * t))


def bezier_curve(t, c: float, y_controls, span: float = BEZIER_SPAN) -> np.ndarray:
    """Quadratic Bezier height at times ``t`` for time controls ``(0, c, span)``."""
    y0, y1, y2 = y_controls
    s = bezier_time_to_parameter(t, c, span)
    return (1 - s) ** 2 * y0 + 2 * s * (1 - s) * y1 + s * s * y2


def gen_bezier_curves(config: SimConfig, run_seed: int) -> CurveSet:
    """Noisy samples of random quadratic Bezier curves, smoothed and thinned to a common grid.

    Each curve has time controls ``(0, c, 48)`` with ``c ~ U(8, 40)`` and height
    controls ``U(-10, 10)``. It is sampled at 1000 equally spaced times with
    standard Gaussian noise, smoothed by a local quadratic fit over 101 samples
    and kept at 100 equally spaced grid points.
    """
    rng = np.random.default_rng(run_seed)
    t = np.linspace(0.0, BEZIER_SPAN, BEZIER_RAW_POINTS)
    keep = np.round(np.linspace(0, BEZIER_RAW_POINTS - 1, BEZIER_GRID_POINTS)).astype(int)
    curves = np.empty((config.n, keep.size))
    for i in range(config.n):
        c = rng.uniform(8.0, 40.0)
        heights = rng.uniform(-10.0, 10.0, size=3)
        noisy = bezier_curve(t, c, heights) + rng.standard_normal(t.size)
        curves[i] = savgol_filter(noisy, SMOOTHING_WINDOW, 2, mode="interp")[keep]
    return CurveSet(t[keep], curves)


# ---------------------------------------------------------------- helpers


def ks_statistic(cdf_a, cdf_b) -> float:
    """Largest absolute gap between two CDFs evaluated on the same grid."""
    a = np.asarray(cdf_a, dtype=np.float64)
    b = np.asarray(cdf_b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"CDFs evaluated on different grids: {a.shape} vs {b.shape}")
    return float(np.max(np.abs(a - b))) if a.size else 0.0


def _default_measure(config: SimConfig) -> str:
    defaults = {
        "univariate_normal": "euclidean",
        "vector_normal": "euclidean",
        "snp_resample": "ibs",
        "bezier_curves": "l2",
    }
    return canonical_measure(config.measure or defaults.get(config.scenario, "euclidean"))


def _pool(config: SimConfig) -> np.ndarray:
    return config.pool if config.pool is not None else synthetic_genotype_pool(seed=config.seed)


def _generate(config: SimConfig, run_seed: int, pool: np.ndarray | None):
    if config.scenario == "univariate_normal":
        return gen_univariate_normal(config, run_seed)
    if config.scenario == "mvn_wishart":
        return gen_mvn_wishart(config, run_seed)
    if config.scenario == "vector_normal":
        return gen_vector_normal(config, run_seed)
    if config.scenario == "snp_resample":
        return gen_snp_resample(pool, config.n, config.p, run_seed)
    if config.scenario == "bezier_curves":
        return gen_bezier_curves(config, run_seed)
    raise ValueError(f"unknown scenario {config.scenario!r}")


def _check_measure(config: SimConfig, measure: str) -> None:
    genetic = config.scenario == "snp_resample"
    functional = config.scenario == "bezier_curves"
    if genetic != (measure in GENETIC_MEASURES) or functional != (measure in FUNCTIONAL_MEASURES):
        raise ValueError(f"measure {measure!r} does not fit scenario {config.scenario!r}")


def _with_attempts(config: SimConfig, run: int, one_run):
    """Call ``one_run(seed)`` until it yields p-values; returns ``(p_approx, p_ref, redraws)``."""
    for attempt in range(MAX_ATTEMPTS):
        try:
            pa, pr = one_run(derive_seed(config.seed, run, attempt))
        except DistanovaError:
            continue
        if math.isfinite(pa) and math.isfinite(pr):
            return pa, pr, attempt
    raise DistanovaError(f"run {run}: no usable dataset after {MAX_ATTEMPTS} draws")


def _classical_run(args: tuple[SimConfig, int]) -> tuple[float, float, int]:
    config, run = args
    labels = balanced_labels(config.n, config.g)

    def one(seed: int) -> tuple[float, float]:
        y = _generate(config, seed, None)
        if config.scenario == "univariate_normal":
            delta = pairwise_matrix(y, "euclidean")
            reference = anova_f(y, labels).pvalue
        else:
            delta = mahalanobis_metric(y, labels, "total")
            reference = hotelling_t2(y, labels).pvalue
        approx = dbf_test(delta, labels, strict=True).pvalue
        return approx, reference

    return _with_attempts(config, run, one)


def _permutation_run(args: tuple[SimConfig, int, np.ndarray | None]) -> tuple[float, float, int]:
    config, run, pool = args
    labels = balanced_labels(config.n, config.g)
    measure = _default_measure(config)
    if config.n_perm is None:
        plan = PermutationPlan(mode="exact")
    else:
        plan = PermutationPlan(mode="monte_carlo", n_pi=config.n_perm, seed=derive_seed(config.seed, run, 1 << 20))

    def one(seed: int) -> tuple[float, float]:
        delta = pairwise_matrix(_generate(config, seed, pool), measure)
        approx = dbf_test(delta, labels, strict=True).pvalue
        reference = dbf_permutation_test(delta, labels, plan, strict=True).pvalue
        return approx, reference

    return _with_attempts(config, run, one)


def _map_runs(func, items: list, workers: int) -> list:
    if workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(func, items, chunksize=max(1, len(items) // (4 * workers))))
    return [func(item) for item in items]


def _collect(rows: list[tuple[float, float, int]]) -> ComparisonResult:
    arr = np.array([(a, r) for a, r, _ in rows], dtype=np.float64).reshape(-1, 2)
    return ComparisonResult(arr[:, 0], arr[:, 1], redraws=sum(k for _, _, k in rows))


# ---------------------------------------------------------------- experiments


def compare_classical(config: SimConfig) -> ComparisonResult:
    """Approximate DBF p-values against ANOVA (``univariate_normal``) or Hotelling (``mvn_wishart``)."""
    if config.scenario not in ("univariate_normal", "mvn_wishart"):
        raise ValueError("the classical comparison uses the univariate_normal or mvn_wishart scenario")
    if config.scenario == "mvn_wishart" and config.g != 2:
        raise ValueError("the Hotelling comparison needs exactly 2 groups")
    items = [(config, run) for run in range(config.runs)]
    return _collect(_map_runs(_classical_run, items, config.workers))


def compare_permutation(config: SimConfig) -> ComparisonResult:
    """Approximate DBF p-values against permutation p-values for one data type and distance."""
    measure = _default_measure(config)
    _check_measure(config, measure)
    pool = _pool(config) if config.scenario == "snp_resample" else None
    items = [(config, run, pool) for run in range(config.runs)]
    return _collect(_map_runs(_permutation_run, items, config.workers))


def _quantile(null: DbfNull, q: float, lo: float) -> float:
    """Quantile of the approximate null on the branch ``f > lo``."""
    hi = max(1.0, 2.0 * abs(lo) + 1.0)
    while dbf_cdf(hi, null) < q:
        hi *= 2.0
    return brentq(lambda f: dbf_cdf(f, null) - q, lo, hi, xtol=1e-14)


def ks_grid(null: DbfNull, points: int = KS_GRID_POINTS, upper: float = KS_UPPER_QUANTILE) -> np.ndarray:
    """Equally spaced points across the range of the approximate null.

    For positive skewness the range starts at the support end ``alpha``;
    otherwise at the ``1 - upper`` quantile. It ends at the ``upper``
    quantile, or at ``alpha`` when that bounds the support from above.
    """
    start = -1.0 + 1e-12
    lo = null.alpha if null.case == "positive" else _quantile(null, 1.0 - upper, start)
    hi = null.alpha if null.case == "negative_bounded" and math.isfinite(null.alpha) else _quantile(null, upper, lo)
    return np.linspace(lo, hi, points)


def ks_experiment(config: SimConfig) -> ComparisonResult:
    """KS distances to the exact null CDF of the scalar DBF statistic.

    One dataset is generated from ``config.seed``. The approximate null CDF and
    permutation CDFs built from nested permutation sets (one independent set
    per run) are compared with the exact CDF implied by the ANOVA F law.
    """
    if config.scenario != "univariate_normal":
        raise ValueError("the KS experiment uses the univariate_normal scenario")
    labels = balanced_labels(config.n, config.g)
    y = gen_univariate_normal(config, derive_seed(config.seed, 0))
    ga = GroupAssignment.from_labels(labels)
    gower = gower_center(pairwise_matrix(y, "euclidean"))
    v = variance_decomposition(gower, group_projector(ga))
    null = DbfNull.from_moments(perm_moments(group_projector(ga), gower), v.total)
    grid = ks_grid(null)
    d1, d2 = config.g - 1, config.n - config.g
    exact = f_cdf(grid * d2 / d1, d1, d2)
    ks_approx = ks_statistic(dbf_cdf(grid, null), exact)
    budgets = tuple(b for b in KS_BUDGETS if config.n_perm is None or b <= config.n_perm)
    items = [(gower, ga, grid, exact, budgets, derive_seed(config.seed, run, 1 << 21)) for run in range(config.runs)]
    per_run = _map_runs(_ks_run, items, config.workers)
    ks = {b: np.array([row[i] for row in per_run]) for i, b in enumerate(budgets)}
    # For this experiment the "p" arrays carry the per-run KS at the largest budget and the approximate KS.
    largest = ks[budgets[-1]] if budgets else np.empty(0)
    return ComparisonResult(np.full(largest.size, ks_approx), largest, ks_values=ks, ks_approx=ks_approx)


def _ks_run(args) -> list[float]:
    gower, ga, grid, exact, budgets, seed = args
    values = perm_F_values(gower, ga, PermutationPlan(n_pi=max(budgets), seed=seed, include_identity=False))
    out = []
    for b in budgets:
        head = np.sort(values[:b])
        ecdf = np.searchsorted(head, grid, side="right") / b
        out.append(ks_statistic(ecdf, exact))
    return out


# ---------------------------------------------------------------- output


def write_comparison_csv(result: ComparisonResult, path: str | Path) -> Path:
    """One row per run plus a summary row."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["run_id", "p_approx", "p_reference", "abs_diff"])
        for i, (a, r) in enumerate(zip(result.p_approx, result.p_reference)):
            writer.writerow([i, repr(float(a)), repr(float(r)), repr(float(abs(a - r)))])
        writer.writerow(["summary", "mean_abs_diff", repr(result.mean_abs_diff), repr(result.sd_abs_diff)])
    return path


def write_ks_csv(result: ComparisonResult, path: str | Path) -> Path:
    """KS values per permutation budget plus the approximate-CDF reference line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["budget", "run_id", "ks"])
        for budget, values in result.ks_values.items():
            for i, value in enumerate(values):
                writer.writerow([budget, i, repr(float(value))])
        writer.writerow(["approx", "", repr(float(result.ks_approx))])
    return path


__all__ = [
    "ComparisonResult",
    "SimConfig",
    "balanced_labels",
    "bezier_curve",
    "compare_classical",
    "compare_permutation",
    "derive_seed",
    "gen_bezier_curves",
    "gen_mvn_wishart",
    "gen_snp_resample",
    "gen_univariate_normal",
    "gen_vector_normal",
    "ks_experiment",
    "ks_grid",
    "ks_statistic",
    "synthetic_genotype_pool",
    "wishart_identity",
    "write_comparison_csv",
    "write_ks_csv",
]
