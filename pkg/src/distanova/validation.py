"""Oracle-equivalence checks run by ``distanova validate`` and the acceptance tests.

Each check compares a fast computation with an independent oracle (full
enumeration, classical test statistics, quadrature) over randomized inputs
and reports the worst discrepancy against its tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .classical import anova_f, anova_from_dbf, hotelling_t2, t2_from_dbf
from .core import dbf, group_projector, gower_center
from .distances import mahalanobis_metric, pairwise_matrix
from .moments import (
    MonteCarloConfig,
    enumerated_moments,
    monte_carlo_skewness,
    perm_moments,
)
from .pearson3 import DbfNull, dbf_cdf, dbf_pdf, pt3_pdf, support_intervals


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst: float
    tolerance: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: worst={self.worst:.3g} tol={self.tolerance:.3g} {self.detail}".rstrip()


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def _random_labels(rng: np.random.Generator, n: int, g: int) -> np.ndarray:
    """Labels with every one of ``g`` groups nonempty."""
    labels = np.concatenate([np.arange(g), rng.integers(0, g, size=n - g)])
    return rng.permutation(labels)


def check_moments(
    n_datasets: int = 50, mc_draws: int = 1_000_000, seed: int = 0, rel_tol: float = 1e-10, se_tol: float = 3.0
) -> list[CheckResult]:
    """Closed-form moments against full enumeration for ``N`` in 4..7.

    Returns three results: mean and variance to ``rel_tol``, the closed-form
    skewness against enumeration to 1e-8, and the Monte Carlo skewness within
    ``se_tol`` standard errors of the enumerated value.
    """
    rng = np.random.default_rng(seed)
    worst_mv, worst_gamma, worst_z = 0.0, 0.0, 0.0
    for i in range(n_datasets):
        n = int(rng.integers(4, 8))
        g = int(rng.integers(2, min(n - 1, 4) + 1))  # all-singleton groups make B constant
        h = group_projector(_random_labels(rng, n, g))
        y = rng.normal(size=(n, int(rng.integers(1, 4))))
        gower = gower_center(pairwise_matrix(y, "euclidean"))
        ref = enumerated_moments(h, gower)
        closed = perm_moments(h, gower)
        worst_mv = max(worst_mv, _rel(closed.mu, ref.mu), _rel(closed.sigma2, ref.sigma2))
        worst_gamma = max(worst_gamma, abs(closed.gamma - ref.gamma) / max(1.0, abs(ref.gamma)))
        mc = monte_carlo_skewness(h, gower, MonteCarloConfig(n_perm=mc_draws, seed=(seed, i)))
        worst_z = max(worst_z, abs(mc.gamma - ref.gamma) / mc.std_error)
    return [
        CheckResult("moments.mean_variance_vs_enumeration", worst_mv <= rel_tol, worst_mv, rel_tol),
        CheckResult("moments.closed_form_skewness_vs_enumeration", worst_gamma <= 1e-8, worst_gamma, 1e-8),
        CheckResult(
            "moments.monte_carlo_skewness_vs_enumeration",
            worst_z <= se_tol,
            worst_z,
            se_tol,
            f"(standard errors, {mc_draws} draws)",
        ),
    ]


def check_anova_identity(n_datasets: int = 100, seed: int = 1, rel_tol: float = 1e-9) -> CheckResult:
    """Rescaled scalar Euclidean DBF statistic against the classical ANOVA F."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_datasets):
        g = int(rng.integers(2, 7))
        n = int(rng.integers(g + 2, 201))
        labels = _random_labels(rng, n, g)
        y = rng.normal(size=n) + rng.normal(scale=0.5, size=g)[labels]
        f = anova_from_dbf(dbf(pairwise_matrix(y, "euclidean"), labels), n, g)
        worst = max(worst, _rel(f, anova_f(y, labels).statistic))
    return CheckResult("classical.anova_identity", worst <= rel_tol, worst, rel_tol)


def check_hotelling_identity(n_datasets: int = 100, seed: int = 2, rel_tol: float = 1e-8) -> CheckResult:
    """T^2 recovered from the total-SSCP DBF statistic against T^2 computed directly."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_datasets):
        p = int(rng.integers(1, 9))
        n = int(rng.integers(p + 4, 61))
        labels = _random_labels(rng, n, 2)
        y = rng.normal(size=(n, p)) + rng.normal(scale=0.3, size=(2, p))[labels]
        f = dbf(mahalanobis_metric(y, labels, "total"), labels)
        worst = max(worst, _rel(t2_from_dbf(f, n, p), hotelling_t2(y, labels).statistic))
    return CheckResult("classical.hotelling_identity", worst <= rel_tol, worst, rel_tol)


def random_null(rng: np.random.Generator, case: str) -> DbfNull:
    """A random fitted null of the requested shape case.

    ``case`` is ``"positive"``, ``"negative_split"`` (support end below -1) or
    ``"negative_bounded"`` (support end above -1).
    """
    while True:
        mu = float(rng.uniform(0.1, 5.0))
        sigma = float(rng.uniform(0.05, 2.0)) * mu
        total = mu + float(rng.uniform(0.5, 20.0)) * mu
        mag = float(rng.uniform(0.05, 3.0))
        null = DbfNull(mu, sigma, mag if case == "positive" else -mag, total)
        if null.case == case and math.isfinite(null.alpha):
            return null


def _integrate(fn, lo: float, hi: float, singular_at: float | None, k: float) -> float:
    """``int fn`` over ``(lo, hi)``; a power substitution removes an ``|x - s|^(k-1)`` end singularity."""
    if singular_at is not None and k < 1.0 and singular_at in (lo, hi):
        raw = fn

        def fn(x):
            # Within an ulp of the end the density is infinite; that sliver carries ~ulp**k mass.
            value = raw(x)
            return value if math.isfinite(value) else 0.0

        m = math.ceil(1.0 / k) + 1.0
        sign = 1.0 if singular_at == lo else -1.0
        other = hi if sign > 0 else lo
        span = abs(other - singular_at) if math.isfinite(other) else math.inf
        if math.isinf(span):
            cut = 1.0
            near = quad(lambda u: fn(singular_at + sign * u**m) * m * u ** (m - 1), 0.0, cut, limit=200)[0]
            far = quad(fn, *sorted((singular_at + sign * cut**m, other)), limit=200)[0]
            return near + far
        top = span ** (1.0 / m)
        return quad(lambda u: fn(singular_at + sign * u**m) * m * u ** (m - 1), 0.0, top, limit=200, epsabs=1e-13)[0]
    return quad(fn, lo, hi, limit=200, epsabs=1e-13, epsrel=1e-12)[0]


def dbf_pdf_mass(null: DbfNull) -> float:
    """Total mass of :func:`dbf_pdf` by adaptive quadrature over its support."""
    k = 4.0 / null.gamma**2 if not null.is_normal else math.inf
    total = 0.0
    for lo, hi in support_intervals(null):
        total += _integrate(lambda f: float(dbf_pdf(f, null)), lo, hi, null.alpha, k)
    return total


def check_cdf_validity(
    n_params: int = 1000, grid_points: int = 10_000, seed: int = 3, quadrature_every: int = 1
) -> list[CheckResult]:
    """Limits, monotonicity, right-continuity and density mass of the approximate null CDF."""
    rng = np.random.default_rng(seed)
    cases = ("positive", "negative_split", "negative_bounded")
    worst_limit = worst_drop = worst_jump = worst_mass = 0.0
    huge = 1e300
    for i in range(n_params):
        null = random_null(rng, cases[i % 3])
        lo_end, hi_end = dbf_cdf(-huge, null), dbf_cdf(huge, null)
        worst_limit = max(worst_limit, abs(lo_end), abs(1.0 - hi_end))
        alpha = null.alpha
        span = 10.0 * (abs(alpha) + 2.0)
        grid = np.sort(np.concatenate([np.linspace(-span, span, grid_points), [alpha, -1.0]]))
        cdf = np.asarray(dbf_cdf(grid, null))
        worst_drop = max(worst_drop, float(np.max(np.maximum(cdf[:-1] - cdf[1:], 0.0))))
        # One ulp to the right of each branch point; near an infinite-density end the
        # continuous CDF still moves by about ulp**k there.
        for x in (alpha, -1.0, float(np.nextafter(-1.0, -2.0))):
            step = float(np.nextafter(x, math.inf))
            worst_jump = max(worst_jump, abs(float(dbf_cdf(step, null)) - float(dbf_cdf(x, null))))
        if i % quadrature_every == 0:
            worst_mass = max(worst_mass, abs(dbf_pdf_mass(null) - 1.0))
    return [
        CheckResult("pearson3.cdf_limits", worst_limit < 1e-8, worst_limit, 1e-8),
        CheckResult("pearson3.cdf_monotone", worst_drop <= 1e-12, worst_drop, 1e-12),
        CheckResult("pearson3.cdf_right_continuous", worst_jump <= 1e-6, worst_jump, 1e-6),
        CheckResult("pearson3.pdf_mass", worst_mass <= 1e-6, worst_mass, 1e-6),
    ]


def pt3_moments(gamma: float) -> tuple[float, float, float, float]:
    """Mass, mean, variance and skewness of the standardized Pearson III density by quadrature."""
    k = 4.0 / gamma**2
    end = -2.0 / gamma
    lo, hi = (end, math.inf) if gamma > 0 else (-math.inf, end)
    raw = [_integrate(lambda b, r=r: b**r * float(pt3_pdf(b, gamma)), lo, hi, end, k) for r in range(4)]
    mass, mean = raw[0], raw[1]
    var = raw[2] - mean**2
    third = raw[3] - 3 * mean * raw[2] + 2 * mean**3
    return mass, mean, var, third / var**1.5


def check_pt3_moments(gammas=(0.1, -0.1, 0.5, -0.5, 1.5, -1.5, 3.0, -3.0), tol: float = 1e-6) -> CheckResult:
    worst = 0.0
    for g in gammas:
        mass, mean, var, skew = pt3_moments(g)
        worst = max(worst, abs(mass - 1.0), abs(mean), abs(var - 1.0), abs(skew - g))
    return CheckResult("pearson3.pt3_moments", worst <= tol, worst, tol)


def run_all(quick: bool = True) -> list[CheckResult]:
    """Every check; ``quick`` shrinks the randomized sample sizes for interactive use."""
    if quick:
        return [
            *check_moments(n_datasets=10, mc_draws=100_000),
            check_anova_identity(n_datasets=20),
            check_hotelling_identity(n_datasets=20),
            *check_cdf_validity(n_params=60, grid_points=2000),
            check_pt3_moments(),
        ]
    return [
        *check_moments(),
        check_anova_identity(),
        check_hotelling_identity(),
        *check_cdf_validity(),
        check_pt3_moments(),
    ]
