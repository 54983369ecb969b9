"""Pearson type III null model for ``B`` and the induced distribution of ``F``.

The standardized between-group variability ``b = (B - mu) / sigma`` is modelled
as a Pearson type III variable with zero mean, unit variance and skewness
``gamma``. The ratio statistic is the Mobius map ``F = h(b)`` which has a pole
at ``beta = (T - mu) / sigma``, so the distribution of ``F`` is assembled
piecewise. Three layouts occur, depending on the sign of ``gamma`` and on
whether the pole lies inside the support of ``b``:

* ``gamma > 0``: the mass with ``b > beta`` maps to ``F < -1`` and the rest to
  ``F >= alpha``; the CDF is flat on ``[-1, alpha)``.
* ``gamma < 0`` and ``alpha < -1``: ``b < beta`` maps to ``F > -1``,
  ``beta < b <= -2/gamma`` maps to ``F <= alpha``; flat on ``(alpha, -1]``.
* ``gamma < 0`` and ``alpha > -1``: the support of ``F`` is ``(-1, alpha]``.

``gamma == 0`` (to within :data:`GAMMA_ZERO_TOL`) uses a standard Normal for
``b`` with the same construction as the positive case and ``alpha = -1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import DegenerateDistributionError, PoleError
from .moments import GAMMA_ZERO_TOL, PermMoments
from .special import _gamma_pq, gammainc_lower, gammainc_upper, log_gamma_density

_LOG_INV_SQRT_2PI = -0.5 * math.log(2.0 * math.pi)


def _shape_and_arg(b, gamma: float):
    k = 4.0 / (gamma * gamma)
    u = 2.0 * (2.0 + gamma * np.asarray(b, dtype=np.float64)) / (gamma * gamma)
    return k, u


def _out(x):
    x = np.asarray(x)
    return x if x.ndim else float(x)


def pt3_pdf(b, gamma: float):
    """Density of the standardized Pearson type III law; zero outside its support."""
    if gamma == 0:
        raise ValueError("gamma must be nonzero; use the Normal density for gamma == 0")
    k, u = _shape_and_arg(b, gamma)
    inside = u >= 0
    with np.errstate(invalid="ignore"):
        logd = np.where(inside, log_gamma_density(k, np.where(inside, u, 0.0)), -np.inf)
    return _out(np.exp(logd + math.log(2.0 / abs(gamma))))


def pt3_cdf(b, gamma: float):
    """``P(X <= b)``: ``P(k, u)`` for ``gamma > 0`` and ``1 - P(k, u)`` for ``gamma < 0``."""
    if gamma == 0:
        raise ValueError("gamma must be nonzero; use the Normal CDF for gamma == 0")
    k, u = _shape_and_arg(b, gamma)
    if gamma > 0:
        return _out(gammainc_lower(k, np.maximum(u, 0.0)))
    return _out(np.where(u <= 0, 1.0, gammainc_upper(k, np.maximum(u, 0.0))))


def pt3_sf(b, gamma: float):
    """``P(X > b)``, computed without forming ``1 - cdf``."""
    if gamma == 0:
        raise ValueError("gamma must be nonzero; use the Normal tail for gamma == 0")
    k, u = _shape_and_arg(b, gamma)
    if gamma > 0:
        return _out(gammainc_upper(k, np.maximum(u, 0.0)))
    return _out(np.where(u <= 0, 0.0, gammainc_lower(k, np.maximum(u, 0.0))))


@dataclass(frozen=True)
class DbfNull:
    """Fitted approximate null distribution of the DBF statistic."""

    mu: float
    sigma: float
    gamma: float
    total: float

    def __post_init__(self) -> None:
        if not (self.sigma > 0) or not math.isfinite(self.sigma):
            raise DegenerateDistributionError(f"sigma must be positive, got {self.sigma!r}")
        if not self.total > self.mu:
            raise ValueError(f"total variability {self.total!r} must exceed mu {self.mu!r}")

    @classmethod
    def from_moments(cls, m: PermMoments, total: float) -> "DbfNull":
        return cls(mu=m.mu, sigma=math.sqrt(m.sigma2), gamma=m.gamma, total=total)

    @property
    def beta(self) -> float:
        return (self.total - self.mu) / self.sigma

    @property
    def is_normal(self) -> bool:
        return abs(self.gamma) < GAMMA_ZERO_TOL

    @property
    def alpha(self) -> float:
        if self.is_normal:
            return -1.0
        return alpha_of(self.mu, self.sigma, self.gamma, self.total)

    @property
    def case(self) -> str:
        """One of ``"normal"``, ``"positive"``, ``"negative_split"``, ``"negative_bounded"``."""
        if self.is_normal:
            return "normal"
        if self.gamma > 0:
            return "positive"
        return "negative_split" if self.alpha < -1.0 else "negative_bounded"

    # Standardized-b helpers honouring the Normal fallback.
    def _cdf_b(self, b):
        if self.is_normal:
            return ndtr(b)
        return pt3_cdf(b, self.gamma)

    def _sf_b(self, b):
        if self.is_normal:
            return ndtr(-np.asarray(b, dtype=np.float64))
        return pt3_sf(b, self.gamma)

    def _tails_b(self, b: float) -> tuple[float, float]:
        """``(cdf, sf)`` at one point from a single incomplete-gamma evaluation."""
        if self.is_normal:
            return float(ndtr(b)), float(ndtr(-b))
        k, u = _shape_and_arg(b, self.gamma)
        if u <= 0:
            return (0.0, 1.0) if self.gamma > 0 else (1.0, 0.0)
        p, q = _gamma_pq(k, u)
        return (float(p), float(q)) if self.gamma > 0 else (float(q), float(p))

    def _pdf_b(self, b):
        if self.is_normal:
            b = np.asarray(b, dtype=np.float64)
            return np.exp(_LOG_INV_SQRT_2PI - 0.5 * b * b)
        return pt3_pdf(b, self.gamma)


def h_transform(b, null: DbfNull):
    """``F = (mu + sigma b) / (T - mu - sigma b)``."""
    b = np.asarray(b, dtype=np.float64)
    between = null.mu + null.sigma * b
    denom = null.total - between
    if np.any(denom == 0):
        raise PoleError("h evaluated at its pole b = beta")
    return _out(between / denom)


def h_inverse(f, null: DbfNull):
    """``b = ((T - mu) F - mu) / (sigma (1 + F))``."""
    f = np.asarray(f, dtype=np.float64)
    if np.any(f == -1.0):
        raise PoleError("inverse transform evaluated at its pole F = -1")
    return _out(((null.total - null.mu) * f - null.mu) / (null.sigma * (1.0 + f)))


def alpha_of(mu: float, sigma: float, gamma: float, total: float) -> float:
    """The image under ``h`` of the finite support end ``-2/gamma``.

    When that end coincides with the pole (only possible for ``gamma < 0``)
    the image is ``+inf`` and ``F`` is supported on all of ``(-1, inf)``.
    """
    if gamma == 0:
        raise ValueError("alpha is undefined for gamma == 0")
    denom = gamma * (total - mu) + 2.0 * sigma
    if denom == 0:
        return math.inf
    return (gamma * mu - 2.0 * sigma) / denom


def _safe_h_inverse(f: np.ndarray, null: DbfNull) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        b = ((null.total - null.mu) * f - null.mu) / (null.sigma * (1.0 + f))
    return b


def _piecewise(f, null: DbfNull, survival: bool) -> np.ndarray:
    f = np.asarray(f, dtype=np.float64)
    out = np.empty(f.shape)
    b = _safe_h_inverse(f, null)
    beta = null.beta
    case = null.case
    # Mass of the b-values beyond the pole (those mapped to F < -1 or F <= alpha).
    cdf_beta, upper_beta = null._tails_b(beta)

    def cdf_b(mask):
        return null._cdf_b(b[mask]) if mask.any() else 0.0

    def sf_b(mask):
        return null._sf_b(b[mask]) if mask.any() else 0.0

    neg_inf = np.isneginf(f)
    pos_inf = np.isposinf(f)
    finite = ~(neg_inf | pos_inf)

    if case in ("positive", "normal"):
        lo = -1.0
        hi = -1.0 if case == "normal" else null.alpha
        left = finite & (f < lo)
        gap = finite & (f >= lo) & (f < hi)
        right = finite & (f >= hi) & (f != -1.0)
        at_pole = finite & (f == -1.0) & ~gap
        if survival:
            out[left] = sf_b(left) + cdf_beta
            out[gap] = cdf_beta
            out[right] = sf_b(right) - upper_beta
            out[at_pole] = cdf_beta
        else:
            out[left] = cdf_b(left) - cdf_beta
            out[gap] = upper_beta
            out[right] = 1.0 + cdf_b(right) - cdf_beta
            out[at_pole] = upper_beta
    elif case == "negative_split":
        alpha = null.alpha
        left = finite & (f <= alpha)
        gap = finite & (f > alpha) & (f <= -1.0)
        right = finite & (f > -1.0)
        if survival:
            out[left] = sf_b(left) + cdf_beta
            out[gap] = cdf_beta
            out[right] = sf_b(right) - upper_beta
        else:
            out[left] = cdf_b(left) - cdf_beta
            out[gap] = upper_beta
            out[right] = 1.0 + cdf_b(right) - cdf_beta
    else:
        alpha = null.alpha
        below = finite & (f <= -1.0)
        mid = finite & (f > -1.0) & (f <= alpha)
        above = finite & (f > alpha)
        if survival:
            out[below] = 1.0
            out[mid] = sf_b(mid)
            out[above] = 0.0
        else:
            out[below] = 0.0
            out[mid] = cdf_b(mid)
            out[above] = 1.0

    out[neg_inf] = 1.0 if survival else 0.0
    out[pos_inf] = 0.0 if survival else 1.0
    return np.clip(out, 0.0, 1.0)


def dbf_cdf(f, null: DbfNull):
    """Approximate null CDF of the DBF statistic."""
    return _out(_piecewise(f, null, survival=False))


def dbf_sf(f, null: DbfNull):
    """``1 - dbf_cdf(f)`` evaluated from upper tails, accurate for tiny probabilities."""
    return _out(_piecewise(f, null, survival=True))


def dbf_pvalue(f_hat, null: DbfNull):
    """One-sided p-value ``P(F >= f_hat)`` under the approximate null."""
    return dbf_sf(f_hat, null)


def dbf_pdf(f, null: DbfNull):
    """Density ``T / (sigma (1 + f)^2) * pdf_b(h^{-1}(f))``; zero off the support."""
    f = np.asarray(f, dtype=np.float64)
    out = np.zeros(f.shape)
    ok = np.isfinite(f) & (f != -1.0)
    b = _safe_h_inverse(f[ok], null)
    out[ok] = null.total / (null.sigma * (1.0 + f[ok]) ** 2) * null._pdf_b(b)
    return _out(out)


def support_intervals(null: DbfNull) -> list[tuple[float, float]]:
    """Intervals of ``f`` carrying positive density, for quadrature and plotting."""
    case = null.case
    if case == "normal":
        return [(-math.inf, -1.0), (-1.0, math.inf)]
    if case == "positive":
        return [(-math.inf, -1.0), (null.alpha, math.inf)]
    if case == "negative_split":
        return [(-math.inf, null.alpha), (-1.0, math.inf)]
    return [(-1.0, null.alpha)]
