"""One-dimensional parametric laws for single device metrics.

Fidelity-like metrics live on [0, 1] and are modelled with a Beta law; coherence
times live on (0, inf) and use a Gamma law.  Everything here is vectorised over
``x`` / ``u`` and pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import integrate, special

__all__ = [
    "Family",
    "MarginalDistribution",
    "beta",
    "gamma",
    "fit_moments",
    "hellinger_1d",
    "hellinger_1d_quadrature",
]

_QUANTILE_TOL = 1e-9


class Family(str, Enum):
    BETA = "beta"
    GAMMA = "gamma"


@dataclass(frozen=True)
class MarginalDistribution:
    """Beta(alpha=p1, beta=p2) or Gamma(shape=p1, scale=p2)."""

    family: Family
    p1: float
    p2: float

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if not (np.isfinite(self.p1) and np.isfinite(self.p2)):
            raise ValueError(f"non-finite parameters for {self.family.value}: {self.p1}, {self.p2}")
        if self.p1 <= 0 or self.p2 <= 0:
            raise ValueError(f"{self.family.value} parameters must be positive, got {self.p1}, {self.p2}")
        object.__setattr__(self, "p1", float(self.p1))
        object.__setattr__(self, "p2", float(self.p2))

    # Beta / Gamma friendly aliases
    @property
    def alpha(self) -> float:
        return self.p1

    @property
    def beta(self) -> float:
        return self.p2

    @property
    def shape(self) -> float:
        return self.p1

    @property
    def scale(self) -> float:
        return self.p2

    @property
    def support(self) -> tuple[float, float]:
        return (0.0, 1.0) if self.family is Family.BETA else (0.0, math.inf)

    def mean(self) -> float:
        if self.family is Family.BETA:
            return self.p1 / (self.p1 + self.p2)
        return self.p1 * self.p2

    def var(self) -> float:
        if self.family is Family.BETA:
            a, b = self.p1, self.p2
            return a * b / ((a + b) ** 2 * (a + b + 1.0))
        return self.p1 * self.p2**2

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape, -np.inf)
        if self.family is Family.BETA:
            a, b = self.p1, self.p2
            inside = (x > 0) & (x < 1)
            xi = x[inside]
            out[inside] = (a - 1) * np.log(xi) + (b - 1) * np.log1p(-xi) - special.betaln(a, b)
            # endpoints carry finite mass density only when the exponent vanishes
            for edge, exponent, other in ((0.0, a, b), (1.0, b, a)):
                at = x == edge
                if np.any(at) and exponent == 1.0:
                    out[at] = -special.betaln(a, b)
                elif np.any(at) and exponent < 1.0:
                    out[at] = np.inf
        else:
            k, theta = self.p1, self.p2
            inside = x > 0
            xi = x[inside]
            out[inside] = (k - 1) * np.log(xi) - xi / theta - special.gammaln(k) - k * math.log(theta)
            at = x == 0
            if np.any(at):
                if k == 1.0:
                    out[at] = -math.log(theta)
                elif k < 1.0:
                    out[at] = np.inf
        return out if out.ndim else float(out)

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.family is Family.BETA:
            out = special.betainc(self.p1, self.p2, np.clip(x, 0.0, 1.0))
        else:
            out = special.gammainc(self.p1, np.maximum(x, 0.0) / self.p2)
        return out if out.ndim else float(out)

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        if self.family is Family.BETA:
            out = special.betaincc(self.p1, self.p2, np.clip(x, 0.0, 1.0))
        else:
            out = special.gammaincc(self.p1, np.maximum(x, 0.0) / self.p2)
        return out if out.ndim else float(out)

    def quantile(self, u):
        """Inverse cdf.  Raises ``ValueError`` for ``u`` outside [0, 1]."""
        u = np.asarray(u, dtype=float)
        if np.any(~((u >= 0) & (u <= 1))):
            raise ValueError("quantile level must lie in [0, 1]")
        if self.family is Family.BETA:
            x = special.betaincinv(self.p1, self.p2, u)
        else:
            x = special.gammaincinv(self.p1, u) * self.p2
        x = np.atleast_1d(np.asarray(x, dtype=float)).copy()
        flat_u = np.atleast_1d(u)
        bad = ~np.isfinite(x) | (np.abs(self.cdf(x) - flat_u) > _QUANTILE_TOL)
        for i in np.flatnonzero(bad):
            x.flat[i] = self._solve_quantile(float(flat_u.flat[i]))
        return x.reshape(u.shape) if u.ndim else float(x[0])

    def _solve_quantile(self, u: float) -> float:
        # bracketed Newton with bisection fallback
        lo, hi = self.support
        if u <= 0.0:
            return lo
        if u >= 1.0:
            return hi
        if math.isinf(hi):
            hi = max(self.mean(), 1.0)
            while self.cdf(hi) < u:
                hi *= 2.0
        x = min(max(self.mean(), lo), hi)
        for _ in range(200):
            f = self.cdf(x) - u
            if abs(f) <= 1e-13:
                break
            if f > 0:
                hi = x
            else:
                lo = x
            d = self.pdf(x)
            step = x - f / d if d > 0 and np.isfinite(d) else None
            x = step if step is not None and lo < step < hi else 0.5 * (lo + hi)
            if hi - lo <= 1e-15 * max(1.0, abs(x)):
                break
        return float(x)

    def rvs(self, size, rng: np.random.Generator):
        if self.family is Family.BETA:
            return rng.beta(self.p1, self.p2, size=size)
        return rng.gamma(self.p1, self.p2, size=size)

    def to_dict(self) -> dict:
        return {"family": self.family.value, "p1": self.p1, "p2": self.p2}

    @classmethod
    def from_dict(cls, d: dict) -> "MarginalDistribution":
        return cls(Family(d["family"]), d["p1"], d["p2"])


def beta(alpha: float, b: float) -> MarginalDistribution:
    return MarginalDistribution(Family.BETA, alpha, b)


def gamma(shape: float, scale: float) -> MarginalDistribution:
    return MarginalDistribution(Family.GAMMA, shape, scale)


def fit_moments(samples, family) -> MarginalDistribution:
    """Method-of-moments fit.

    Parameters
    ----------
    samples : array-like
        At least 8 observations inside the family's support.
    family : Family or str
        ``"beta"`` or ``"gamma"``.

    Raises
    ------
    ValueError
        Too few samples, zero variance, out-of-support data, or moments that
        imply non-positive parameters.
    """
    family = Family(family)
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 8:
        raise ValueError(f"need at least 8 samples to fit, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ValueError("samples contain non-finite values")
    m = float(np.mean(x))
    v = float(np.var(x, ddof=1))
    if v <= 0 or np.ptp(x) == 0:
        raise ValueError("sample variance is zero; cannot fit a marginal")
    if family is Family.BETA:
        if np.any((x < 0) | (x > 1)):
            raise ValueError("beta samples must lie in [0, 1]")
        common = m * (1 - m) / v - 1.0
        a, b = m * common, (1 - m) * common
    else:
        if np.any(x <= 0):
            raise ValueError("gamma samples must be positive")
        a, b = m * m / v, v / m
    if not (a > 0 and b > 0):
        raise ValueError(f"moments imply non-positive {family.value} parameters ({a:.4g}, {b:.4g})")
    return MarginalDistribution(family, a, b)


def _log_affinity(d1: MarginalDistribution, d2: MarginalDistribution) -> float:
    if d1.family is Family.BETA:
        a1, b1, a2, b2 = d1.p1, d1.p2, d2.p1, d2.p2
        return special.betaln(0.5 * (a1 + a2), 0.5 * (b1 + b2)) - 0.5 * (
            special.betaln(a1, b1) + special.betaln(a2, b2)
        )
    k1, t1, k2, t2 = d1.p1, d1.p2, d2.p1, d2.p2
    k = 0.5 * (k1 + k2)
    return (
        special.gammaln(k)
        - 0.5 * (special.gammaln(k1) + special.gammaln(k2))
        + k * math.log(2.0 * t1 * t2 / (t1 + t2))
        - 0.5 * (k1 * math.log(t1) + k2 * math.log(t2))
    )


def hellinger_1d_quadrature(d1: MarginalDistribution, d2: MarginalDistribution, tol: float = 1e-10) -> float:
    """Hellinger distance by adaptive quadrature.

    Integrates ``(sqrt(f1) - sqrt(f2))**2 / 2``, which equals ``1 - affinity``
    without the cancellation that ruins small distances.  Integrates over ``x = sin(phi)**2`` (Beta) or ``x = t**2`` (Gamma) so that
    endpoint singularities of shape parameters below one stay integrable.
    """
    if d1.family is not d2.family:
        raise ValueError("hellinger distance needs two marginals of the same family")

    def half_sq_diff(x):
        return 0.5 * (math.exp(0.5 * d1.logpdf(x)) - math.exp(0.5 * d2.logpdf(x))) ** 2

    if d1.family is Family.BETA:
        def integrand(phi):
            sn, cs = math.sin(phi), math.cos(phi)
            x = sn * sn
            return 0.0 if x <= 0.0 or x >= 1.0 else half_sq_diff(x) * 2.0 * sn * cs

        to_t = lambda x: math.asin(math.sqrt(x))  # noqa: E731
        lo, hi = 0.0, 0.5 * math.pi
    else:
        def integrand(t):
            return 0.0 if t <= 0.0 else half_sq_diff(t * t) * 2.0 * t

        to_t = math.sqrt
        lo, hi = 0.0, math.inf

    # breakpoints around where each law keeps its mass
    qs = (1e-8, 1e-3, 0.1, 0.5, 0.9, 0.999, 1 - 1e-8)
    pts = sorted({to_t(float(d.quantile(q))) for d in (d1, d2) for q in qs})
    pts = [p for p in pts if lo < p < hi]
    edges = [lo]
    for p in pts:
        if p - edges[-1] > 1e-12 * max(1.0, p):
            edges.append(p)
    total = 0.0
    for a, b in zip(edges, [*edges[1:], hi]):
        total += integrate.quad(integrand, a, b, epsabs=tol, epsrel=tol, limit=500)[0]
    return math.sqrt(min(1.0, max(0.0, total)))


def hellinger_1d(d1: MarginalDistribution, d2: MarginalDistribution) -> float:
    """Closed-form Hellinger distance between two Beta or two Gamma laws."""
    if d1.family is not d2.family:
        raise ValueError(f"family mismatch: {d1.family.value} vs {d2.family.value}")
    if d1 == d2:
        return 0.0
    params = (d1.p1, d1.p2, d2.p1, d2.p2)
    if d1.family is Family.GAMMA:
        params = (d1.p1, d2.p1)
    log_bc = _log_affinity(d1, d2)
    # log-gamma cancellation loses precision once parameters get very large
    if max(params) > 1e8 or not np.isfinite(log_bc):
        return hellinger_1d_quadrature(d1, d2)
    return math.sqrt(min(1.0, max(0.0, -math.expm1(log_bc))))
