"""Gaussian-copula joint law over device metrics.

A :class:`CopulaModel` couples per-metric :class:`~qstab.marginals.MarginalDistribution`
objects through a correlation matrix on the normal-score scale.  The free
functions operate on models; :class:`GaussianCopula` wraps fitting, sampling and
scoring behind the scikit-learn estimator protocol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
from scipy import special
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._parallel import chunk_rngs, ordered_map
from .marginals import Family, MarginalDistribution, fit_moments

__all__ = [
    "CopulaModel",
    "GaussianCopula",
    "pearson_matrix",
    "nearest_psd",
    "density",
    "log_density",
    "sample",
    "hellinger_nd",
    "HellingerProbe",
]

MAX_CONDITION = 1e12
PSD_FLOOR = 1e-10
_U_EPS = 1e-16


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class CopulaModel:
    marginals: tuple[MarginalDistribution, ...]
    sigma: np.ndarray
    epoch_label: str = ""
    names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        marginals = tuple(self.marginals)
        d = len(marginals)
        sigma = _frozen(self.sigma)
        if sigma.shape != (d, d):
            raise ValueError(f"sigma must be {d}x{d}, got {sigma.shape}")
        if not np.allclose(sigma, sigma.T, atol=1e-12):
            raise ValueError("sigma must be symmetric")
        if not np.allclose(np.diag(sigma), 1.0, atol=1e-12):
            raise ValueError("sigma must have a unit diagonal")
        names = tuple(self.names) or tuple(f"x{i}" for i in range(d))
        if len(names) != d:
            raise ValueError("one name per marginal required")
        object.__setattr__(self, "marginals", marginals)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "names", names)

    @property
    def dim(self) -> int:
        return len(self.marginals)

    @cached_property
    def _factor(self) -> np.ndarray:
        try:
            return np.linalg.cholesky(self.sigma)
        except np.linalg.LinAlgError:
            w, v = np.linalg.eigh(self.sigma)
            return v * np.sqrt(np.clip(w, 0.0, None))

    @cached_property
    def _precision_terms(self) -> tuple[np.ndarray, float]:
        cond = np.linalg.cond(self.sigma)
        if not np.isfinite(cond) or cond > MAX_CONDITION:
            raise ValueError(f"correlation matrix is singular (condition number {cond:.3g})")
        sign, logdet = np.linalg.slogdet(self.sigma)
        return np.linalg.inv(self.sigma) - np.eye(self.dim), float(logdet)

    def with_marginal(self, index: int, marginal: MarginalDistribution, epoch_label: str | None = None):
        marginals = list(self.marginals)
        marginals[index] = marginal
        return replace(
            self,
            marginals=tuple(marginals),
            epoch_label=self.epoch_label if epoch_label is None else epoch_label,
        )

    def to_dict(self) -> dict:
        return {
            "epoch_label": self.epoch_label,
            "names": list(self.names),
            "marginals": [m.to_dict() for m in self.marginals],
            "sigma": self.sigma.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CopulaModel":
        return cls(
            tuple(MarginalDistribution.from_dict(m) for m in d["marginals"]),
            np.asarray(d["sigma"]),
            d.get("epoch_label", ""),
            tuple(d.get("names", ())),
        )


def pearson_matrix(series) -> np.ndarray:
    """Pearson correlation of aligned series, repaired to the nearest PSD matrix.

    ``series`` is either an ``(n_obs, n_metrics)`` array or a sequence of
    per-metric value lists of equal length.
    """
    if isinstance(series, np.ndarray):
        data = np.asarray(series, dtype=float)
    else:
        cols = [np.asarray(s, dtype=float).ravel() for s in series]
        lengths = {c.size for c in cols}
        if len(lengths) != 1:
            raise ValueError(f"series lengths differ: {sorted(lengths)}")
        data = np.column_stack(cols)
    if data.ndim != 2:
        raise ValueError("expected a 2-D table of observations")
    n, d = data.shape
    if n < 8:
        raise ValueError(f"need at least 8 aligned observations, got {n}")
    centred = data - data.mean(axis=0)
    ss = np.sqrt(np.sum(centred**2, axis=0))
    flat = np.flatnonzero((np.ptp(data, axis=0) == 0) | (ss == 0))
    if flat.size:
        raise ValueError(f"zero variance in series {flat.tolist()}")
    scaled = centred / ss
    corr = np.clip(scaled.T @ scaled, -1.0, 1.0)
    corr = 0.5 * (corr + corr.T)
    np.fill_diagonal(corr, 1.0)
    return nearest_psd(corr)


def nearest_psd(m, floor: float = PSD_FLOOR) -> np.ndarray:
    """Clip negative eigenvalues and rescale back to a unit diagonal.

    Matrices that are already positive semidefinite come back unchanged apart
    from symmetrisation.
    """
    a = np.asarray(m, dtype=float)
    a = 0.5 * (a + a.T)
    w, v = np.linalg.eigh(a)
    if w.min() >= 0:
        out = a.copy()
        np.fill_diagonal(out, 1.0)
        return out
    fixed = (v * np.maximum(w, floor)) @ v.T
    fixed = 0.5 * (fixed + fixed.T)
    scale = 1.0 / np.sqrt(np.diag(fixed))
    fixed = fixed * np.outer(scale, scale)
    np.fill_diagonal(fixed, 1.0)
    return fixed


def _normal_scores(model: CopulaModel, x: np.ndarray):
    """Per-column normal scores plus marginal log densities; -inf flags off-support rows."""
    z = np.empty_like(x)
    logm = np.zeros(x.shape[0])
    for j, marg in enumerate(model.marginals):
        col = x[:, j]
        logm = logm + marg.logpdf(col)
        u = marg.cdf(col)
        # upper tail through the survival function keeps precision near 1
        upper = u > 0.5
        zj = special.ndtri(np.where(upper, 0.5, u))
        if np.any(upper):
            zj[upper] = -special.ndtri(marg.sf(col[upper]))
        z[:, j] = zj
    return z, logm


def log_density(model: CopulaModel, x) -> np.ndarray:
    """Log of the joint density at each row of ``x``; ``-inf`` outside the support."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != model.dim:
        raise ValueError(f"expected {model.dim} columns, got {x.shape[1]}")
    prec_minus_eye, logdet = model._precision_terms
    z, logm = _normal_scores(model, x)
    ok = np.isfinite(logm) & np.all(np.isfinite(z), axis=1)
    out = np.full(x.shape[0], -np.inf)
    zk = z[ok]
    quad = np.einsum("ij,jk,ik->i", zk, prec_minus_eye, zk)
    out[ok] = -0.5 * logdet - 0.5 * quad + logm[ok]
    return out


def density(model: CopulaModel, x):
    """Joint density; scalar for a single point, array for a batch of rows."""
    arr = np.asarray(x, dtype=float)
    out = np.exp(log_density(model, arr))
    return float(out[0]) if arr.ndim == 1 else out


def _uniforms_to_values(model: CopulaModel, u: np.ndarray) -> np.ndarray:
    u = np.clip(u, _U_EPS, 1.0 - _U_EPS)
    return np.column_stack([m.quantile(u[:, j]) for j, m in enumerate(model.marginals)])


def sample(model: CopulaModel, n: int, seed: int) -> np.ndarray:
    """Draw ``n`` parameter vectors, one per row.  Deterministic in ``seed``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    factor = model._factor

    def draw(block):
        start, stop, rng = block
        z = rng.standard_normal((stop - start, model.dim)) @ factor.T
        return _uniforms_to_values(model, special.ndtr(z))

    return np.vstack(ordered_map(draw, chunk_rngs(seed, n)))


class HellingerProbe:
    """Draws from a reference model, reusable for distances to many candidates."""

    def __init__(self, reference: CopulaModel, n: int, seed: int):
        if n < 2:
            raise ValueError("n must be at least 2")
        self.reference = reference
        self.x = sample(reference, n, seed)
        self.lf_ref = log_density(reference, self.x)
        self.live = np.isfinite(self.lf_ref)
        dead = 1.0 - self.live.mean()
        if dead > 0.01:
            raise ValueError(f"{dead:.1%} of draws have zero density under the reference model; supports differ")

    def distance(self, other: CopulaModel) -> tuple[float, float]:
        if other.names != self.reference.names:
            raise ValueError("models must share the same metric ordering")
        n = self.x.shape[0]
        ratio = np.zeros(n)
        lf = log_density(other, self.x[self.live])
        ratio[self.live] = np.exp(0.5 * (lf - self.lf_ref[self.live]))
        bc = float(ratio.mean())
        se_bc = float(ratio.std(ddof=1) / math.sqrt(n))
        h = math.sqrt(max(0.0, 1.0 - bc))
        # delta method, capped by the worst case |dH| <= sqrt(|dBC|) near H = 0
        se_h = math.sqrt(se_bc) if h == 0 else min(se_bc / (2.0 * h), math.sqrt(se_bc))
        return min(h, 1.0), se_h


def hellinger_nd(m1: CopulaModel, m2: CopulaModel, n: int, seed: int) -> tuple[float, float]:
    """Importance-sampling estimate of the Hellinger distance and its standard error.

    Points are drawn from ``m1``; the affinity is the mean of
    ``sqrt(f2 / f1)``, and the error is propagated through ``H = sqrt(1 - BC)``.
    """
    return HellingerProbe(m1, n, seed).distance(m2)


class GaussianCopula(TransformerMixin, BaseEstimator):
    """Fit a Gaussian copula with moment-matched marginals to daily metric tables.

    Parameters
    ----------
    families : sequence of {"beta", "gamma"} or None
        Marginal family per column.  ``None`` uses Beta for every column when
        there are not exactly 16 columns, otherwise the device-metric default
        (Gamma for the T2 columns, Beta elsewhere).
    epoch_label : str
        Copied onto the fitted model.

    Attributes
    ----------
    model_ : CopulaModel
    marginals_ : tuple of MarginalDistribution
    correlation_ : ndarray of shape (n_features, n_features)
    """

    def __init__(self, families=None, epoch_label=""):
        self.families = families
        self.epoch_label = epoch_label

    def _resolved_families(self, d):
        if self.families is not None:
            fams = tuple(Family(f) for f in self.families)
            if len(fams) != d:
                raise ValueError(f"{len(fams)} families given for {d} columns")
            return fams
        from .metrics import N_METRICS, default_families

        return default_families() if d == N_METRICS else (Family.BETA,) * d

    def fit(self, X, y=None):
        X = check_array(X, dtype=float, ensure_min_samples=8)
        fams = self._resolved_families(X.shape[1])
        marginals = tuple(fit_moments(X[:, j], f) for j, f in enumerate(fams))
        sigma = pearson_matrix(X)
        self.model_ = CopulaModel(marginals, sigma, self.epoch_label)
        self.marginals_ = marginals
        self.correlation_ = self.model_.sigma
        self.n_features_in_ = X.shape[1]
        return self

    @classmethod
    def from_model(cls, model: CopulaModel) -> "GaussianCopula":
        est = cls(families=[m.family.value for m in model.marginals], epoch_label=model.epoch_label)
        est.model_ = model
        est.marginals_ = model.marginals
        est.correlation_ = model.sigma
        est.n_features_in_ = model.dim
        return est

    def transform(self, X):
        """Map metric values to correlated standard-normal scores."""
        check_is_fitted(self, "model_")
        X = check_array(X, dtype=float)
        return _normal_scores(self.model_, X)[0]

    def inverse_transform(self, Z):
        check_is_fitted(self, "model_")
        Z = check_array(Z, dtype=float)
        return _uniforms_to_values(self.model_, special.ndtr(Z))

    def score_samples(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X, dtype=float)
        return log_density(self.model_, X)

    def score(self, X, y=None):
        return float(np.mean(self.score_samples(X)))

    def sample(self, n_samples=1, random_state=0):
        check_is_fitted(self, "model_")
        return sample(self.model_, n_samples, random_state)
