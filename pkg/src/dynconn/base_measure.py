"""AR(1) base measure of the connectivity prior: mean, covariance,
log-density, exact sampling, and truncated stick-breaking realizations.

The T-variate law is Gaussian with mean gamma_bar * (1, rho, ..., rho^(T-1))
and covariance, for s <= t (1-based),

    Sigma_st = rho^(s+t-2) * s2_gamma + rho^(t-s) * s2_delta * (1 - rho^(2(s-1))) / (1 - rho^2).

rho = 1 (random-walk limit) uses the analytic limit
Sigma_st = s2_gamma + s2_delta * (min(s, t) - 1).

Because the path is Markov, the precision matrix is tridiagonal; the
banded helpers here are what the sampler's hot loop uses.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericDegeneracyError, ValidationError


@dataclass(frozen=True)
class BaseMeasureParams:
    gamma_bar: float
    sigma2_gamma: float
    sigma2_delta: float
    rho: float
    T: int

    def __post_init__(self):
        if self.sigma2_gamma < 0 or self.sigma2_delta < 0:
            raise ValidationError("variances must be nonnegative")
        if not (abs(self.rho) < 1 or self.rho == 1.0):
            raise ValidationError(
                f"rho must satisfy |rho| < 1, or rho = 1 for the random-walk limit; got {self.rho}"
            )
        if self.T < 1:
            raise ValidationError("T must be >= 1")


@dataclass(frozen=True)
class StickBreakingRealization:
    weights: np.ndarray  # (K,)
    atoms: np.ndarray  # (K, T)
    truncation: int

    @property
    def deficit(self) -> float:
        return 1.0 - float(self.weights.sum())


def ar1_mean(params: BaseMeasureParams) -> np.ndarray:
    """gamma_bar * (1, rho, rho^2, ..., rho^(T-1))."""
    return params.gamma_bar * params.rho ** np.arange(params.T)


def ar1_covariance(params: BaseMeasureParams) -> np.ndarray:
    """Closed-form T x T covariance; symmetric by construction."""
    T = params.T
    rho, s2g, s2d = params.rho, params.sigma2_gamma, params.sigma2_delta
    s = np.arange(1, T + 1)
    lo = np.minimum.outer(s, s)
    if rho == 1.0:
        return s2g + s2d * (lo - 1.0)
    gap = np.abs(np.subtract.outer(s, s))
    return rho ** np.add.outer(s - 1, s - 1) * s2g + rho**gap * s2d * (
        1.0 - rho ** (2 * (lo - 1))
    ) / (1.0 - rho**2)


def ar1_precision_banded(params: BaseMeasureParams) -> np.ndarray:
    """Lower-banded (2, T) representation of Sigma^{-1}: row 0 diagonal,
    row 1 subdiagonal.  Requires strictly positive variances."""
    T = params.T
    rho, s2g, s2d = params.rho, params.sigma2_gamma, params.sigma2_delta
    if s2g <= 0 or (s2d <= 0 and T > 1):
        raise ValidationError("banded precision needs strictly positive variances")
    ab = np.zeros((2, T))
    ab[0, 0] = 1.0 / s2g
    if T > 1:
        ab[0, 0] += rho**2 / s2d
        ab[0, 1:-1] = (1.0 + rho**2) / s2d
        ab[0, -1] = 1.0 / s2d
        ab[1, :-1] = -rho / s2d
    return ab


def ar1_logdet_cov(params: BaseMeasureParams) -> float:
    """log|Sigma| from the sequential factorization."""
    return float(np.log(params.sigma2_gamma) + (params.T - 1) * np.log(params.sigma2_delta))


def log_density(gamma: np.ndarray, params: BaseMeasureParams) -> float:
    """Exact multivariate-normal log-density of a path under the base measure.

    Because the covariance is Markov, the natural triangular factorization
    of Sigma^{-1} is the sequential AR(1) one; it is exact and O(T), with
    no cancellation at extreme variance ratios.
    """
    gamma = np.asarray(gamma, dtype=float)
    if gamma.shape != (params.T,):
        raise ValidationError(f"expected a length-{params.T} path, got shape {gamma.shape}")
    if not np.all(np.isfinite(gamma)):
        raise ValidationError("path contains non-finite values")
    if params.sigma2_gamma <= 0 or (params.sigma2_delta <= 0 and params.T > 1):
        raise NumericDegeneracyError("the base measure is singular at zero variance")
    ll = -0.5 * np.log(2.0 * np.pi * params.sigma2_gamma)
    ll -= 0.5 * (gamma[0] - params.gamma_bar) ** 2 / params.sigma2_gamma
    if params.T > 1:
        resid = gamma[1:] - params.rho * gamma[:-1]
        ll += -0.5 * (params.T - 1) * np.log(2.0 * np.pi * params.sigma2_delta)
        ll -= 0.5 * float(resid @ resid) / params.sigma2_delta
    return float(ll)


def sample(params: BaseMeasureParams, rng: np.random.Generator) -> np.ndarray:
    """Exact draw via the sequential AR(1) recursion (deterministic per seed)."""
    z = rng.standard_normal(params.T)
    out = np.empty(params.T)
    out[0] = params.gamma_bar + np.sqrt(params.sigma2_gamma) * z[0]
    sd = np.sqrt(params.sigma2_delta)
    for t in range(1, params.T):
        out[t] = params.rho * out[t - 1] + sd * z[t]
    return out


def sample_many(params: BaseMeasureParams, n: int, rng: np.random.Generator) -> np.ndarray:
    """n i.i.d. paths, shape (n, T); recursion vectorized over draws."""
    z = rng.standard_normal((n, params.T))
    out = np.empty((n, params.T))
    out[:, 0] = params.gamma_bar + np.sqrt(params.sigma2_gamma) * z[:, 0]
    sd = np.sqrt(params.sigma2_delta)
    for t in range(1, params.T):
        out[:, t] = params.rho * out[:, t - 1] + sd * z[:, t]
    return out


def stick_breaking(
    tau: float, K: int, params: BaseMeasureParams, rng: np.random.Generator
) -> StickBreakingRealization:
    """Truncated stick-breaking realization: weights p_k = b_k prod_{l<k}(1-b_l)
    with b_k ~ Beta(1, tau), atoms i.i.d. from the base measure."""
    if tau <= 0:
        raise ValidationError("tau must be > 0")
    if K < 1:
        raise ValidationError("truncation level must be >= 1")
    b = rng.beta(1.0, tau, size=K)
    weights = b * np.concatenate([[1.0], np.cumprod(1.0 - b)[:-1]])
    atoms = sample_many(params, K, rng)
    return StickBreakingRealization(weights=weights, atoms=atoms, truncation=K)
