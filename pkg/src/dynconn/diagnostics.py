"""Posterior summaries: HPD intervals, truth-coverage tables, posterior
predictive coverage and interval length, positive-support maps,
connectivity-regressor correlations, and simple convergence scores."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientSamplesError, ValidationError
from .model import ChainOutput, Dataset, Hyperparameters
from .signal import SinusoidFit
from .simulate import TruthRecord


@dataclass(frozen=True)
class HPDInterval:
    lo: float
    hi: float
    level: float

    @property
    def width(self) -> float:
        return self.hi - self.lo


def _hpd_bounds(samples: np.ndarray, level: float):
    """Vectorized minimum-width interval along axis 0.

    samples: (n, ...); returns (lo, hi) arrays of the trailing shape.
    The interval contains ceil(level * n) ordered draws; ties break at
    the lowest lower bound (argmin picks the first minimizer).
    """
    n = samples.shape[0]
    k = int(np.ceil(level * n))
    s = np.sort(samples, axis=0)
    if k >= n:
        return s[0], s[-1]
    widths = s[k - 1 :] - s[: n - k + 1]
    idx = np.argmin(widths, axis=0)
    lo = np.take_along_axis(s, idx[None], axis=0)[0]
    hi = np.take_along_axis(s, (idx + k - 1)[None], axis=0)[0]
    return lo, hi


def hpd_interval(samples, level: float = 0.95) -> HPDInterval:
    """Shortest sample interval containing ceil(level * n) ordered draws."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 1:
        raise ValidationError("samples must be one-dimensional")
    if samples.size < 20:
        raise InsufficientSamplesError(f"need at least 20 draws, got {samples.size}")
    if not 0.5 < level < 1:
        raise ValidationError("level must lie in (0.5, 1)")
    lo, hi = _hpd_bounds(samples, level)
    return HPDInterval(lo=float(lo), hi=float(hi), level=level)


def truth_coverage(chain: ChainOutput, truth: TruthRecord, level: float = 0.95) -> np.ndarray:
    """(R, R) matrix: entry (i, j) is the fraction of times t at which the
    true gamma_ij(t) falls inside the marginal HPD interval of the draws."""
    if truth.gamma.shape != chain.gamma.shape[1:]:
        raise ValidationError("truth and chain dimensions do not match")
    lo, hi = _hpd_bounds(chain.gamma, level)
    inside = (truth.gamma >= lo) & (truth.gamma <= hi)
    return inside.mean(axis=2)


def simulate_predictive(
    chain: ChainOutput,
    data: Dataset,
    hyper: Hyperparameters,
    rng: np.random.Generator,
    resimulate_beta: bool = True,
) -> np.ndarray:
    """One replicate series per stored draw, shape (n, R, T).

    By default the activation paths are re-simulated forward from the
    drawn connectivity and variances so predictive widths carry the full
    process uncertainty; `resimulate_beta=False` plugs in the stored beta
    draws instead.
    """
    n, R, T = chain.n_draws, chain.R, chain.T
    x = data.x
    s_eps = np.sqrt(chain.scalars["sigma2_eps"])[:, None, None]
    if resimulate_beta:
        beta = np.empty((n, R, T))
        s_om = np.sqrt(chain.scalars["sigma2_omega"])
        beta[:, :, 0] = hyper.beta_bar + np.sqrt(hyper.sigma2_beta) * rng.standard_normal((n, R))
        for t in range(1, T):
            drift = x[t - 1] * np.einsum("nij,nj->ni", chain.gamma[:, :, :, t], beta[:, :, t - 1])
            beta[:, :, t] = drift + s_om[:, None] * rng.standard_normal((n, R))
    else:
        beta = chain.beta
    y_rep = chain.alpha[:, :, None] + x * beta
    y_rep = y_rep + s_eps * rng.standard_normal((n, R, T))
    return y_rep


def posterior_predictive(
    chain: ChainOutput,
    data: Dataset,
    hyper: Hyperparameters,
    rng: np.random.Generator,
    level: float = 0.95,
    resimulate_beta: bool = True,
):
    """Per-region (coverage proportion, mean HPD length) of the posterior
    predictive distribution against the observed series."""
    y_rep = simulate_predictive(chain, data, hyper, rng, resimulate_beta=resimulate_beta)
    lo, hi = _hpd_bounds(y_rep, level)
    inside = (data.y >= lo) & (data.y <= hi)
    coverage = inside.mean(axis=1)
    lengths = (hi - lo).mean(axis=1)
    return coverage, lengths


def positive_support_map(chain: ChainOutput) -> np.ndarray:
    """(R, R, T) fractions of stored draws with gamma_ij(t) > 0."""
    return (chain.gamma > 0).mean(axis=0)


def connectivity_bold_correlation(chain: ChainOutput, smooth: SinusoidFit) -> np.ndarray:
    """Pearson correlation of the smoothed regressor with each posterior-
    mean path; constant paths are reported as NaN."""
    R, T = chain.R, chain.T
    xhat = smooth.evaluate(np.arange(1, T + 1))
    xc = xhat - xhat.mean()
    out = np.full((R, R), np.nan)
    mean_gamma = chain.gamma.mean(axis=0)
    for i in range(R):
        for j in range(R):
            g = mean_gamma[i, j]
            gc = g - g.mean()
            denom = np.sqrt((gc @ gc) * (xc @ xc))
            if denom > 0:
                out[i, j] = float(gc @ xc / denom)
    return out


def quantile_bands(chain: ChainOutput, probs=None) -> np.ndarray:
    """Posterior quantiles of gamma_ij(t), shape (len(probs), R, R, T);
    the default grid gives eight 12.5% bands."""
    if probs is None:
        probs = np.arange(0.0, 1.0001, 0.125)
    return np.quantile(chain.gamma, probs, axis=0)


def geweke_zscores(chain: ChainOutput) -> dict:
    """Geweke-style z-scores (first 10% vs last 50% of draws) per scalar
    block and per region for alpha."""
    out = {}

    def z(series: np.ndarray) -> float:
        n = series.size
        a = series[: max(n // 10, 2)]
        b = series[n // 2 :]
        denom = np.sqrt(a.var(ddof=1) / a.size + b.var(ddof=1) / b.size)
        return float((a.mean() - b.mean()) / denom) if denom > 0 else 0.0

    for name, values in chain.scalars.items():
        out[name] = z(values)
    for i in range(chain.R):
        out[f"alpha_{i + 1}"] = z(chain.alpha[:, i])
    return out
