"""Domain types and the unnormalized log-joint density.

The log-joint is the correctness oracle for every Gibbs update: each
conditional sampler must produce log-kernel differences equal to
log-joint differences when a single block changes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import base_measure
from .base_measure import BaseMeasureParams
from .errors import DegenerateSeriesError, ValidationError

VARIANTS = ("rw", "ar", "dp")


@dataclass(frozen=True)
class Dataset:
    """Observed detrended regional series y (R x T) and modeled BOLD regressor x (T,)."""

    y: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        x = np.asarray(self.x, dtype=float)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)
        if y.ndim != 2 or y.shape[0] < 2 or y.shape[1] < 3:
            raise ValidationError(f"y must be R x T with R >= 2, T >= 3; got {y.shape}")
        if x.shape != (y.shape[1],):
            raise ValidationError(f"x must have length T = {y.shape[1]}, got {x.shape}")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(x))):
            raise ValidationError("dataset contains non-finite values")

    @property
    def R(self) -> int:
        return self.y.shape[0]

    @property
    def T(self) -> int:
        return self.y.shape[1]


@dataclass(frozen=True)
class ModelSpec:
    """Model variant plus the set of connectivity pairs pinned to zero.

    `zero_mask` uses 1-based (i, j) pairs, matching the CLI notation
    "3,1;3,2" and the usual gamma_ij subscripts.
    """

    variant: str = "dp"
    zero_mask: frozenset = frozenset()

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValidationError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        object.__setattr__(
            self, "zero_mask", frozenset((int(i), int(j)) for i, j in self.zero_mask)
        )

    def validate_for(self, R: int) -> None:
        for i, j in self.zero_mask:
            if not (1 <= i <= R and 1 <= j <= R):
                raise ValidationError(f"mask pair ({i},{j}) outside 1..{R}")
        if self.variant == "dp" and self.n_unmasked(R) < 2:
            raise ValidationError("DP variant needs at least 2 unmasked pairs")

    def is_masked(self, i: int, j: int) -> bool:
        """0-based indices."""
        return (i + 1, j + 1) in self.zero_mask

    def unmasked_pairs(self, R: int) -> list[tuple[int, int]]:
        """Row-major 0-based (i, j) pairs not pinned to zero."""
        return [(i, j) for i in range(R) for j in range(R) if not self.is_masked(i, j)]

    def n_unmasked(self, R: int) -> int:
        return R * R - len(self.zero_mask)

    @staticmethod
    def parse_mask(text: str) -> frozenset:
        """Parse '3,1;3,2' into {(3,1), (3,2)}."""
        text = text.strip()
        if not text:
            return frozenset()
        pairs = set()
        for chunk in text.split(";"):
            i, j = chunk.split(",")
            pairs.add((int(i), int(j)))
        return frozenset(pairs)


@dataclass(frozen=True)
class Hyperparameters:
    mu: np.ndarray  # (R,) prior means of alpha
    sigma2_alpha: float
    beta_bar: float
    sigma2_beta: float
    gamma_bar: float = 0.0
    sigma2_gamma: float = 1.0
    a: float = 0.0
    b: float = 0.0
    c: float = 0.1
    m: int = 9  # number of unconstrained connectivity pairs

    def __post_init__(self):
        object.__setattr__(self, "mu", np.asarray(self.mu, dtype=float))
        for name in ("sigma2_alpha", "sigma2_beta", "sigma2_gamma"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be > 0")
        if self.a < 0 or self.b < 0:
            raise ValidationError("a, b must be >= 0")
        if self.c <= 0:
            raise ValidationError("c must be > 0")
        if self.m < 2:
            raise ValidationError("need at least 2 unconstrained pairs")

    @property
    def a_tau(self) -> float:
        return self.c * (self.m - 1)

    @property
    def b_tau(self) -> float:
        return self.c

    def to_dict(self) -> dict:
        return {
            "mu": self.mu.tolist(),
            "sigma2_alpha": self.sigma2_alpha,
            "beta_bar": self.beta_bar,
            "sigma2_beta": self.sigma2_beta,
            "gamma_bar": self.gamma_bar,
            "sigma2_gamma": self.sigma2_gamma,
            "a": self.a,
            "b": self.b,
            "c": self.c,
            "m": self.m,
            "a_tau": self.a_tau,
            "b_tau": self.b_tau,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "Hyperparameters":
        keys = (
            "mu sigma2_alpha beta_bar sigma2_beta gamma_bar sigma2_gamma a b c m".split()
        )
        return cls(**{k: obj[k] for k in keys if k in obj})


@dataclass
class ChainState:
    """Full latent state of one MCMC sweep.  Masked gamma entries stay 0."""

    alpha: np.ndarray  # (R,)
    beta: np.ndarray  # (R, T)
    gamma: np.ndarray  # (R, R, T)
    sigma2_eps: float
    sigma2_omega: float
    sigma2_delta: float
    rho: float
    tau: float
    eta: float = 0.5

    def copy(self) -> "ChainState":
        return ChainState(
            alpha=self.alpha.copy(),
            beta=self.beta.copy(),
            gamma=self.gamma.copy(),
            sigma2_eps=self.sigma2_eps,
            sigma2_omega=self.sigma2_omega,
            sigma2_delta=self.sigma2_delta,
            rho=self.rho,
            tau=self.tau,
            eta=self.eta,
        )

    def base_params(self, hyper: Hyperparameters, T: int) -> BaseMeasureParams:
        return BaseMeasureParams(
            gamma_bar=hyper.gamma_bar,
            sigma2_gamma=hyper.sigma2_gamma,
            sigma2_delta=self.sigma2_delta,
            rho=self.rho,
            T=T,
        )


@dataclass
class ChainOutput:
    """Post burn-in draws (arrays indexed by stored iteration) plus metadata."""

    alpha: np.ndarray  # (n, R)
    beta: np.ndarray  # (n, R, T)
    gamma: np.ndarray  # (n, R, R, T)
    scalars: dict  # name -> (n,) array
    metadata: dict

    @property
    def n_draws(self) -> int:
        return self.alpha.shape[0]

    @property
    def R(self) -> int:
        return self.alpha.shape[1]

    @property
    def T(self) -> int:
        return self.beta.shape[2]


def beta_transition_mean(x: np.ndarray, beta: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """Mean of beta(:, t) given beta(:, t-1): x(t-1) * Gamma(t) beta(:, t-1),
    returned as an (R, T-1) array for t = 2..T."""
    # gamma[:, :, 1:] is (R, R, T-1); contract over the source region.
    return x[:-1] * np.einsum("ijt,jt->it", gamma[:, :, 1:], beta[:, :-1])


def log_joint_terms(
    state: ChainState,
    data: Dataset,
    hyper: Hyperparameters,
    spec: ModelSpec,
) -> dict:
    """Named additive terms of the unnormalized log-joint.

    Variance-prior terms are densities in the precisions, matching the
    Gamma full conditionals drawn by the sampler.
    """
    R, T = data.R, data.T
    if state.alpha.shape != (R,) or state.beta.shape != (R, T) or state.gamma.shape != (R, R, T):
        raise ValidationError("state dimensions do not match the dataset")
    spec.validate_for(R)

    resid_y = data.y - state.alpha[:, None] - data.x * state.beta
    loglik = -0.5 * R * T * np.log(2 * np.pi * state.sigma2_eps) - 0.5 * np.sum(
        resid_y**2
    ) / state.sigma2_eps

    resid_b = state.beta[:, 1:] - beta_transition_mean(data.x, state.beta, state.gamma)
    beta_term = (
        -0.5 * R * (T - 1) * np.log(2 * np.pi * state.sigma2_omega)
        - 0.5 * np.sum(resid_b**2) / state.sigma2_omega
    )
    beta_term += float(
        np.sum(
            -0.5 * np.log(2 * np.pi * hyper.sigma2_beta)
            - 0.5 * (state.beta[:, 0] - hyper.beta_bar) ** 2 / hyper.sigma2_beta
        )
    )

    base = state.base_params(hyper, T)
    pairs = spec.unmasked_pairs(R)
    gammas = np.stack([state.gamma[i, j] for i, j in pairs])
    if spec.variant == "dp":
        from .sampler import polya_urn_log_density

        gamma_term = polya_urn_log_density(gammas, base, state.tau)
    else:
        gamma_term = sum(base_measure.log_density(g, base) for g in gammas)

    alpha_prior = float(
        np.sum(
            -0.5 * np.log(2 * np.pi * hyper.sigma2_alpha)
            - 0.5 * (state.alpha - hyper.mu) ** 2 / hyper.sigma2_alpha
        )
    )

    def gamma_logpdf(u: float) -> float:
        # unnormalized Gamma(a, b) density of a precision; a = b = 0 is the
        # improper 1/u prior
        return (hyper.a - 1.0) * np.log(u) - hyper.b * u

    prior_prec = gamma_logpdf(1.0 / state.sigma2_eps) + gamma_logpdf(1.0 / state.sigma2_omega)
    prior_prec += gamma_logpdf(1.0 / state.sigma2_delta)

    terms = {
        "likelihood": float(loglik),
        "beta": float(beta_term),
        "gamma": float(gamma_term),
        "alpha_prior": alpha_prior,
        "precision_priors": float(prior_prec),
    }
    if spec.variant == "dp":
        terms["tau_prior"] = float(
            (hyper.a_tau - 1.0) * np.log(state.tau) - hyper.b_tau * state.tau
        )
    if spec.variant != "rw":
        terms["rho_prior"] = 0.0 if abs(state.rho) < 1 else -np.inf
    return terms


def log_joint(state: ChainState, data: Dataset, hyper: Hyperparameters, spec: ModelSpec) -> float:
    return float(sum(log_joint_terms(state, data, hyper, spec).values()))


def ml2_hyperparameters(
    data: Dataset,
    spec: ModelSpec,
    c: float = 0.1,
    overrides: Optional[dict] = None,
) -> Hyperparameters:
    """Deterministic empirical hyperparameter assignment.

    mu_i = time-mean of y_i; sigma2_alpha = pooled sample variance of the
    y_i; beta_bar = pooled least-squares slope of y on x; sigma2_beta =
    10*|beta_bar| + 1; gamma_bar = 0; sigma2_gamma = 1.  Any field can be
    overridden; effective values are recorded in run metadata.
    """
    y, x = data.y, data.x
    if np.any(np.ptp(y, axis=1) == 0):
        raise DegenerateSeriesError("a region series is constant; ML-II needs variation")
    if np.ptp(x) == 0:
        raise DegenerateSeriesError("the regressor x is constant")
    mu = y.mean(axis=1)
    sigma2_alpha = float(np.var(y, ddof=1))
    yc = y - mu[:, None]
    xc = x - x.mean()
    beta_bar = float(np.sum(yc * xc) / (data.R * np.sum(xc**2)))
    values = {
        "mu": mu,
        "sigma2_alpha": sigma2_alpha,
        "beta_bar": beta_bar,
        "sigma2_beta": 10.0 * abs(beta_bar) + 1.0,
        "gamma_bar": 0.0,
        "sigma2_gamma": 1.0,
        "a": 0.0,
        "b": 0.0,
        "c": c,
        "m": spec.n_unmasked(data.R),
    }
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    return Hyperparameters(**values)
