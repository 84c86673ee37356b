"""Synthetic-data generators for every model variant, with ground-truth
trajectories recorded for coverage scoring."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import base_measure, signal
from .base_measure import BaseMeasureParams
from .errors import ValidationError
from .model import Dataset, ModelSpec

DP_TRUNCATION = 50  # stick-breaking truncation; deficit mean (tau/(1+tau))^50

VARIANTS = ("rw", "rwprime", "ar", "dp")


@dataclass(frozen=True)
class SimulationParams:
    """Generative parameter defaults for the simulation regimes."""

    alpha: np.ndarray = None  # defaults to (1, 2, ..., R)
    beta1: float = 1.0
    gamma_bar: float = 0.0
    sigma2_gamma: float = 1.0  # variance of gamma_ij(1)
    sigma2_eps: float = 0.01
    sigma2_omega: float = 0.01
    sigma2_delta: float = 0.01
    phi: float = 0.999  # near-unit-root coefficient for the rwprime regime
    rho: float = 0.5  # AR regime coefficient
    tau: float = 0.8  # DP regime concentration
    zero_mask: frozenset = frozenset()


@dataclass(frozen=True)
class TruthRecord:
    alpha: np.ndarray  # (R,)
    beta: np.ndarray  # (R, T)
    gamma: np.ndarray  # (R, R, T)
    variant: str
    params: dict

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha.tolist(),
            "beta": self.beta.tolist(),
            "gamma": self.gamma.tolist(),
            "variant": self.variant,
            "params": self.params,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "TruthRecord":
        return cls(
            alpha=np.asarray(obj["alpha"], dtype=float),
            beta=np.asarray(obj["beta"], dtype=float),
            gamma=np.asarray(obj["gamma"], dtype=float),
            variant=obj["variant"],
            params=obj["params"],
        )


def default_regressor(T: int) -> np.ndarray:
    """Block-design regressor: alternating task/baseline blocks convolved
    with the canonical HRF, padded with rest scans if the design is shorter
    than the horizon.  Short horizons shrink the block count/length so the
    design always fits (full scale is 6 blocks of 18 two-second trials)."""
    trials_per_block = max(1, min(18, T // 12))
    blocks = min(6, max(1, T // (2 * trials_per_block)))
    design = signal.block_design(
        blocks=blocks, trials_per_block=trials_per_block, trial_duration=2.0, delta=2.0, T=T
    )
    return signal.convolve_stimulus(design, signal.HRFParams())


def _gamma_recursion(
    coeff: float, R: int, T: int, params: SimulationParams, rng: np.random.Generator
) -> np.ndarray:
    g = np.empty((R, R, T))
    g[:, :, 0] = params.gamma_bar + np.sqrt(params.sigma2_gamma) * rng.standard_normal((R, R))
    sd = np.sqrt(params.sigma2_delta)
    for t in range(1, T):
        g[:, :, t] = coeff * g[:, :, t - 1] + sd * rng.standard_normal((R, R))
    return g


def simulate_dataset(
    variant: str,
    T: int,
    R: int,
    rng: np.random.Generator,
    params: SimulationParams = None,
    x: np.ndarray = None,
) -> tuple[Dataset, TruthRecord]:
    """Generate (y, x) plus the true latent trajectories.

    Path recursions per variant: rw uses unit coefficient, rwprime uses
    phi (default 0.999), ar uses rho, and dp draws each unmasked path from
    a truncated stick-breaking realization of the base measure.
    """
    if variant not in VARIANTS:
        raise ValidationError(f"variant must be one of {VARIANTS}, got {variant!r}")
    if T < 3 or R < 2:
        raise ValidationError("need T >= 3 and R >= 2")
    params = params or SimulationParams()
    if variant == "rwprime" and not 0 < params.phi <= 1:
        raise ValidationError("phi must be in (0, 1]")
    x = default_regressor(T) if x is None else np.asarray(x, dtype=float)
    if x.shape != (T,):
        raise ValidationError(f"x must have length {T}")

    alpha = np.arange(1.0, R + 1.0) if params.alpha is None else np.asarray(params.alpha, float)

    if variant == "rw":
        gamma = _gamma_recursion(1.0, R, T, params, rng)
    elif variant == "rwprime":
        gamma = _gamma_recursion(params.phi, R, T, params, rng)
    elif variant == "ar":
        gamma = _gamma_recursion(params.rho, R, T, params, rng)
    else:
        base = BaseMeasureParams(
            gamma_bar=params.gamma_bar,
            sigma2_gamma=params.sigma2_gamma,
            sigma2_delta=params.sigma2_delta,
            rho=params.rho,
            T=T,
        )
        realization = base_measure.stick_breaking(params.tau, DP_TRUNCATION, base, rng)
        w = realization.weights / realization.weights.sum()
        picks = rng.choice(DP_TRUNCATION, size=R * R, p=w)
        gamma = realization.atoms[picks].reshape(R, R, T)

    for i, j in sorted(params.zero_mask):
        gamma[i - 1, j - 1] = 0.0

    beta = np.empty((R, T))
    beta[:, 0] = params.beta1
    s_om = np.sqrt(params.sigma2_omega)
    for t in range(1, T):
        beta[:, t] = x[t - 1] * (gamma[:, :, t] @ beta[:, t - 1])
        beta[:, t] += s_om * rng.standard_normal(R)

    y = alpha[:, None] + x * beta + np.sqrt(params.sigma2_eps) * rng.standard_normal((R, T))

    truth = TruthRecord(
        alpha=alpha,
        beta=beta,
        gamma=gamma,
        variant=variant,
        params={
            "beta1": params.beta1,
            "gamma_bar": params.gamma_bar,
            "sigma2_gamma": params.sigma2_gamma,
            "sigma2_eps": params.sigma2_eps,
            "sigma2_omega": params.sigma2_omega,
            "sigma2_delta": params.sigma2_delta,
            "phi": params.phi,
            "rho": params.rho,
            "tau": params.tau,
            "zero_mask": sorted(params.zero_mask),
        },
    )
    return Dataset(y=y, x=x), truth


def replay(truth: TruthRecord, x: np.ndarray) -> Dataset:
    """Regenerate the noiseless dataset implied by a truth record; with all
    noise variances zero this reproduces the simulated dataset bit-exactly."""
    y = truth.alpha[:, None] + x * truth.beta
    return Dataset(y=y, x=x)
