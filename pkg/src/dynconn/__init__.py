"""Bayesian dynamic effective-connectivity models for multivariate time
series: random-walk, AR(1) and nonstationary Dirichlet-process variants
with a collapsed Gibbs sampler, simulators and posterior diagnostics."""

__all__ = [
    "base_measure",
    "diagnostics",
    "model",
    "sampler",
    "signal",
    "simulate",
]
