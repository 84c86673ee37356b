"""Collapsed Gibbs sampler: conjugate updates for the regression blocks,
the Polya-urn mixture update for the connectivity paths, the auxiliary-
variable update for the concentration parameter, a Metropolis-Hastings
move for the base-measure (sigma2_delta, rho), and the chain driver.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is an optional speedup
    njit = None

from . import base_measure
from .base_measure import BaseMeasureParams
from .errors import NumericDegeneracyError, ValidationError
from .model import ChainOutput, ChainState, Dataset, Hyperparameters, ModelSpec


# ---------------------------------------------------------------------------
# banded linear algebra on the tridiagonal posterior precision


class GammaGaussianConditional:
    """N(mean, P^{-1}) with tridiagonal precision P = Sigma^{-1} + diag(A).

    Covers both the data-informed full conditional of one connectivity
    path and (with A = B = 0) the base measure itself.
    """

    def __init__(self, base: BaseMeasureParams, A: np.ndarray, B: np.ndarray):
        self.base = base
        ab = base_measure.ar1_precision_banded(base)
        ab = ab.copy()
        ab[0] += A
        try:
            self.chol = scipy.linalg.cholesky_banded(ab, lower=True)
        except scipy.linalg.LinAlgError:
            # single bounded jitter retry before giving up
            jitter = 1e-10 * float(np.mean(ab[0]))
            if not np.isfinite(jitter) or jitter <= 0:
                raise NumericDegeneracyError("posterior precision not positive definite")
            ab[0] += jitter
            try:
                self.chol = scipy.linalg.cholesky_banded(ab, lower=True)
            except scipy.linalg.LinAlgError as exc:
                raise NumericDegeneracyError(
                    f"posterior precision not positive definite (jitter {jitter:g})"
                ) from exc
        # Sigma^{-1} mu_T = e1 / sigma2_gamma, so the prior part of the
        # right-hand side touches only the first element.
        rhs = B.astype(float).copy()
        rhs[0] += base.gamma_bar / base.sigma2_gamma
        self.rhs = rhs
        self.mean = scipy.linalg.cho_solve_banded((self.chol, True), rhs)
        self.logdet_precision = 2.0 * float(np.sum(np.log(self.chol[0])))

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        z = rng.standard_normal(self.base.T)
        # solve L' x = z: upper bidiagonal with diag chol[0], superdiag chol[1]
        ub = np.zeros_like(self.chol)
        ub[0, 1:] = self.chol[1, :-1]
        ub[1] = self.chol[0]
        return self.mean + scipy.linalg.solve_banded((0, 1), ub, z)

    def logpdf(self, gamma: np.ndarray) -> float:
        resid = np.asarray(gamma, dtype=float) - self.mean
        quad = _tridiag_quad(self.chol, resid)
        return float(
            -0.5 * self.base.T * np.log(2 * np.pi) + 0.5 * self.logdet_precision - 0.5 * quad
        )


def _tridiag_quad(chol_banded: np.ndarray, v: np.ndarray) -> float:
    """v' L L' v for a lower-banded Cholesky factor."""
    w = chol_banded[0] * v
    w[:-1] += chol_banded[1, :-1] * v[1:]
    return float(w @ w)


# ---------------------------------------------------------------------------
# connectivity-path conditionals


@dataclass(frozen=True)
class GammaConditionalTerms:
    """Diagonal data-precision A and linear term B for one (i, j) path;
    both have first element zero because the transition at t = 1 does
    not exist."""

    A: np.ndarray  # (T,)
    B: np.ndarray  # (T,)


@dataclass(frozen=True)
class MixtureWeights:
    """Normalized weights of the urn full conditional: fresh-draw mass q0
    plus one weight per other unmasked pair."""

    q0: float
    q: dict

    def total(self) -> float:
        return self.q0 + sum(self.q.values())


def compute_gamma_terms(
    i: int, j: int, state: ChainState, data: Dataset
) -> GammaConditionalTerms:
    """A and B for 0-based pair (i, j) from the transition equation."""
    x, beta, gamma = data.x, state.beta, state.gamma
    T = data.T
    inv_om = 1.0 / state.sigma2_omega
    A = np.zeros(T)
    A[1:] = x[:-1] ** 2 * beta[j, :-1] ** 2 * inv_om
    # S(t) = sum_l gamma_il(t) beta_l(t-1); remove the l = j contribution
    S = np.einsum("lt,lt->t", gamma[i, :, 1:], beta[:, :-1])
    S_other = S - gamma[i, j, 1:] * beta[j, :-1]
    B = np.zeros(T)
    B[1:] = beta[j, :-1] * x[:-1] * (beta[i, 1:] - x[:-1] * S_other) * inv_om
    return GammaConditionalTerms(A=A, B=B)


def gamma_gaussian_conditional(
    i: int, j: int, state: ChainState, data: Dataset, base: BaseMeasureParams
) -> GammaGaussianConditional:
    terms = compute_gamma_terms(i, j, state, data)
    return GammaGaussianConditional(base, terms.A, terms.B)


def gamma_mixture_logweights(
    i: int,
    j: int,
    state: ChainState,
    data: Dataset,
    base: BaseMeasureParams,
    spec: ModelSpec,
):
    """Unnormalized log-weights of the urn full conditional.

    Returns (log_q0, pairs, log_q, conditional) where `pairs` lists the
    other unmasked 0-based pairs aligned with `log_q`.
    """
    terms = compute_gamma_terms(i, j, state, data)
    cond = GammaGaussianConditional(base, terms.A, terms.B)
    # marginal of the fresh draw: tau * |I + Sigma A|^{-1/2} * exp(quad/2)
    # with |I + Sigma A| = |Sigma| * |Sigma^{-1} + A|
    logdet_ratio = base_measure.ar1_logdet_cov(base) + cond.logdet_precision
    prior_quad = base.gamma_bar**2 / base.sigma2_gamma
    log_q0 = (
        np.log(state.tau)
        - 0.5 * logdet_ratio
        - 0.5 * (prior_quad - float(cond.rhs @ cond.mean))
    )
    pairs = [p for p in spec.unmasked_pairs(data.R) if p != (i, j)]
    atoms = np.stack([state.gamma[k, l] for k, l in pairs])
    log_q = -0.5 * atoms**2 @ terms.A + atoms @ terms.B
    return float(log_q0), pairs, log_q, cond


def gamma_mixture_weights(
    i: int,
    j: int,
    state: ChainState,
    data: Dataset,
    base: BaseMeasureParams,
    spec: ModelSpec,
) -> MixtureWeights:
    log_q0, pairs, log_q, _ = gamma_mixture_logweights(i, j, state, data, base, spec)
    logs = np.concatenate([[log_q0], log_q])
    logs -= logs.max()
    w = np.exp(logs)
    w /= w.sum()
    return MixtureWeights(q0=float(w[0]), q=dict(zip(pairs, w[1:])))


def update_gamma_dp(
    i: int,
    j: int,
    state: ChainState,
    data: Dataset,
    base: BaseMeasureParams,
    spec: ModelSpec,
    rng: np.random.Generator,
) -> np.ndarray:
    """Draw one path from the urn mixture: fresh from the data-informed
    base with probability q0, otherwise an exact copy of another path."""
    log_q0, pairs, log_q, cond = gamma_mixture_logweights(i, j, state, data, base, spec)
    logs = np.concatenate([[log_q0], log_q])
    logs -= logs.max()
    w = np.exp(logs)
    w /= w.sum()
    pick = rng.choice(w.size, p=w)
    if pick == 0:
        return cond.sample(rng)
    k, l = pairs[pick - 1]
    return state.gamma[k, l].copy()


def update_gamma_gaussian(
    i: int,
    j: int,
    state: ChainState,
    data: Dataset,
    base: BaseMeasureParams,
    rng: np.random.Generator,
) -> np.ndarray:
    """Exact multivariate draw from the Gaussian full conditional (AR and
    random-walk variants)."""
    return gamma_gaussian_conditional(i, j, state, data, base).sample(rng)


# ---------------------------------------------------------------------------
# regression-block conditionals


def alpha_conditional(state: ChainState, data: Dataset, hyper: Hyperparameters):
    """Posterior means and variances of the R baseline trends."""
    T = data.T
    prec = 1.0 / hyper.sigma2_alpha + T / state.sigma2_eps
    resid = np.sum(data.y - data.x * state.beta, axis=1)
    mean = (hyper.mu / hyper.sigma2_alpha + resid / state.sigma2_eps) / prec
    return mean, np.full(data.R, 1.0 / prec)


def update_alpha(
    state: ChainState, data: Dataset, hyper: Hyperparameters, rng: np.random.Generator
) -> np.ndarray:
    mean, var = alpha_conditional(state, data, hyper)
    return mean + np.sqrt(var) * rng.standard_normal(data.R)


def beta_conditional(
    i: int, t: int, state: ChainState, data: Dataset, hyper: Hyperparameters
):
    """Mean and variance of the univariate full conditional of beta_i(t),
    0-based indices, with every other coordinate held at its current value."""
    x, y, beta, gamma = data.x, data.y, state.beta, state.gamma
    R, T = data.R, data.T
    prec = x[t] ** 2 / state.sigma2_eps
    num = x[t] * (y[i, t] - state.alpha[i]) / state.sigma2_eps
    if t == 0:
        prec += 1.0 / hyper.sigma2_beta
        num += hyper.beta_bar / hyper.sigma2_beta
    else:
        mu = x[t - 1] * (gamma[i, :, t] @ beta[:, t - 1])
        prec += 1.0 / state.sigma2_omega
        num += mu / state.sigma2_omega
    if t < T - 1:
        c = x[t] * gamma[:, i, t + 1]
        s_other = gamma[:, :, t + 1] @ beta[:, t] - gamma[:, i, t + 1] * beta[i, t]
        r = beta[:, t + 1] - x[t] * s_other
        prec += (c @ c) / state.sigma2_omega
        num += (c @ r) / state.sigma2_omega
    return num / prec, 1.0 / prec


def _beta_sweep(x, y, alpha, gamma, beta, z, inv_eps, inv_om, sigma2_beta, beta_bar):
    """Forward sweep t = 1..T, region by region, each coordinate drawn
    from its univariate Gaussian full conditional.  `beta` is mutated in
    place; `z` supplies the standard-normal innovations in scan order."""
    R, T = beta.shape
    for t in range(T):
        lik_prec = x[t] * x[t] * inv_eps
        last = t == T - 1
        for i in range(R):
            prec = lik_prec
            num = x[t] * (y[i, t] - alpha[i]) * inv_eps
            if t == 0:
                prec += 1.0 / sigma2_beta
                num += beta_bar / sigma2_beta
            else:
                mu = 0.0
                for l in range(R):
                    mu += gamma[i, l, t] * beta[l, t - 1]
                prec += inv_om
                num += x[t - 1] * mu * inv_om
            if not last:
                xt = x[t]
                for k in range(R):
                    c = xt * gamma[k, i, t + 1]
                    s_other = 0.0
                    for l in range(R):
                        if l != i:
                            s_other += gamma[k, l, t + 1] * beta[l, t]
                    r = beta[k, t + 1] - xt * s_other
                    prec += c * c * inv_om
                    num += c * r * inv_om
            beta[i, t] = num / prec + z[t, i] / np.sqrt(prec)
    return beta


if njit is not None:
    _beta_sweep = njit(cache=True)(_beta_sweep)


def update_beta(
    state: ChainState, data: Dataset, hyper: Hyperparameters, rng: np.random.Generator
) -> np.ndarray:
    beta = state.beta.copy()
    z = rng.standard_normal((data.T, data.R))
    return _beta_sweep(
        data.x,
        np.ascontiguousarray(data.y),
        state.alpha,
        np.ascontiguousarray(state.gamma),
        beta,
        z,
        1.0 / state.sigma2_eps,
        1.0 / state.sigma2_omega,
        hyper.sigma2_beta,
        hyper.beta_bar,
    )


def error_variance_conditionals(state: ChainState, data: Dataset, hyper: Hyperparameters):
    """Gamma (shape, rate) pairs for the precisions 1/sigma2_eps and
    1/sigma2_omega."""
    from .model import beta_transition_mean

    R, T = data.R, data.T
    rss_eps = float(np.sum((data.y - state.alpha[:, None] - data.x * state.beta) ** 2))
    resid_b = state.beta[:, 1:] - beta_transition_mean(data.x, state.beta, state.gamma)
    rss_om = float(np.sum(resid_b**2))
    eps = (hyper.a + 0.5 * R * T, hyper.b + 0.5 * rss_eps)
    omega = (hyper.a + 0.5 * R * (T - 1), hyper.b + 0.5 * rss_om)
    if eps[1] <= 0 or omega[1] <= 0:
        raise ValidationError("zero residual sum with an improper prior: degenerate posterior")
    return eps, omega


def update_error_variances(
    state: ChainState, data: Dataset, hyper: Hyperparameters, rng: np.random.Generator
):
    (se, re), (so, ro) = error_variance_conditionals(state, data, hyper)
    sigma2_eps = re / rng.gamma(se)
    sigma2_omega = ro / rng.gamma(so)
    return float(sigma2_eps), float(sigma2_omega)


# ---------------------------------------------------------------------------
# concentration parameter


def distinct_count(gammas: np.ndarray) -> int:
    """Number of exactly-equal-distinct path vectors among the rows
    (bitwise equality; urn copies are exact duplicates)."""
    gammas = np.ascontiguousarray(gammas)
    return len({row.tobytes() for row in gammas})


def distinct_rows(gammas: np.ndarray) -> np.ndarray:
    """First occurrence of each bitwise-distinct row, original order."""
    gammas = np.ascontiguousarray(gammas)
    seen = {}
    for row in gammas:
        seen.setdefault(row.tobytes(), row)
    return np.stack(list(seen.values()))


def unmasked_gammas(state: ChainState, spec: ModelSpec, R: int) -> np.ndarray:
    return np.stack([state.gamma[i, j] for i, j in spec.unmasked_pairs(R)])


def tau_mixture(d: int, m: int, a_tau: float, b_tau: float, eta: float):
    """(pi_eta, shape_hi, shape_lo, rate) of the two-Gamma full conditional.

    pi_eta / (1 - pi_eta) = (a_tau + d - 1) / (m * (b_tau - log eta)).
    """
    rate = b_tau - np.log(eta)
    odds = (a_tau + d - 1.0) / (m * rate)
    if odds <= 0:
        return 0.0, a_tau + d, a_tau + d - 1.0, rate
    pi = odds / (1.0 + odds)
    return float(pi), a_tau + d, a_tau + d - 1.0, rate


def update_tau(
    state: ChainState,
    spec: ModelSpec,
    hyper: Hyperparameters,
    R: int,
    rng: np.random.Generator,
):
    """Auxiliary-variable update: eta ~ Beta(tau+1, m), then tau from a
    mixture of two Gammas whose weight depends on the distinct-path count."""
    m = spec.n_unmasked(R)
    d = distinct_count(unmasked_gammas(state, spec, R))
    eta = float(rng.beta(state.tau + 1.0, m))
    pi, shape_hi, shape_lo, rate = tau_mixture(d, m, hyper.a_tau, hyper.b_tau, eta)
    u = rng.uniform()
    if shape_lo <= 0:
        # the low component is not a proper Gamma here; the high component
        # is the only sampleable branch
        shape = shape_hi
    else:
        shape = shape_hi if u < pi else shape_lo
    tau = float(rng.gamma(shape) / rate)
    return tau, eta


# ---------------------------------------------------------------------------
# Polya urn joint density and the (sigma2_delta, rho) move


def polya_urn_log_density(
    gammas: np.ndarray, base: BaseMeasureParams, tau: float
) -> float:
    """Sequential urn log-density of an ordered list of path vectors.

    The k-th factor reuses an earlier vector with mass n_prev/(tau+k-1)
    or draws fresh with mass tau/(tau+k-1) times the base density.
    """
    gammas = np.asarray(gammas, dtype=float)
    total = 0.0
    for k in range(gammas.shape[0]):
        n_prev = int(np.sum(np.all(gammas[:k] == gammas[k], axis=1))) if k else 0
        if n_prev:
            total += np.log(n_prev / (tau + k))
        else:
            if k:
                total += np.log(tau / (tau + k))
            total += _g0_logpdf(gammas[k], base)
    return float(total)


def _g0_logpdf(gamma: np.ndarray, base: BaseMeasureParams) -> float:
    """Base-measure log-density via the sequential AR(1) factorization
    (O(T); exact, equal to the dense-Cholesky route)."""
    ll = -0.5 * np.log(2 * np.pi * base.sigma2_gamma)
    ll -= 0.5 * (gamma[0] - base.gamma_bar) ** 2 / base.sigma2_gamma
    if base.T > 1:
        resid = gamma[1:] - base.rho * gamma[:-1]
        ll += -0.5 * (base.T - 1) * np.log(2 * np.pi * base.sigma2_delta)
        ll -= 0.5 * float(resid @ resid) / base.sigma2_delta
    return float(ll)


def update_sigma_delta_rho(
    state: ChainState,
    spec: ModelSpec,
    hyper: Hyperparameters,
    T: int,
    rng: np.random.Generator,
    scale_sigma: float,
    scale_rho: float,
):
    """Joint random-walk MH on (log sigma2_delta, logit((rho+1)/2)).

    The urn-density ratio reduces to base-measure ratios: over distinct
    paths only for the DP variant (reuse factors are base-free), over all
    unmasked paths for AR/RW.  RW keeps rho pinned at 1.
    """
    R = state.gamma.shape[0]
    gammas = unmasked_gammas(state, spec, R)
    if spec.variant == "dp":
        gammas = distinct_rows(gammas)

    zs = rng.standard_normal(2)
    u = rng.uniform()

    log_s2d_new = np.log(state.sigma2_delta) + scale_sigma * zs[0]
    s2d_new = float(np.exp(log_s2d_new))
    if spec.variant == "rw":
        rho_new = 1.0
    else:
        z = np.log((1.0 + state.rho) / (1.0 - state.rho))
        z_new = z + scale_rho * zs[1]
        rho_new = float(np.tanh(z_new / 2.0))

    old = BaseMeasureParams(hyper.gamma_bar, hyper.sigma2_gamma, state.sigma2_delta, state.rho, T)
    new = BaseMeasureParams(hyper.gamma_bar, hyper.sigma2_gamma, s2d_new, rho_new, T)
    log_acc = float(
        sum(_g0_logpdf(g, new) for g in gammas) - sum(_g0_logpdf(g, old) for g in gammas)
    )
    # precision prior Gamma(a, b) plus the log-transform Jacobian: with
    # u = 1/s2d the combined factor is u^(a-1) e^(-bu) * u, evaluated new/old
    u_new, u_old = 1.0 / s2d_new, 1.0 / state.sigma2_delta
    log_acc += hyper.a * (np.log(u_new) - np.log(u_old)) - hyper.b * (u_new - u_old)
    if spec.variant != "rw":
        # uniform rho prior; logit-transform Jacobian
        log_acc += np.log1p(-rho_new**2) - np.log1p(-state.rho**2)

    if np.log(u) < log_acc:
        return s2d_new, rho_new, True
    return float(state.sigma2_delta), float(state.rho), False


# ---------------------------------------------------------------------------
# chain driver


@dataclass
class ChainControls:
    burn: int = 10_000
    keep: int = 20_000
    thin: int = 1
    seed: int = 0
    prop_scale_sigma: float = 0.1
    prop_scale_rho: float = 0.1
    adapt_interval: int = 200
    # adaptation targets a 20-40% acceptance window during burn-in only
    accept_low: float = 0.2
    accept_high: float = 0.4


def initial_state(data: Dataset, spec: ModelSpec, hyper: Hyperparameters) -> ChainState:
    """Deterministic mid-range starting point: least-squares beta, prior
    means for the paths, residual-matched variances."""
    R, T = data.R, data.T
    alpha = data.y.mean(axis=1)
    xc = data.x - data.x.mean()
    denom = float(xc @ xc)
    slopes = (data.y - alpha[:, None]) @ xc / denom
    beta = np.tile(slopes[:, None], (1, T))
    resid = data.y - alpha[:, None] - data.x * beta
    sigma2_eps = max(float(np.mean(resid**2)), 1e-8)
    x2 = max(float(np.mean(data.x**2)), 1e-8)
    sigma2_omega = sigma2_delta = max(sigma2_eps / x2, 1e-8)
    rho = 1.0 if spec.variant == "rw" else 0.5
    base = BaseMeasureParams(hyper.gamma_bar, hyper.sigma2_gamma, sigma2_delta, rho, T)
    gamma = np.zeros((R, R, T))
    mean_path = base_measure.ar1_mean(base)
    for i, j in spec.unmasked_pairs(R):
        gamma[i, j] = mean_path
    tau = hyper.a_tau / hyper.b_tau
    return ChainState(
        alpha=alpha,
        beta=beta,
        gamma=gamma,
        sigma2_eps=sigma2_eps,
        sigma2_omega=sigma2_omega,
        sigma2_delta=sigma2_delta,
        rho=rho,
        tau=tau,
        eta=0.5,
    )


def run_chain(
    data: Dataset,
    spec: ModelSpec,
    hyper: Hyperparameters,
    controls: ChainControls = None,
) -> ChainOutput:
    """Fixed-scan Gibbs sweep: alpha, beta, error variances, each unmasked
    path row-major, (tau, eta) for the DP variant, then the MH move.
    Deterministic for a fixed seed."""
    controls = controls or ChainControls()
    spec.validate_for(data.R)
    rng = np.random.default_rng(controls.seed)
    R, T = data.R, data.T
    state = initial_state(data, spec, hyper)
    pairs = spec.unmasked_pairs(R)

    n_store = controls.keep // controls.thin
    out_alpha = np.empty((n_store, R))
    out_beta = np.empty((n_store, R, T))
    out_gamma = np.empty((n_store, R, R, T))
    scalar_names = ["sigma2_eps", "sigma2_omega", "sigma2_delta", "rho", "tau", "eta", "d"]
    out_scalars = {name: np.empty(n_store) for name in scalar_names}

    scale_sigma = controls.prop_scale_sigma
    scale_rho = controls.prop_scale_rho
    accepts_window = 0
    accepts_total = 0
    stored = 0
    t_start = time.perf_counter()

    total = controls.burn + controls.keep
    warned_divergent = False
    for sweep in range(total):
        try:
            state.alpha = update_alpha(state, data, hyper, rng)
            state.beta = update_beta(state, data, hyper, rng)
            state.sigma2_eps, state.sigma2_omega = update_error_variances(
                state, data, hyper, rng
            )

            base = state.base_params(hyper, T)
            for i, j in pairs:
                if spec.variant == "dp":
                    state.gamma[i, j] = update_gamma_dp(i, j, state, data, base, spec, rng)
                else:
                    state.gamma[i, j] = update_gamma_gaussian(i, j, state, data, base, rng)

            if spec.variant == "dp":
                state.tau, state.eta = update_tau(state, spec, hyper, R, rng)

            state.sigma2_delta, state.rho, accepted = update_sigma_delta_rho(
                state, spec, hyper, T, rng, scale_sigma, scale_rho
            )
        except (ValidationError, NumericDegeneracyError) as exc:
            exc.args = (f"sweep {sweep}: {exc}",)
            raise

        if not warned_divergent and (
            max(state.sigma2_eps, state.sigma2_omega, state.sigma2_delta) > 1e12
        ):
            # with the improper a = b = 0 prior, propriety is only empirical
            warnings.warn(
                f"variance draw exceeded 1e12 at sweep {sweep}; "
                "the posterior may be improper for this dataset",
                RuntimeWarning,
            )
            warned_divergent = True
        accepts_window += accepted
        accepts_total += accepted

        in_burn = sweep < controls.burn
        if in_burn and (sweep + 1) % controls.adapt_interval == 0:
            rate = accepts_window / controls.adapt_interval
            if rate < controls.accept_low:
                scale_sigma *= 0.8
                scale_rho *= 0.8
            elif rate > controls.accept_high:
                scale_sigma *= 1.25
                scale_rho *= 1.25
            accepts_window = 0
        elif not in_burn:
            idx = sweep - controls.burn
            if idx % controls.thin == 0 and stored < n_store:
                out_alpha[stored] = state.alpha
                out_beta[stored] = state.beta
                out_gamma[stored] = state.gamma
                for name in scalar_names[:-1]:
                    out_scalars[name][stored] = getattr(state, name)
                out_scalars["d"][stored] = distinct_count(unmasked_gammas(state, spec, R))
                stored += 1

    metadata = {
        "seed": controls.seed,
        "burn": controls.burn,
        "keep": controls.keep,
        "thin": controls.thin,
        "stored": stored,
        "variant": spec.variant,
        "zero_mask": sorted(spec.zero_mask),
        "hyperparameters": hyper.to_dict(),
        "mh_acceptance_rate": accepts_total / total if total else 0.0,
        "final_prop_scale_sigma": scale_sigma,
        "final_prop_scale_rho": scale_rho,
        "wall_clock_seconds": time.perf_counter() - t_start,
    }
    return ChainOutput(
        alpha=out_alpha,
        beta=out_beta,
        gamma=out_gamma,
        scalars=out_scalars,
        metadata=metadata,
    )
