"""Modeled BOLD regressor: stimulus designs, the double-gamma HRF and
convolution onto the scan grid, plus the sinusoid smoother for any series."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSeriesError, HorizonOverflowError, ValidationError

# Canonical double-gamma parameters (Glover 1999); user-overridable.
DEFAULT_A1 = 6.0
DEFAULT_A2 = 12.0
DEFAULT_B1 = 0.9
DEFAULT_B2 = 0.9
DEFAULT_C = 0.35

DEFAULT_DELTA = 2.0  # scan repeat time in seconds


@dataclass(frozen=True)
class HRFParams:
    """Parameters of the difference-of-gammas impulse response.

    a1, a2 are shape exponents, b1, b2 scales in seconds and c the
    undershoot ratio.  The response peaks near a1*b1 seconds.
    """

    a1: float = DEFAULT_A1
    a2: float = DEFAULT_A2
    b1: float = DEFAULT_B1
    b2: float = DEFAULT_B2
    c: float = DEFAULT_C

    def __post_init__(self):
        vals = (self.a1, self.a2, self.b1, self.b2, self.c)
        if not all(np.isfinite(v) for v in vals):
            raise ValidationError(f"non-finite HRF parameters: {vals}")
        if min(self.a1, self.a2, self.b1, self.b2) <= 0:
            raise ValidationError("HRF shape/scale parameters must be > 0")
        if not 0 <= self.c < 1:
            raise ValidationError(f"undershoot ratio must be in [0, 1), got {self.c}")


@dataclass(frozen=True)
class StimulusDesign:
    """Trial onsets/durations in seconds on a scan grid of T scans, delta
    seconds apart.  `amplitudes` carries the per-trial boxcar height (task
    trials 1, baseline trials 0)."""

    onsets: tuple[float, ...]
    durations: tuple[float, ...]
    delta: float = DEFAULT_DELTA
    T: int = 285
    amplitudes: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if len(self.onsets) != len(self.durations):
            raise ValidationError("onsets and durations must have equal length")
        if not self.amplitudes:
            object.__setattr__(self, "amplitudes", (1.0,) * len(self.onsets))
        if len(self.amplitudes) != len(self.onsets):
            raise ValidationError("amplitudes must match onsets")
        if any(d <= 0 for d in self.durations):
            raise ValidationError("durations must be > 0")
        if any(b < a for a, b in zip(self.onsets, self.onsets[1:])):
            raise ValidationError("onsets must be nondecreasing")
        if self.T < 2:
            raise ValidationError("horizon T must be >= 2")
        if self.delta <= 0:
            raise ValidationError("scan interval delta must be > 0")
        if self.onsets:
            end = max(o + d for o, d in zip(self.onsets, self.durations))
            if end > self.T * self.delta:
                raise HorizonOverflowError(
                    f"design ends at {end:.1f} s but horizon is {self.T * self.delta:.1f} s"
                )

    def boxcar(self) -> np.ndarray:
        """Stimulus sampled at scan start times, length T."""
        t = np.arange(self.T) * self.delta
        s = np.zeros(self.T)
        for onset, dur, amp in zip(self.onsets, self.durations, self.amplitudes):
            s += amp * ((t >= onset) & (t < onset + dur))
        return s

    @classmethod
    def from_json(cls, path) -> "StimulusDesign":
        with open(path) as fh:
            obj = json.load(fh)
        return cls(
            onsets=tuple(obj["onsets"]),
            durations=tuple(obj["durations"]),
            delta=float(obj.get("delta", DEFAULT_DELTA)),
            T=int(obj["T"]),
            amplitudes=tuple(obj.get("amplitudes", ())),
        )


@dataclass(frozen=True)
class SinusoidFit:
    """Least-squares sinusoid x(t) ~ beta1*cos(2*pi*omega*t) + beta2*sin(...)."""

    omega_hat: float
    beta1: float
    beta2: float
    amplitude: float
    phase: float
    residual_variance: float

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        ang = 2.0 * np.pi * self.omega_hat * np.asarray(t, dtype=float)
        return self.beta1 * np.cos(ang) + self.beta2 * np.sin(ang)


def glover_hrf(params: HRFParams, t) -> np.ndarray:
    """Difference-of-gammas HRF evaluated at time(s) t >= 0 (seconds).

    h(t) = (t/d1)^a1 exp(-(t-d1)/b1) - c (t/d2)^a2 exp(-(t-d2)/b2),
    with d_i = a_i * b_i, so each gamma bump peaks at d_i.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValidationError("HRF is defined for t >= 0")
    d1 = params.a1 * params.b1
    d2 = params.a2 * params.b2
    with np.errstate(divide="ignore"):
        h = (t / d1) ** params.a1 * np.exp(-(t - d1) / params.b1)
        h -= params.c * (t / d2) ** params.a2 * np.exp(-(t - d2) / params.b2)
    return h if h.ndim else float(h)


def block_design(
    blocks: int,
    trials_per_block: int,
    trial_duration: float,
    delta: float = DEFAULT_DELTA,
    T: int = 285,
) -> StimulusDesign:
    """Alternating task/baseline block design.

    Each of the `blocks` alternations contributes one task block and one
    baseline block of `trials_per_block` trials each; task trials carry
    boxcar amplitude 1, baseline trials 0.
    """
    if blocks < 1 or trials_per_block < 1:
        raise ValidationError("counts must be >= 1")
    if trial_duration <= 0:
        raise ValidationError("trial_duration must be > 0")
    onsets, durations, amplitudes = [], [], []
    t0 = 0.0
    for b in range(2 * blocks):
        amp = 1.0 if b % 2 == 0 else 0.0
        for _ in range(trials_per_block):
            onsets.append(t0)
            durations.append(trial_duration)
            amplitudes.append(amp)
            t0 += trial_duration
    return StimulusDesign(
        onsets=tuple(onsets),
        durations=tuple(durations),
        delta=delta,
        T=T,
        amplitudes=tuple(amplitudes),
    )


def convolve_stimulus(design: StimulusDesign, params: HRFParams) -> np.ndarray:
    """x(t) = sum_u s(u) h((t-u)*delta) * delta on the scan grid, length T."""
    s = design.boxcar()
    h = glover_hrf(params, np.arange(design.T) * design.delta)
    return np.convolve(s, h)[: design.T] * design.delta


def fourier_grid(T: int) -> np.ndarray:
    """Fourier frequencies j/T, j = 1..floor(T/2), restricted to (0, 0.5)."""
    j = np.arange(1, T // 2 + 1)
    freqs = j / T
    return freqs[freqs < 0.5]


def fit_sinusoid(x: np.ndarray, frequency_grid=None) -> SinusoidFit:
    """Periodogram-maximizing frequency plus least-squares sinusoid fit.

    The periodogram is evaluated on `frequency_grid` (defaults to the
    Fourier frequencies); ties break toward the lower frequency.  The
    coefficient fit indexes time as t = 1..T.
    """
    x = np.asarray(x, dtype=float)
    T = x.size
    if T < 8:
        raise ValidationError(f"need T >= 8 samples, got {T}")
    if np.ptp(x) == 0:
        raise DegenerateSeriesError("constant series has no oscillation frequency")
    grid = fourier_grid(T) if frequency_grid is None else np.asarray(frequency_grid, dtype=float)
    if np.any((grid <= 0) | (grid >= 0.5)):
        raise ValidationError("grid frequencies must lie in (0, 0.5)")

    t = np.arange(1, T + 1)
    xc = x - x.mean()
    phase = 2.0 * np.pi * np.outer(grid, t)
    periodogram = ((np.cos(phase) @ xc) ** 2 + (np.sin(phase) @ xc) ** 2) / T
    omega = grid[np.argmax(periodogram)]  # argmax returns the first (lowest) maximizer

    design = np.column_stack([np.cos(2 * np.pi * omega * t), np.sin(2 * np.pi * omega * t)])
    (beta1, beta2), *_ = np.linalg.lstsq(design, x, rcond=None)
    resid = x - design @ np.array([beta1, beta2])
    return SinusoidFit(
        omega_hat=float(omega),
        beta1=float(beta1),
        beta2=float(beta2),
        amplitude=float(np.hypot(beta1, beta2)),
        phase=float(np.arctan2(beta2, beta1)),
        residual_variance=float(np.mean(resid**2)),
    )
