"""Behavioral models of the BS receive chain: LNA, local oscillator, ADC.

These act sample by sample on the received baseband signal and are the ground
truth against which the linearized model in :mod:`impaired_mimo.bussgang` is
checked. Any stage may be switched off by passing ``None`` in its place.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

__all__ = [
    "LnaParams",
    "PhaseNoiseParams",
    "AdcParams",
    "Hardware",
    "lna_apply",
    "phase_noise_path",
    "mixer_apply",
    "adc_quantize",
    "quantize_real",
    "impair_chain",
]


@dataclass(frozen=True)
class LnaParams:
    """Memoryless cubic LNA ``y = alpha1 x + alpha2 x |x|^2``."""

    alpha1: complex = 1.0
    alpha2: complex = 0.0

    def __post_init__(self):
        if self.alpha1 == 0:
            raise ValueError("alpha1 must be nonzero")


@dataclass(frozen=True)
class PhaseNoiseParams:
    """Stationary AR(1) residual phase noise of a partially coherent LO.

    Attributes:
        lam: AR pole, strictly inside (0, 1).
        beta: phase-noise rate in Hz (innovation variance is 2 pi beta Ts).
        ts: sampling period in seconds.
    """

    lam: float
    beta: float
    ts: float

    def __post_init__(self):
        if not 0.0 < self.lam < 1.0:
            raise ValueError(f"lambda must lie in (0, 1), got {self.lam}")
        if self.beta < 0:
            raise ValueError(f"beta must be nonnegative, got {self.beta}")
        if self.ts <= 0:
            raise ValueError(f"sampling period must be positive, got {self.ts}")

    @property
    def innovation_var(self) -> float:
        return 2.0 * np.pi * self.beta * self.ts

    @property
    def stationary_var(self) -> float:
        return self.innovation_var / (1.0 - self.lam**2)


@dataclass(frozen=True)
class AdcParams:
    """Uniform midrise quantizer, ``q`` bits per real dimension, step ``delta``."""

    q: int
    delta: float

    def __post_init__(self):
        if int(self.q) != self.q or self.q < 1:
            raise ValueError(f"q must be a positive integer, got {self.q}")
        if self.delta <= 0:
            raise ValueError(f"delta must be positive, got {self.delta}")

    @property
    def levels(self) -> np.ndarray:
        i = np.arange(2**self.q)
        return self.delta * (i - 2 ** (self.q - 1) + 0.5)


@dataclass(frozen=True)
class Hardware:
    """Receive-chain configuration; ``None`` marks an ideal stage."""

    lna: LnaParams | None = None
    pn: PhaseNoiseParams | None = None
    adc: AdcParams | None = None

    @property
    def is_ideal(self) -> bool:
        return self.lna is None and self.pn is None and self.adc is None


def lna_apply(x, p: LnaParams | None) -> np.ndarray:
    x = np.asarray(x)
    if p is None:
        return x
    return p.alpha1 * x + p.alpha2 * x * (x.real**2 + x.imag**2)


def phase_noise_path(p: PhaseNoiseParams | None, n_samples: int, rng, batch=()) -> np.ndarray:
    """Sample ``phi[n] = lam phi[n-1] + v[n]`` started from its stationary law.

    Returns an array of shape ``batch + (n_samples,)``; zeros if ``p`` is None
    or ``beta == 0``.
    """
    if n_samples < 1:
        raise ValueError("need at least one phase-noise sample")
    shape = tuple(batch) + (n_samples,)
    if p is None or p.beta == 0:
        return np.zeros(shape)
    drive = rng.standard_normal(shape) * np.sqrt(p.innovation_var)
    drive[..., 0] = rng.standard_normal(tuple(batch)) * np.sqrt(p.stationary_var)
    return lfilter([1.0], [1.0, -p.lam], drive, axis=-1)


def mixer_apply(y, phi) -> np.ndarray:
    """Rotate every antenna by the common LO phase: ``z_b[n] = exp(j phi[n]) y_b[n]``.

    ``y`` is (..., B, n) and ``phi`` is (..., n).
    """
    y = np.asarray(y)
    phi = np.asarray(phi)
    if phi.shape[-1] != y.shape[-1]:
        raise ValueError(f"phase path has {phi.shape[-1]} samples, signal has {y.shape[-1]}")
    return np.exp(1j * phi)[..., None, :] * y


def quantize_real(v, p: AdcParams) -> np.ndarray:
    """Midrise quantizer on real input; saturates at +-(delta/2)(2^q - 1).

    Inputs exactly on a threshold map to the upper cell.
    """
    half = 2 ** (p.q - 1)
    idx = np.clip(np.floor(np.asarray(v) / p.delta), -half, half - 1)
    return p.delta * (idx + 0.5)


def adc_quantize(z, p: AdcParams | None) -> np.ndarray:
    z = np.asarray(z)
    if p is None:
        return z
    return quantize_real(z.real, p) + 1j * quantize_real(z.imag, p)


def impair_chain(x, hw: Hardware, phi=None) -> np.ndarray:
    """Exact nonlinear receive chain ``adc(exp(j phi) lna(x))``.

    ``phi`` is required when phase noise is enabled; it is ignored otherwise.
    """
    y = lna_apply(x, hw.lna)
    if hw.pn is not None:
        if phi is None:
            raise ValueError("phase-noise path required when the oscillator is nonideal")
        y = mixer_apply(y, phi)
    return adc_quantize(y, hw.adc)
