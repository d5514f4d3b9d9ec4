"""Bussgang linearization of the receive chain and the aggregate distortion model.

Covariances are plain arrays. A *lag sequence* has shape (N, B, B) and holds
``C[m] = E[v[n] v[n-m]^H]`` for circular lags m = 0..N-1; a *per-subcarrier
set* has the same shape and holds ``C[k]`` for k = 0..N-1. The two are linked
by :func:`cov_freq_to_lag` and :func:`cov_lag_to_freq`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization
from .impairments import AdcParams, Hardware, LnaParams, PhaseNoiseParams
from .numerics import q_function
from .waveform import SubcarrierLayout

__all__ = [
    "LinearizedComponent",
    "AggregateModel",
    "signal_cov_freq",
    "cov_freq_to_lag",
    "cov_lag_to_freq",
    "identity_component",
    "lna_linearize",
    "osc_linearize",
    "adc_linearize",
    "adc_output_power",
    "aggregate",
    "linearize_system",
]


@dataclass
class LinearizedComponent:
    """``out[n] = gain @ in[n] + e[n]`` with ``e`` uncorrelated with the input.

    ``out_cov`` is the lag sequence of the output, or None when only the
    lag-0 input statistics were available (ADC).
    """

    gain: np.ndarray
    dist_cov: np.ndarray
    out_cov: np.ndarray | None = None


@dataclass
class AggregateModel:
    """Composite linear model ``r[n] ~ g_tot x[n] + e_tot[n]``."""

    g_tot: np.ndarray
    c_e_tot: np.ndarray
    c_e_tot_freq: np.ndarray
    c_r_freq: np.ndarray
    c_x_freq: np.ndarray
    lna: LinearizedComponent | None = None
    osc: LinearizedComponent | None = None
    adc: LinearizedComponent | None = None

    @property
    def n_antennas(self) -> int:
        return self.g_tot.shape[0]


def signal_cov_freq(channel: ChannelRealization, layout: SubcarrierLayout, n0: float) -> np.ndarray:
    """Per-subcarrier covariance of the noisy received signal, unit-power symbols."""
    hf = channel.freq
    if hf.shape[0] != layout.n_fft:
        raise ValueError("channel and layout disagree on N")
    n_ant = hf.shape[1]
    c = np.zeros((layout.n_fft, n_ant, n_ant), dtype=complex)
    h_occ = hf[layout.occupied]
    c[layout.occupied] = h_occ @ h_occ.conj().transpose(0, 2, 1)
    c += n0 * np.eye(n_ant)
    return c


def cov_freq_to_lag(c_freq: np.ndarray) -> np.ndarray:
    """``C[m] = (1/N) sum_k C[k] exp(+j 2 pi k m / N)``."""
    return np.fft.ifft(c_freq, axis=0)


def cov_lag_to_freq(c_lag: np.ndarray) -> np.ndarray:
    """``C[k] = sum_m C[m] exp(-j 2 pi k m / N)`` (no 1/N)."""
    return np.fft.fft(c_lag, axis=0)


def _lag0_power(c_lag: np.ndarray) -> np.ndarray:
    return np.real(np.diagonal(c_lag[0]))


def identity_component(c_in: np.ndarray) -> LinearizedComponent:
    """Ideal stage: unit gain, no distortion, output statistics equal input."""
    n_ant = c_in.shape[-1]
    return LinearizedComponent(np.eye(n_ant, dtype=complex), np.zeros_like(c_in), c_in.copy())


def lna_linearize(c_x: np.ndarray, p: LnaParams) -> LinearizedComponent:
    """Exact Bussgang decomposition of the cubic LNA for Gaussian input.

    The output covariance follows from Isserlis' theorem::

        C_y = |a1|^2 C + 2|a2|^2 C o |C|^2 + 2 a1* a2 D C + 2 a1 a2* C D + 4|a2|^2 D C D

    with ``D = diag(C[0])``, leaving ``C_e = 2 |a2|^2 C o |C|^2``.
    """
    a1, a2 = complex(p.alpha1), complex(p.alpha2)
    pw = _lag0_power(c_x)
    dmat = np.diag(pw)
    gain = np.diag(a1 + 2.0 * a2 * pw)
    hadamard = c_x * np.abs(c_x) ** 2
    dist = 2.0 * abs(a2) ** 2 * hadamard
    out = (
        abs(a1) ** 2 * c_x
        + dist
        + 2.0 * np.conj(a1) * a2 * (dmat @ c_x)
        + 2.0 * a1 * np.conj(a2) * (c_x @ dmat)
        + 4.0 * abs(a2) ** 2 * (dmat @ c_x @ dmat)
    )
    return LinearizedComponent(gain, dist, out)


def _circular_lag(n: int) -> np.ndarray:
    m = np.arange(n)
    return np.minimum(m, n - m)


def osc_linearize(c_y: np.ndarray, p: PhaseNoiseParams) -> LinearizedComponent:
    """Common-LO phase noise: scalar gain ``exp(-var/2)`` and a lag-shaped distortion.

    The AR(1) autocorrelation ``var * lam^|m|`` is evaluated at the circular
    distance ``min(m, N-m)`` so the lag sequence stays Hermitian-periodic.
    """
    n, n_ant = c_y.shape[0], c_y.shape[-1]
    var = p.stationary_var
    decay = p.lam ** _circular_lag(n)
    gain_scalar = np.exp(-var / 2.0)
    z_factor = np.exp(-var * (1.0 - decay))
    e_factor = z_factor - np.exp(-var)
    out = z_factor[:, None, None] * c_y
    dist = e_factor[:, None, None] * c_y
    return LinearizedComponent(gain_scalar * np.eye(n_ant, dtype=complex), dist, out)


def adc_output_power(power, p: AdcParams) -> np.ndarray:
    """``E|r|^2`` of the quantized output for CN(0, power) input, per antenna."""
    power = np.asarray(power, dtype=float)
    c = np.arange(1, 2**p.q) - 2 ** (p.q - 1)
    arg = np.sqrt(2.0) * p.delta * c / np.sqrt(power[..., None])
    tail = np.sum(c * (1.0 - q_function(arg)), axis=-1)
    return 0.5 * p.delta**2 * (2**p.q - 1) ** 2 - 4.0 * p.delta**2 * tail


def _adc_gain(power: np.ndarray, p: AdcParams) -> np.ndarray:
    c = np.arange(1, 2**p.q) - 2 ** (p.q - 1)
    expo = np.exp(-(p.delta**2) * c**2 / power[..., None])
    return p.delta / np.sqrt(np.pi * power) * expo.sum(axis=-1)


def adc_linearize(c_z0: np.ndarray, p: AdcParams, n_fft: int = 1) -> LinearizedComponent:
    """Bussgang gain of the midrise ADC and its diagonal distortion approximation.

    Only the lag-0 input covariance ``c_z0`` (B x B) is needed. The distortion
    lag sequence has length ``n_fft`` and is zero away from lag 0.

    Raises:
        ValueError: if any antenna has zero input power.
    """
    power = np.real(np.diagonal(c_z0))
    if np.any(power <= 0):
        raise ValueError("ADC input power must be strictly positive on every antenna")
    g = _adc_gain(power, p)
    e0 = adc_output_power(power, p) - g**2 * power
    dist = np.zeros((n_fft,) + c_z0.shape, dtype=complex)
    dist[0] = np.diag(e0)
    return LinearizedComponent(np.diag(g).astype(complex), dist)


def aggregate(
    lna_c: LinearizedComponent,
    osc_c: LinearizedComponent,
    adc_c: LinearizedComponent,
    c_x_freq: np.ndarray,
    literal_composition: bool = False,
) -> AggregateModel:
    """Compose the three linearized stages into ``r ~ G_tot x + e_tot``.

    ``e_tot = e_adc + G_adc e_osc + G_adc G_osc e_lna``. With
    ``literal_composition`` the distortion instead repeats the oscillator term
    in place of the LNA term; it exists only as a negative control.
    """
    ga, go, gl = adc_c.gain, osc_c.gain, lna_c.gain
    shapes = {ga.shape, go.shape, gl.shape, c_x_freq.shape[1:]}
    lens = {lna_c.dist_cov.shape[0], osc_c.dist_cov.shape[0], adc_c.dist_cov.shape[0], c_x_freq.shape[0]}
    if len(shapes) != 1 or len(lens) != 1:
        raise ValueError(f"inconsistent component dimensions: {shapes}, lengths {lens}")
    g_tot = ga @ go @ gl
    ao = ga @ go
    if literal_composition:
        third = go @ ga @ osc_c.dist_cov @ (go @ ga).conj().T
    else:
        third = ao @ lna_c.dist_cov @ ao.conj().T
    c_e_tot = adc_c.dist_cov + ga @ osc_c.dist_cov @ ga.conj().T + third
    c_e_freq = cov_lag_to_freq(c_e_tot)
    c_r_freq = g_tot @ c_x_freq @ g_tot.conj().T + c_e_freq
    return AggregateModel(g_tot, c_e_tot, c_e_freq, c_r_freq, c_x_freq, lna_c, osc_c, adc_c)


def linearize_system(
    channel: ChannelRealization,
    layout: SubcarrierLayout,
    n0: float,
    hw: Hardware,
    literal_composition: bool = False,
) -> AggregateModel:
    """Propagate the received-signal covariance through the chain and aggregate."""
    c_x_freq = signal_cov_freq(channel, layout, n0)
    c_x = cov_freq_to_lag(c_x_freq)
    lna_c = identity_component(c_x) if hw.lna is None else lna_linearize(c_x, hw.lna)
    osc_c = identity_component(lna_c.out_cov) if hw.pn is None else osc_linearize(lna_c.out_cov, hw.pn)
    c_z = osc_c.out_cov
    if hw.adc is None:
        adc_c = identity_component(c_z)
    else:
        adc_c = adc_linearize(c_z[0], hw.adc, layout.n_fft)
        adc_c.out_cov = adc_c.gain @ c_z @ adc_c.gain.conj().T + adc_c.dist_cov
    return aggregate(lna_c, osc_c, adc_c, c_x_freq, literal_composition)
