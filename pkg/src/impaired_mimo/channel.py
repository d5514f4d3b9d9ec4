"""Frequency-selective Rayleigh channel: draw, apply with AWGN, frequency response."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .numerics import sample_cn
from .waveform import TimeFrame

__all__ = [
    "ChannelRealization",
    "draw_channel",
    "freq_response",
    "apply_channel",
    "save_channel",
    "load_channel",
]


def freq_response(taps: np.ndarray, n_fft: int) -> np.ndarray:
    """Per-subcarrier channel matrices ``Hf[k] = sum_l H[l] exp(-j 2 pi k l / N)``.

    Args:
        taps: L x B x U tap matrices.
        n_fft: number of subcarriers N.

    Returns:
        N x B x U array.
    """
    taps = np.asarray(taps)
    if taps.shape[0] > n_fft:
        raise ValueError(f"{taps.shape[0]} taps exceed N={n_fft}; cyclic-prefix model invalid")
    # unnormalized forward DFT along the tap axis, zero-padded to N
    return np.fft.fft(taps, n=n_fft, axis=0)


@dataclass
class ChannelRealization:
    """Time-domain taps (L x B x U) and the cached N x B x U frequency response."""

    taps: np.ndarray
    n_fft: int
    freq: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.taps = np.asarray(self.taps, dtype=complex)
        self.freq = freq_response(self.taps, self.n_fft)

    @property
    def shape(self) -> tuple[int, int, int]:
        """(B, U, L)"""
        n_taps, b, u = self.taps.shape
        return b, u, n_taps


def draw_channel(n_antennas: int, n_users: int, n_taps: int, n_fft: int, rng) -> ChannelRealization:
    """I.i.d. CN(0, 1/L) taps, so each antenna-user link has unit average energy."""
    if min(n_antennas, n_users, n_taps) < 1:
        raise ValueError("B, U and L must all be >= 1")
    taps = sample_cn(rng, (n_taps, n_antennas, n_users), 1.0 / n_taps)
    return ChannelRealization(taps, n_fft)


def apply_channel(channel: ChannelRealization, tx: TimeFrame, n0: float, rng=None) -> np.ndarray:
    """Convolve the CP-extended transmit frame with the channel and add AWGN.

    ``tx.samples`` has shape (..., U, cp_len + N); leading axes are treated as
    independent frames. Returns x[n] for n = 0..N-1 with shape (..., B, N).
    """
    n_taps = channel.taps.shape[0]
    cp = tx.cp_len
    if cp < n_taps - 1:
        raise ValueError(f"cyclic prefix of {cp} samples is shorter than L-1 = {n_taps - 1}")
    s = tx.samples
    n = s.shape[-1] - cp
    x = np.zeros(s.shape[:-2] + (channel.taps.shape[1], n), dtype=complex)
    for ell in range(n_taps):
        x += np.matmul(channel.taps[ell], s[..., cp - ell : cp - ell + n])
    if n0 > 0:
        if rng is None:
            raise ValueError("an rng is required when n0 > 0")
        x += sample_cn(rng, x.shape, n0)
    return x


def save_channel(channel: ChannelRealization, path) -> None:
    np.savez(Path(path), taps=channel.taps, n_fft=channel.n_fft)


def load_channel(path) -> ChannelRealization:
    with np.load(Path(path)) as data:
        return ChannelRealization(data["taps"], int(data["n_fft"]))
