"""UE-side OFDM symbol generation and modulation, BS-side demodulation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import dft, sample_cn

__all__ = [
    "SubcarrierLayout",
    "FrequencyFrame",
    "TimeFrame",
    "make_layout",
    "draw_symbols",
    "qpsk_map",
    "qpsk_demap",
    "ofdm_modulate",
    "ofdm_demodulate",
]


@dataclass(frozen=True)
class SubcarrierLayout:
    """Occupied/guard split of the N subcarriers."""

    n_fft: int
    occupied: np.ndarray

    @property
    def n_occupied(self) -> int:
        return len(self.occupied)

    @property
    def guard(self) -> np.ndarray:
        return np.setdiff1d(np.arange(self.n_fft), self.occupied)

    @property
    def mask(self) -> np.ndarray:
        m = np.zeros(self.n_fft, dtype=bool)
        m[self.occupied] = True
        return m

    @property
    def osr(self) -> float:
        return self.n_fft / self.n_occupied


def make_layout(n_fft: int, n_occupied: int) -> SubcarrierLayout:
    """LTE-style layout: S/2 subcarriers on each side of an empty DC bin.

    >>> make_layout(8, 4).occupied.tolist()
    [1, 2, 6, 7]
    """
    if n_occupied <= 0 or n_occupied % 2:
        raise ValueError(f"occupied count must be a positive even number, got {n_occupied}")
    if n_occupied > n_fft - 1:
        raise ValueError(
            f"cannot place {n_occupied} subcarriers around an empty DC bin with N={n_fft}"
        )
    half = n_occupied // 2
    occ = np.concatenate([np.arange(1, half + 1), np.arange(n_fft - half, n_fft)])
    return SubcarrierLayout(n_fft, occ)


@dataclass
class FrequencyFrame:
    """Per-user frequency-domain symbols (U x N); guard bins are zero.

    ``bits`` holds the Gray labels (U x S x 2) when the frame is QPSK.
    """

    symbols: np.ndarray
    layout: SubcarrierLayout
    bits: np.ndarray | None = None


@dataclass
class TimeFrame:
    """Time samples for n = -cp_len .. N-1, cyclic prefix first."""

    samples: np.ndarray
    cp_len: int

    @property
    def body(self) -> np.ndarray:
        return self.samples[..., self.cp_len:]


_QPSK_SCALE = 1.0 / np.sqrt(2.0)


def qpsk_map(bits: np.ndarray) -> np.ndarray:
    """Gray QPSK: bit 0 selects the real sign, bit 1 the imaginary sign (0 -> +)."""
    bits = np.asarray(bits)
    return _QPSK_SCALE * ((1 - 2 * bits[..., 0]) + 1j * (1 - 2 * bits[..., 1]))


def qpsk_demap(estimates: np.ndarray, layout: SubcarrierLayout | None = None) -> np.ndarray:
    """Hard QPSK decisions.

    If ``layout`` is given, ``estimates`` is U x N and only occupied bins are
    demapped; the result is U x S x 2. Zero real/imaginary parts decide bit 0.
    """
    est = np.asarray(estimates)
    if layout is not None:
        est = est[..., layout.occupied]
    return np.stack([est.real < 0, est.imag < 0], axis=-1).astype(np.int8)


def draw_symbols(
    layout: SubcarrierLayout, n_users: int, mode: str, rng, batch: tuple = ()
) -> FrequencyFrame:
    """Draw unit-energy symbols on the occupied subcarriers.

    ``mode`` is ``"qpsk"`` or ``"gaussian"`` (CN(0, 1)). A nonempty ``batch``
    prepends independent-frame axes to the U x N symbol matrix.
    """
    if n_users < 1:
        raise ValueError("need at least one user")
    lead = tuple(batch) + (n_users,)
    symbols = np.zeros(lead + (layout.n_fft,), dtype=complex)
    bits = None
    if mode == "qpsk":
        bits = rng.integers(0, 2, size=lead + (layout.n_occupied, 2), dtype=np.int8)
        symbols[..., layout.occupied] = qpsk_map(bits)
    elif mode == "gaussian":
        symbols[..., layout.occupied] = sample_cn(rng, lead + (layout.n_occupied,))
    else:
        raise ValueError(f"unknown symbol mode {mode!r}")
    return FrequencyFrame(symbols, layout, bits)


def ofdm_modulate(frame: FrequencyFrame, cp_len: int = 0) -> TimeFrame:
    """Inverse unitary DFT per user, with a cyclic prefix of ``cp_len`` samples."""
    body = dft(frame.symbols, "inverse")
    if cp_len:
        body = np.concatenate([body[..., -cp_len:], body], axis=-1)
    return TimeFrame(body, cp_len)


def ofdm_demodulate(received: np.ndarray) -> np.ndarray:
    """Forward unitary DFT per antenna over n = 0..N-1 (prefix already removed)."""
    return dft(received, "forward")
