"""PSD, zero-forcing detection, SINDR and BER, analytic and simulated."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bussgang import AggregateModel, linearize_system
from .channel import ChannelRealization, apply_channel, draw_channel
from .impairments import Hardware, impair_chain, phase_noise_path
from .numerics import q_function, rng_stream
from .waveform import SubcarrierLayout, draw_symbols, ofdm_demodulate, ofdm_modulate, qpsk_demap

__all__ = [
    "RankDeficientError",
    "BerResult",
    "simulate_frames",
    "psd_analytic",
    "psd_empirical",
    "zf_matrix",
    "sindr",
    "sindr_empirical",
    "ber_analytic",
    "ber_trial",
    "ber_monte_carlo",
]

MAX_CONDITION = 1e12


class RankDeficientError(ValueError):
    """Effective channel lost column rank on some subcarrier."""

    def __init__(self, subcarrier: int, cond: float):
        super().__init__(f"subcarrier {subcarrier}: condition number {cond:.3g} exceeds {MAX_CONDITION:g}")
        self.subcarrier = subcarrier
        self.cond = cond


def simulate_frames(
    channel: ChannelRealization,
    layout: SubcarrierLayout,
    n0: float,
    hw: Hardware,
    rng,
    n_frames: int,
    mode: str = "qpsk",
):
    """Run ``n_frames`` independent OFDM frames through channel and exact hardware.

    Returns:
        (frame, r_freq): the transmitted :class:`FrequencyFrame` with leading
        frame axis, and the demodulated received symbols (n_frames, B, N).
    """
    n_users = channel.taps.shape[2]
    cp = channel.taps.shape[0] - 1
    frame = draw_symbols(layout, n_users, mode, rng, batch=(n_frames,))
    tx = ofdm_modulate(frame, cp)
    x = apply_channel(channel, tx, n0, rng)
    phi = None
    if hw.pn is not None:
        # the LO runs through the prefix too; only the post-prefix part reaches the DFT
        phi = phase_noise_path(hw.pn, cp + layout.n_fft, rng, batch=(n_frames,))[..., cp:]
    r = impair_chain(x, hw, phi)
    return frame, ofdm_demodulate(r)


def psd_analytic(model: AggregateModel, literal: bool = False) -> np.ndarray:
    """Per-subcarrier received power averaged over antennas, ``tr(C_r[k]) / B``.

    With ``literal=True`` the squared norm of ``diag(C_r[k])`` is returned
    instead; that quantity has units of power squared and is kept only for
    comparison.
    """
    diag = np.real(np.diagonal(model.c_r_freq, axis1=1, axis2=2))
    if literal:
        return np.sum(diag**2, axis=1) / model.n_antennas
    # roundoff can leave -1e-17 on bins the distortion never reaches
    return np.maximum(np.sum(diag, axis=1) / model.n_antennas, 0.0)


def psd_empirical(
    channel: ChannelRealization,
    layout: SubcarrierLayout,
    n0: float,
    hw: Hardware,
    n_frames: int,
    rng,
    batch: int = 50,
) -> np.ndarray:
    """Averaged periodogram of the demodulated exact-chain output."""
    if n_frames < 1:
        raise ValueError("n_frames must be >= 1")
    acc = np.zeros(layout.n_fft)
    done = 0
    while done < n_frames:
        nb = min(batch, n_frames - done)
        _, r_freq = simulate_frames(channel, layout, n0, hw, rng, nb)
        acc += np.sum(np.abs(r_freq) ** 2, axis=(0, 1))
        done += nb
    return acc / (channel.taps.shape[1] * n_frames)


def zf_matrix(h_freq: np.ndarray, g_tot: np.ndarray) -> np.ndarray:
    """Zero-forcing combiners ``A[k] = M (M^H M)^-1`` with ``M = G_tot H[k]``.

    Args:
        h_freq: K x B x U channel matrices (any subset of subcarriers).
        g_tot: B x B aggregate gain.

    Raises:
        RankDeficientError: naming the first ill-conditioned subcarrier index
            (position within ``h_freq``).
    """
    m = g_tot @ h_freq
    gram = m.conj().transpose(0, 2, 1) @ m
    cond = np.linalg.cond(gram)
    bad = np.flatnonzero(~(cond <= MAX_CONDITION))
    if bad.size:
        raise RankDeficientError(int(bad[0]), float(cond[bad[0]]))
    return m @ np.linalg.inv(gram)


def sindr(
    a: np.ndarray,
    h_freq: np.ndarray,
    g_tot: np.ndarray,
    c_e_freq: np.ndarray,
    n0: float,
) -> np.ndarray:
    """Per-user, per-subcarrier SINDR of linear combiners under the aggregate model.

    All arrays are restricted to the same subcarriers (K x ...). Returns U x K;
    entries with no noise, interference or distortion are ``inf``.
    """
    ag = a.conj().transpose(0, 2, 1) @ g_tot  # K x U x B
    eff = ag @ h_freq  # K x U x U
    p = np.abs(eff) ** 2
    signal = np.diagonal(p, axis1=1, axis2=2)
    interference = p.sum(axis=2) - signal
    noise = n0 * np.sum(np.abs(ag) ** 2, axis=2)
    dist = np.real(np.einsum("kbu,kbc,kcu->ku", a.conj(), c_e_freq, a))
    denom = interference + noise + dist
    with np.errstate(divide="ignore"):
        out = np.where(denom > 0, signal / np.where(denom > 0, denom, 1.0), np.inf)
    return out.T


def sindr_empirical(
    channel: ChannelRealization,
    layout: SubcarrierLayout,
    n0: float,
    hw: Hardware,
    model: AggregateModel,
    n_frames: int,
    rng,
    batch: int = 50,
) -> np.ndarray:
    """Measured SINDR (U x S) of the ZF outputs with Gaussian symbols.

    The ZF output has unit signal gain, so the SINDR is the inverse of the
    mean squared estimation error.
    """
    h = channel.freq[layout.occupied]
    a = zf_matrix(h, model.g_tot)
    err = np.zeros((h.shape[2], layout.n_occupied))
    done = 0
    while done < n_frames:
        nb = min(batch, n_frames - done)
        frame, r_freq = simulate_frames(channel, layout, n0, hw, rng, nb, mode="gaussian")
        r_occ = r_freq[..., layout.occupied]  # F x B x S
        est = np.einsum("kbu,fbk->fuk", a.conj(), r_occ)
        err += np.sum(np.abs(est - frame.symbols[..., layout.occupied]) ** 2, axis=0)
        done += nb
    return n_frames / err


def ber_analytic(sindr_grid: np.ndarray) -> float:
    """Average of ``Q(sqrt(SINDR))`` over users and occupied subcarriers."""
    return float(np.mean(q_function(np.sqrt(np.asarray(sindr_grid, dtype=float)))))


@dataclass
class BerResult:
    ber_mc: float
    halfwidth: float
    ber_analytic: float
    n_errors: int
    n_bits: int
    n_channels: int
    n_redraws: int = 0


def ber_trial(
    n_antennas: int,
    n_taps: int,
    layout: SubcarrierLayout,
    n_users: int,
    n0: float,
    hw: Hardware,
    n_frames: int,
    seed: int,
    trial: int,
    max_redraws: int = 10,
    batch: int = 50,
):
    """One channel realization: analytic BER plus Monte-Carlo error count.

    The trial owns the random stream ``(seed, trial)``; rank-deficient channel
    draws are replaced from the same stream.

    Returns:
        (ber_analytic, n_errors, n_bits, n_redraws)
    """
    rng = rng_stream(seed, trial)
    for redraws in range(max_redraws + 1):
        channel = draw_channel(n_antennas, n_users, n_taps, layout.n_fft, rng)
        model = linearize_system(channel, layout, n0, hw)
        h = channel.freq[layout.occupied]
        try:
            a = zf_matrix(h, model.g_tot)
        except RankDeficientError:
            continue
        break
    else:
        raise RuntimeError(f"trial {trial}: no full-rank channel in {max_redraws + 1} draws")
    grid = sindr(a, h, model.g_tot, model.c_e_tot_freq[layout.occupied], n0)
    errors = 0
    done = 0
    while done < n_frames:
        nb = min(batch, n_frames - done)
        frame, r_freq = simulate_frames(channel, layout, n0, hw, rng, nb)
        est = np.einsum("kbu,fbk->fuk", a.conj(), r_freq[..., layout.occupied])
        errors += int(np.count_nonzero(qpsk_demap(est) != frame.bits))
        done += nb
    return ber_analytic(grid), errors, 2 * n_users * layout.n_occupied * n_frames, redraws


def ber_monte_carlo(
    n_antennas: int,
    n_taps: int,
    layout: SubcarrierLayout,
    n_users: int,
    n0: float,
    hw: Hardware,
    n_channels: int,
    n_frames: int,
    seed: int,
    executor=None,
) -> BerResult:
    """Bit error rate of ZF + QPSK over ``n_channels`` independent channel draws.

    ``executor`` (any ``concurrent.futures`` executor) spreads trials over
    workers; trial ``i`` always uses stream ``(seed, i)`` so the result does
    not depend on the worker count.
    """
    if n_channels < 1 or n_frames < 1:
        raise ValueError("n_channels and n_frames must be >= 1")
    args = [
        (n_antennas, n_taps, layout, n_users, n0, hw, n_frames, seed, i) for i in range(n_channels)
    ]
    if executor is None:
        results = [ber_trial(*arg) for arg in args]
    else:
        results = list(executor.map(_ber_trial_star, args))
    analytic = float(np.mean([r[0] for r in results]))
    errors = sum(r[1] for r in results)
    bits = sum(r[2] for r in results)
    p = errors / bits
    halfwidth = 1.96 * np.sqrt(p * (1.0 - p) / bits)
    return BerResult(p, float(halfwidth), analytic, errors, bits, n_channels, sum(r[3] for r in results))


def _ber_trial_star(args):
    return ber_trial(*args)
