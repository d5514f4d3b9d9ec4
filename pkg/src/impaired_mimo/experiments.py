"""Experiment drivers behind the ``sim`` command: PSD, BER, linearization dump, validation."""

from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import ber_monte_carlo, psd_analytic, simulate_frames, zf_matrix
from .bussgang import cov_freq_to_lag, linearize_system, lna_linearize, osc_linearize, signal_cov_freq
from .channel import apply_channel, draw_channel
from .config import ExperimentConfig
from .impairments import AdcParams, Hardware, impair_chain, phase_noise_path, quantize_real
from .numerics import rng_stream
from .waveform import draw_symbols, make_layout, ofdm_demodulate, ofdm_modulate

__all__ = ["to_db", "run_psd", "run_ber", "run_linearize", "run_validate"]

log = logging.getLogger(__name__)

PSD_CHUNK = 50
DB_FLOOR = -300.0
# stream ids: 0 for the fixed channel, PSD frame chunks from here on
_PSD_STREAM0 = 1000


def to_db(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore"):
        return np.maximum(10.0 * np.log10(np.maximum(p, 0.0)), DB_FLOOR)


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".10g")


def _write_table(path, header, rows, cfg: ExperimentConfig, seed: int) -> str:
    buf = io.StringIO()
    buf.write(f"# impaired_mimo {__version__} config={cfg.digest()} seed={seed}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([r if isinstance(r, str) else _fmt(r) for r in row])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


@contextmanager
def _executor(workers: int):
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            yield ex
    else:
        yield None


def _psd_chunk(args):
    channel, layout, n0, hw, seed, chunk, n = args
    _, r_freq = simulate_frames(channel, layout, n0, hw, rng_stream(seed, _PSD_STREAM0 + chunk), n)
    return np.sum(np.abs(r_freq) ** 2, axis=(0, 1))


def psd_pair(cfg: ExperimentConfig, n_frames: int, seed: int, workers: int = 1):
    """Analytic and simulated PSD (linear) for one seeded channel realization."""
    layout = cfg.layout
    hw = cfg.hardware()
    channel = draw_channel(cfg.n_antennas, cfg.n_users, cfg.n_taps, cfg.n_fft, rng_stream(seed, 0))
    model = linearize_system(channel, layout, cfg.n0, hw)
    sizes = [min(PSD_CHUNK, n_frames - s) for s in range(0, n_frames, PSD_CHUNK)]
    args = [(channel, layout, cfg.n0, hw, seed, i, n) for i, n in enumerate(sizes)]
    with _executor(workers) as ex:
        parts = list(map(_psd_chunk, args) if ex is None else ex.map(_psd_chunk, args))
    empirical = np.sum(parts, axis=0) / (cfg.n_antennas * n_frames)
    return psd_analytic(model), empirical, layout


def run_psd(cfg: ExperimentConfig, out_path=None, seed=None, n_frames=None, workers: int = 1) -> str:
    """CSV columns: k, psd_analytic_db, psd_empirical_db, n_frames."""
    seed = cfg.seed if seed is None else seed
    n_frames = cfg.psd_frames if n_frames is None else n_frames
    analytic, empirical, _ = psd_pair(cfg, n_frames, seed, workers)
    da, de = to_db(analytic), to_db(empirical)
    rows = [(k, da[k], de[k], n_frames) for k in range(cfg.n_fft)]
    return _write_table(out_path, ["k", "psd_analytic_db", "psd_empirical_db", "n_frames"], rows, cfg, seed)


def run_ber(cfg: ExperimentConfig, out_path=None, seed=None, n_channels=None, workers: int = 1) -> str:
    """CSV columns: snr_db, ber_analytic, ber_mc, mc_halfwidth, n_channels, n_bits.

    Each SNR point reuses the same channel draws (stream ``(seed, trial)``).
    """
    seed = cfg.seed if seed is None else seed
    n_channels = cfg.n_channels if n_channels is None else n_channels
    if not cfg.snr_db:
        raise ValueError("snr_db grid is empty")
    rows = []
    with _executor(workers) as ex:
        for snr in cfg.snr_db:
            n0 = 10.0 ** (-snr / 10.0)
            res = ber_monte_carlo(
                cfg.n_antennas, cfg.n_taps, cfg.layout, cfg.n_users, n0, cfg.hardware(n0),
                n_channels, cfg.n_frames, seed, executor=ex,
            )
            if res.n_redraws:
                log.warning("SNR %g dB: %d rank-deficient channel draws replaced", snr, res.n_redraws)
            rows.append((snr, res.ber_analytic, res.ber_mc, res.halfwidth, res.n_channels, res.n_bits))
    header = ["snr_db", "ber_analytic", "ber_mc", "mc_halfwidth", "n_channels", "n_bits"]
    return _write_table(out_path, header, rows, cfg, seed)


def run_linearize(cfg: ExperimentConfig, out_path=None, seed=None) -> str:
    """Long-format CSV: quantity, index, re, im.

    ``g_lna``/``g_osc``/``g_adc``/``g_tot`` rows hold gain diagonals per
    antenna; ``dist_power`` rows hold the antenna-averaged distortion power
    ``tr(C_e_tot[k]) / B`` per subcarrier.
    """
    seed = cfg.seed if seed is None else seed
    channel = draw_channel(cfg.n_antennas, cfg.n_users, cfg.n_taps, cfg.n_fft, rng_stream(seed, 0))
    model = linearize_system(channel, cfg.layout, cfg.n0, cfg.hardware())
    rows = []
    for name, gain in (
        ("g_lna", model.lna.gain),
        ("g_osc", model.osc.gain),
        ("g_adc", model.adc.gain),
        ("g_tot", model.g_tot),
    ):
        for b, g in enumerate(np.diagonal(gain)):
            rows.append((name, b, g.real, g.imag))
    dist = np.real(np.trace(model.c_e_tot_freq, axis1=1, axis2=2)) / cfg.n_antennas
    for k, d in enumerate(dist):
        rows.append(("dist_power", k, d, 0.0))
    return _write_table(out_path, ["quantity", "index", "re", "im"], rows, cfg, seed)


# ---------------------------------------------------------------- validation


def _check(report, name, value, bound, passed):
    report.append({"check": name, "value": float(value), "bound": float(bound), "passed": bool(passed)})


def _structural_checks(cfg: ExperimentConfig, report, rng):
    layout = cfg.layout
    frame = draw_symbols(layout, cfg.n_users, "qpsk", rng)
    tx = ofdm_modulate(frame, cfg.n_taps - 1)
    err = np.max(np.abs(ofdm_demodulate(tx.body) - frame.symbols))
    _check(report, "ofdm_round_trip", err, 1e-10, err <= 1e-10)

    channel = draw_channel(cfg.n_antennas, cfg.n_users, cfg.n_taps, cfg.n_fft, rng)
    x = apply_channel(channel, tx, 0.0)
    expect = np.einsum("kbu,uk->bk", channel.freq, frame.symbols)
    err = np.max(np.abs(ofdm_demodulate(x) - expect))
    _check(report, "cp_circularization", err, 1e-9, err <= 1e-9)

    model = linearize_system(channel, layout, cfg.n0, cfg.hardware())
    h = channel.freq[layout.occupied]
    a = zf_matrix(h, model.g_tot)
    eye = np.eye(cfg.n_users)
    err = np.max(np.abs(a.conj().transpose(0, 2, 1) @ model.g_tot @ h - eye))
    _check(report, "zf_identity", err, 1e-9, err <= 1e-9)

    adc = AdcParams(cfg.adc_q or 3, 1.0)
    grid = np.linspace(-1.5 * 2**adc.q / 2, 1.5 * 2**adc.q / 2, 10_000) + 1e-7
    qv = quantize_real(grid, adc)
    bad = int(np.count_nonzero(quantize_real(-grid, adc) != -qv))
    bad += int(np.count_nonzero(np.diff(qv) < 0))
    bad += int(np.count_nonzero(quantize_real(qv, adc) != qv))
    _check(report, "quantizer_properties_violations", bad, 0, bad == 0)

    ideal = linearize_system(channel, layout, cfg.n0, Hardware())
    err = max(np.max(np.abs(ideal.g_tot - np.eye(cfg.n_antennas))), np.max(np.abs(ideal.c_e_tot)))
    _check(report, "ideal_chain_reduction", err, 0.0, err == 0.0)


def _bussgang_checks(cfg: ExperimentConfig, report, seed, n_frames, literal_composition):
    """Small-geometry Monte-Carlo check of each component and of the composition."""
    n_ant, n_users, n_fft, n_occ, n_taps = 2, 2, 64, 8, 3
    layout = make_layout(n_fft, n_occ)
    rng = rng_stream(seed, 2)
    channel = draw_channel(n_ant, n_users, n_taps, n_fft, rng)
    n0 = cfg.n0
    hw = cfg.hardware()
    c_x = cov_freq_to_lag(signal_cov_freq(channel, layout, n0))
    model = linearize_system(channel, layout, n0, hw, literal_composition=literal_composition)
    acc_tot = np.zeros((n_ant, n_ant), dtype=complex)
    acc_lna = np.zeros_like(acc_tot)
    acc_osc = np.zeros_like(acc_tot)
    lna_c = lna_linearize(c_x, hw.lna) if hw.lna else None
    osc_c = osc_linearize(c_x, hw.pn) if hw.pn else None
    done = 0
    while done < n_frames:
        nb = min(2000, n_frames - done)
        frame = draw_symbols(layout, n_users, "gaussian", rng, batch=(nb,))
        x = apply_channel(channel, ofdm_modulate(frame, n_taps - 1), n0, rng)
        phi = phase_noise_path(hw.pn, n_fft, rng, batch=(nb,)) if hw.pn else None
        e = impair_chain(x, hw, phi) - model.g_tot @ x
        acc_tot += np.einsum("fbn,fcn->bc", e, e.conj()) / n_fft
        if lna_c is not None:
            e = impair_chain(x, Hardware(lna=hw.lna)) - lna_c.gain @ x
            acc_lna += np.einsum("fbn,fcn->bc", e, e.conj()) / n_fft
        if osc_c is not None:
            e = impair_chain(x, Hardware(pn=hw.pn), phi) - osc_c.gain @ x
            acc_osc += np.einsum("fbn,fcn->bc", e, e.conj()) / n_fft
        done += nb

    def rel(est, ref):
        return np.linalg.norm(est - ref) / np.linalg.norm(ref)

    if lna_c is not None:
        r = rel(acc_lna / n_frames, lna_c.dist_cov[0])
        _check(report, "bussgang_lna_lag0_rel_error", r, 0.05, r <= 0.05)
    if osc_c is not None:
        r = rel(acc_osc / n_frames, osc_c.dist_cov[0])
        _check(report, "bussgang_osc_lag0_rel_error", r, 0.05, r <= 0.05)
    if not hw.is_ideal:
        r = rel(acc_tot / n_frames, model.c_e_tot[0])
        _check(report, "aggregate_distortion_lag0_rel_error", r, 0.10, r <= 0.10)


def run_validate(
    cfg: ExperimentConfig,
    seed=None,
    psd_frames: int | None = None,
    n_channels: int = 4,
    bussgang_frames: int = 20_000,
    literal_composition: bool = False,
    workers: int = 1,
) -> dict:
    """Reduced-scale self-check of the whole stack.

    Returns ``{"passed": bool, "checks": [...]}`` where each check lists the
    measured value, its bound and the verdict. ``literal_composition`` swaps
    in the faulty distortion composition as a negative control.
    """
    seed = cfg.seed if seed is None else seed
    psd_frames = cfg.psd_frames if psd_frames is None else psd_frames
    report = []
    rng = rng_stream(seed, 1)
    _structural_checks(cfg, report, rng)
    _bussgang_checks(cfg, report, seed, bussgang_frames, literal_composition)

    analytic, empirical, layout = psd_pair(cfg, psd_frames, seed, workers)
    da, de = to_db(analytic), to_db(empirical)
    occ = np.max(np.abs(da - de)[layout.occupied])
    _check(report, "psd_occupied_max_db_error", occ, 0.5, occ <= 0.5)
    inband = np.mean(da[layout.occupied])
    guard = layout.guard[da[layout.guard] > inband - 50.0]
    if guard.size:
        g = np.max(np.abs(da - de)[guard])
        _check(report, "psd_guard_max_db_error", g, 1.5, g <= 1.5)

    with _executor(workers) as ex:
        for snr in cfg.snr_db:
            n0 = 10.0 ** (-snr / 10.0)
            res = ber_monte_carlo(
                cfg.n_antennas, cfg.n_taps, layout, cfg.n_users, n0, cfg.hardware(n0),
                n_channels, cfg.n_frames, seed, executor=ex,
            )
            if not 1e-3 <= res.ber_analytic <= 1e-1:
                continue
            bound = max(0.15 * res.ber_analytic, 3.0 * res.halfwidth)
            diff = abs(res.ber_mc - res.ber_analytic)
            _check(report, f"ber_gap_at_{snr:g}dB", diff, bound, diff <= bound)

    return {"passed": all(c["passed"] for c in report), "checks": report}
