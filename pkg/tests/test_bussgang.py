import numpy as np
import pytest

from impaired_mimo import (
    AdcParams,
    Hardware,
    LnaParams,
    PhaseNoiseParams,
    adc_linearize,
    aggregate,
    cov_freq_to_lag,
    cov_lag_to_freq,
    draw_channel,
    identity_component,
    linearize_system,
    lna_apply,
    lna_linearize,
    make_layout,
    osc_linearize,
    phase_noise_path,
    rng_stream,
    sample_cn,
    signal_cov_freq,
)
from impaired_mimo.bussgang import adc_output_power
from impaired_mimo.channel import ChannelRealization

from conftest import TS_PAPER, adc_moments_oracle, paper_adc


def random_lag_cov(seed, b=3, n=32, s=10, n0=0.1):
    rng = rng_stream(seed, 0)
    ch = draw_channel(b, 2, 4, n, rng)
    return cov_freq_to_lag(signal_cov_freq(ch, make_layout(n, s), n0))


def assert_circular_hermitian(c, atol=1e-12):
    n = c.shape[0]
    for m in range(1, n):
        np.testing.assert_allclose(c[n - m], c[m].conj().T, atol=atol)
    np.testing.assert_allclose(c[0], c[0].conj().T, atol=atol)


# -- covariance transforms --------------------------------------------------


def test_signal_cov_freq_scalar():
    lay = make_layout(4, 2)
    ch = ChannelRealization(np.array([[[2.0]]]), 4)
    c = signal_cov_freq(ch, lay, 1.0)
    assert c[1, 0, 0] == 5.0
    assert c[0, 0, 0] == 1.0
    c0 = signal_cov_freq(ch, lay, 0.0)
    assert np.all(c0[lay.guard] == 0)


def test_signal_power_average_full_size(paper_layout):
    # (1/N) sum_k tr(C[k]) / B averaged over channels -> U S / N = 1.172
    rng = rng_stream(8, 0)
    vals = []
    for _ in range(20):
        ch = draw_channel(32, 4, 10, 1024, rng)
        c = signal_cov_freq(ch, paper_layout, 0.0)
        vals.append(np.real(np.trace(c, axis1=1, axis2=2)).mean() / 32)
    assert 4 * 300 / 1024 == pytest.approx(1.172, abs=1e-3)
    assert np.mean(vals) == pytest.approx(1.171875, rel=0.02)


def test_flat_spectrum_is_white():
    c = cov_freq_to_lag(np.broadcast_to(np.eye(2), (8, 2, 2)))
    np.testing.assert_allclose(c[0], np.eye(2), atol=1e-15)
    np.testing.assert_allclose(c[1:], 0, atol=1e-15)


def test_lag_to_freq_constant():
    a = np.array([[2.0, 1j], [-1j, 3.0]])
    c = np.zeros((6, 2, 2), complex)
    c[0] = a
    np.testing.assert_allclose(cov_lag_to_freq(c), np.broadcast_to(a, (6, 2, 2)))


def test_transform_pair_and_symmetry():
    c = random_lag_cov(1)
    assert_circular_hermitian(c)
    np.testing.assert_allclose(cov_freq_to_lag(cov_lag_to_freq(c)), c, atol=1e-13)
    cf = cov_lag_to_freq(c)
    np.testing.assert_allclose(cf, cf.conj().transpose(0, 2, 1), atol=1e-10)


# -- LNA --------------------------------------------------------------------


def test_lna_linear_device():
    c = random_lag_cov(2)
    comp = lna_linearize(c, LnaParams(1.2 - 0.3j, 0.0))
    np.testing.assert_allclose(comp.gain, (1.2 - 0.3j) * np.eye(3))
    assert np.all(comp.dist_cov == 0)
    np.testing.assert_allclose(comp.out_cov, abs(1.2 - 0.3j) ** 2 * c)


def test_lna_scalar_values(paper_lna):
    c = np.full((1, 1, 1), 1.172 + 0j)
    assert lna_linearize(c, paper_lna).gain[0, 0] == pytest.approx(0.999368, abs=1e-9)
    c = np.ones((1, 1, 1), complex)
    assert lna_linearize(c, paper_lna).dist_cov[0, 0, 0] == pytest.approx(1.568e-3, abs=1e-12)


def test_lna_distortion_monte_carlo(paper_lna):
    x = sample_cn(rng_stream(4, 0), 10**6, 1.0)
    g = paper_lna.alpha1 + 2 * paper_lna.alpha2
    e = lna_apply(x, paper_lna) - g * x
    assert np.mean(np.abs(e) ** 2) == pytest.approx(1.568e-3, rel=0.03)
    # orthogonality of the Bussgang split
    assert abs(np.mean(e * x.conj())) <= 4 / np.sqrt(1e6) * np.sqrt(1.568e-3)


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_lna_bussgang_identity(seed):
    c = random_lag_cov(seed)
    comp = lna_linearize(c, LnaParams(1.065 + 0.02j, -0.028 + 0.005j))
    g = comp.gain
    np.testing.assert_allclose(comp.out_cov - g @ c @ g.conj().T, comp.dist_cov, atol=1e-12)
    assert_circular_hermitian(comp.out_cov)
    assert_circular_hermitian(comp.dist_cov)


# -- oscillator -------------------------------------------------------------


def test_osc_no_phase_noise():
    c = random_lag_cov(3)
    comp = osc_linearize(c, PhaseNoiseParams(0.99, 0.0, TS_PAPER))
    np.testing.assert_allclose(comp.gain, np.eye(3))
    np.testing.assert_allclose(comp.dist_cov, 0, atol=1e-15)
    np.testing.assert_allclose(comp.out_cov, c)


def test_osc_paper_values(paper_pn):
    c = random_lag_cov(4)
    comp = osc_linearize(c, paper_pn)
    closed = np.exp(-np.pi * 1e3 * TS_PAPER / (1 - 0.99**2))
    assert comp.gain[0, 0].real == pytest.approx(closed, abs=1e-12)
    assert comp.gain[0, 0].real == pytest.approx(0.98977, abs=1e-5)
    np.testing.assert_allclose(comp.dist_cov[0], (1 - np.exp(-paper_pn.stationary_var)) * c[0])
    assert 1 - np.exp(-paper_pn.stationary_var) == pytest.approx(0.02035, abs=1e-5)
    np.testing.assert_array_equal(np.diagonal(comp.out_cov[0]), np.diagonal(c[0]))
    g = comp.gain
    np.testing.assert_allclose(comp.out_cov - g @ c @ g.conj().T, comp.dist_cov, atol=1e-12)
    assert_circular_hermitian(comp.dist_cov)


def test_osc_gain_monotone_in_rate():
    c = random_lag_cov(5)
    gains = [osc_linearize(c, PhaseNoiseParams(0.99, b, TS_PAPER)).gain[0, 0].real for b in (0, 1e2, 1e3, 1e4, 1e5)]
    assert gains[0] == 1.0
    assert all(0 < g <= 1 for g in gains)
    assert np.all(np.diff(gains) < 0)


def test_osc_gain_monte_carlo(paper_pn):
    phi = phase_noise_path(paper_pn, 10, rng_stream(6, 0), batch=(100_000,))
    est = np.mean(np.exp(1j * phi))
    assert abs(est - np.exp(-paper_pn.stationary_var / 2)) <= 1e-3


# -- ADC --------------------------------------------------------------------


def test_adc_one_bit_gain():
    comp = adc_linearize(np.eye(1) * 2.0, AdcParams(1, np.sqrt(2.0)))
    assert comp.gain[0, 0].real == pytest.approx(1 / np.sqrt(np.pi), abs=1e-12)
    oracle, _ = adc_moments_oracle(AdcParams(1, np.sqrt(2.0)), 2.0)
    assert comp.gain[0, 0].real == pytest.approx(oracle, abs=1e-6)


def test_adc_fine_quantizer_limit():
    comp = adc_linearize(np.eye(1), AdcParams(12, 0.01))
    assert 0.999 <= comp.gain[0, 0].real <= 1.001


@pytest.mark.parametrize("q,rel_step", [(3, 0.3), (6, 0.086), (6, 0.2), (8, 0.01)])
def test_adc_against_quadrature(q, rel_step):
    power = 1.7
    p = AdcParams(q, rel_step * np.sqrt(power))
    g_oracle, out_oracle = adc_moments_oracle(p, power)
    comp = adc_linearize(np.eye(1) * power, p)
    assert comp.gain[0, 0].real == pytest.approx(g_oracle, abs=1e-9)
    assert adc_output_power(power, p) == pytest.approx(out_oracle, rel=1e-9)
    assert comp.dist_cov[0, 0, 0].real == pytest.approx(out_oracle - g_oracle**2 * power, rel=1e-6)


def test_adc_distortion_shape():
    c0 = np.array([[1.0, 0.3], [0.3, 2.0]], complex)
    comp = adc_linearize(c0, AdcParams(6, 0.1), n_fft=16)
    assert comp.dist_cov.shape == (16, 2, 2)
    assert np.all(comp.dist_cov[1:] == 0)
    assert comp.dist_cov[0, 0, 1] == 0
    assert np.all(np.diagonal(comp.dist_cov[0]).real > 0)
    # equal powers give equal gains
    eq = adc_linearize(np.eye(3) * 1.3, AdcParams(6, 0.1))
    assert np.ptp(np.diagonal(eq.gain).real) == 0


def test_adc_zero_power_rejected():
    with pytest.raises(ValueError):
        adc_linearize(np.diag([1.0, 0.0]).astype(complex), AdcParams(6, 0.1))


# -- aggregate ----------------------------------------------------------------


def _system(paper_layout, hw, seed=9, n0=0.0):
    ch = draw_channel(32, 4, 10, 1024, rng_stream(seed, 0))
    return ch, linearize_system(ch, paper_layout, n0, hw)


def test_ideal_aggregate(paper_layout):
    ch, m = _system(paper_layout, Hardware())
    assert np.array_equal(m.g_tot, np.eye(32))
    assert np.all(m.c_e_tot == 0)
    np.testing.assert_array_equal(m.c_r_freq, m.c_x_freq)


def test_lna_only_aggregate(paper_layout, paper_lna):
    ch, m = _system(paper_layout, Hardware(lna=paper_lna))
    c_x = cov_freq_to_lag(m.c_x_freq)
    ref = lna_linearize(c_x, paper_lna)
    np.testing.assert_allclose(m.g_tot, ref.gain)
    np.testing.assert_allclose(m.c_e_tot, ref.dist_cov)


def test_full_aggregate_structure(paper_layout, paper_lna, paper_pn):
    hw = Hardware(paper_lna, paper_pn, paper_adc())
    ch, m = _system(paper_layout, hw)
    expect = m.adc.gain @ m.osc.gain @ m.lna.gain
    np.testing.assert_allclose(m.g_tot, expect)
    assert np.count_nonzero(m.g_tot - np.diag(np.diagonal(m.g_tot))) == 0
    for cset in (m.c_r_freq, m.c_e_tot_freq):
        np.testing.assert_allclose(cset, cset.conj().transpose(0, 2, 1), atol=1e-10)
        tr = np.real(np.trace(cset, axis1=1, axis2=2))
        assert np.all(tr >= 0)
        mins = np.linalg.eigvalsh(cset)[:, 0]
        assert np.all(mins >= -1e-9 * np.maximum(tr, 1e-300))
    assert_circular_hermitian(m.c_e_tot, atol=1e-12)
    np.testing.assert_array_equal(np.diagonal(m.osc.out_cov[0]), np.diagonal(m.lna.out_cov[0]))


def test_aggregate_composition_terms(paper_lna, paper_pn):
    c = random_lag_cov(10)
    lna_c = lna_linearize(c, paper_lna)
    osc_c = osc_linearize(lna_c.out_cov, paper_pn)
    adc_c = adc_linearize(osc_c.out_cov[0], AdcParams(6, 0.1), c.shape[0])
    cf = cov_lag_to_freq(c)
    m = aggregate(lna_c, osc_c, adc_c, cf)
    ga, go = adc_c.gain, osc_c.gain
    ao = ga @ go
    expect = adc_c.dist_cov + ga @ osc_c.dist_cov @ ga.conj().T + ao @ lna_c.dist_cov @ ao.conj().T
    np.testing.assert_allclose(m.c_e_tot, expect)
    np.testing.assert_allclose(m.c_r_freq, m.g_tot @ cf @ m.g_tot.conj().T + cov_lag_to_freq(expect))


def test_aggregate_dimension_mismatch():
    c = random_lag_cov(11)
    other = random_lag_cov(11, b=2)
    with pytest.raises(ValueError):
        aggregate(identity_component(c), identity_component(other), identity_component(c), cov_lag_to_freq(c))
