import numpy as np
import pytest
from scipy import integrate, stats

from impaired_mimo import AdcParams, LnaParams, PhaseNoiseParams, make_layout, rng_stream

TS_PAPER = 1.0 / (1024 * 15e3)


@pytest.fixture
def rng():
    return rng_stream(1234, 0)


@pytest.fixture
def paper_lna():
    return LnaParams(1.065, -0.028)


@pytest.fixture
def paper_pn():
    return PhaseNoiseParams(0.99, 1e3, TS_PAPER)


@pytest.fixture
def paper_layout():
    return make_layout(1024, 300)


def paper_adc(n0=0.0, n_users=4, n_occ=300, n_fft=1024):
    return AdcParams(6, 0.086 * np.sqrt(n_users * n_occ / n_fft + n0))


def direct_dft(x, sign=-1):
    """O(N^2) unitary DFT by explicit summation."""
    x = np.asarray(x, dtype=complex)
    n = len(x)
    k = np.arange(n)
    w = np.exp(sign * 2j * np.pi * np.outer(k, k) / n)
    return w @ x / np.sqrt(n)


def _cells(p: AdcParams):
    half = 2 ** (p.q - 1)
    t = p.delta * (np.arange(1, 2**p.q) - half)
    lo = np.concatenate([[-np.inf], t])
    hi = np.concatenate([t, [np.inf]])
    return lo, hi, p.levels


def adc_moments_oracle(p: AdcParams, power: float):
    """(gain, output power) of the complex midrise ADC for CN(0, power) input.

    Cell-by-cell adaptive quadrature of the per-dimension Gaussian integrals;
    independent of the closed-form exponential and Q-function sums.
    """
    sigma = np.sqrt(power / 2.0)
    pdf = stats.norm(scale=sigma).pdf
    cross = second = 0.0
    for a, b, lev in zip(*_cells(p)):
        cross += lev * integrate.quad(lambda v: v * pdf(v), a, b, epsabs=1e-14, epsrel=1e-12)[0]
        second += lev**2 * integrate.quad(pdf, a, b, epsabs=1e-14, epsrel=1e-12)[0]
    return cross / sigma**2, 2.0 * second


ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = []


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
