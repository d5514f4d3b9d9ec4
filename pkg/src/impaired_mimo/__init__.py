"""Massive MU-MIMO-OFDM uplink with nonideal BS hardware.

Exact behavioral simulation of the LNA / oscillator / ADC receive chain, and
its Bussgang-linearized aggregate model for analytic PSD and BER.
"""

from .analysis import (
    BerResult,
    RankDeficientError,
    ber_analytic,
    ber_monte_carlo,
    psd_analytic,
    psd_empirical,
    simulate_frames,
    sindr,
    sindr_empirical,
    zf_matrix,
)
from .bussgang import (
    AggregateModel,
    LinearizedComponent,
    adc_linearize,
    aggregate,
    cov_freq_to_lag,
    cov_lag_to_freq,
    identity_component,
    linearize_system,
    lna_linearize,
    osc_linearize,
    signal_cov_freq,
)
from .channel import ChannelRealization, apply_channel, draw_channel, freq_response
from .impairments import (
    AdcParams,
    Hardware,
    LnaParams,
    PhaseNoiseParams,
    adc_quantize,
    impair_chain,
    lna_apply,
    mixer_apply,
    phase_noise_path,
)
from .numerics import dft, q_function, rng_stream, sample_cn
from .waveform import (
    SubcarrierLayout,
    draw_symbols,
    make_layout,
    ofdm_demodulate,
    ofdm_modulate,
    qpsk_demap,
    qpsk_map,
)

__version__ = "0.1.0"
