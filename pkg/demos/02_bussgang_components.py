"""How each hardware block looks after linearization: a gain plus uncorrelated distortion.

The demo compares the closed-form distortion of each block against a direct
Monte-Carlo measurement on a small two-antenna system.
"""

# %%
import numpy as np

from impaired_mimo import (
    Hardware,
    adc_linearize,
    adc_quantize,
    apply_channel,
    cov_freq_to_lag,
    draw_channel,
    draw_symbols,
    impair_chain,
    lna_linearize,
    make_layout,
    ofdm_modulate,
    osc_linearize,
    phase_noise_path,
    rng_stream,
    signal_cov_freq,
)
from impaired_mimo.config import paper_config

hw = paper_config().hardware()
print(hw)

# %%
layout = make_layout(64, 8)
rng = rng_stream(5)
channel = draw_channel(2, 2, 3, 64, rng)
c_x = cov_freq_to_lag(signal_cov_freq(channel, layout, n0=0.0))
print("per-antenna input power:", np.real(np.diagonal(c_x[0])))

lna = lna_linearize(c_x, hw.lna)
osc = osc_linearize(c_x, hw.pn)
adc = adc_linearize(c_x[0], hw.adc, n_fft=64)
for name, comp in [("LNA", lna), ("oscillator", osc), ("ADC", adc)]:
    g = np.diagonal(comp.gain)
    print(f"{name:>10}: gain {np.round(g, 5)}  distortion power {np.real(np.diagonal(comp.dist_cov[0]))}")

# %% [markdown]
# Measure the same distortion by pushing Gaussian OFDM frames through each block.

# %%
n_frames = 20_000
frame = draw_symbols(layout, 2, "gaussian", rng, batch=(n_frames,))
x = apply_channel(channel, ofdm_modulate(frame, 2), 0.0)
phi = phase_noise_path(hw.pn, 64, rng, batch=(n_frames,))
outputs = {
    "LNA": (impair_chain(x, Hardware(lna=hw.lna)), lna),
    "oscillator": (impair_chain(x, Hardware(pn=hw.pn), phi), osc),
    "ADC": (adc_quantize(x, hw.adc), adc),
}
for name, (y, comp) in outputs.items():
    e = y - comp.gain @ x
    measured = np.einsum("fbn,fcn->bc", e, e.conj()) / (n_frames * 64)
    ref = comp.dist_cov[0]
    if name == "ADC":  # the model keeps only the diagonal
        measured, ref = np.diagonal(measured), np.diagonal(ref)
    rel = np.linalg.norm(measured - ref) / np.linalg.norm(ref)
    print(f"{name:>10}: relative error of lag-0 distortion covariance {rel:.2%}")
