"""Build one uplink frame by hand: symbols -> OFDM -> channel -> ideal receiver.

Run with ``python demos/01_ofdm_link.py``. Each ``# %%`` block is a cell if
you open the file in an editor that understands them.
"""

# %%
import numpy as np

from impaired_mimo import (
    apply_channel,
    draw_channel,
    draw_symbols,
    make_layout,
    ofdm_demodulate,
    ofdm_modulate,
    qpsk_demap,
    rng_stream,
    zf_matrix,
)

rng = rng_stream(seed=2024)

# %% [markdown]
# An LTE-like layout: 1024 bins, 300 of them carry data, split around an empty DC bin.

# %%
layout = make_layout(1024, 300)
print("occupied bins:", layout.occupied[:3], "...", layout.occupied[-3:])
print(f"oversampling rate N/S = {layout.osr:.2f}")

# %%
n_ant, n_users, n_taps = 32, 4, 10
frame = draw_symbols(layout, n_users, "qpsk", rng)
tx = ofdm_modulate(frame, cp_len=n_taps - 1)
print("transmit samples per user (CP + body):", tx.samples.shape[-1])

# %% [markdown]
# The channel has L=10 Rayleigh taps. Because the cyclic prefix covers the
# channel memory, every subcarrier sees a flat B x U matrix H[k].

# %%
channel = draw_channel(n_ant, n_users, n_taps, layout.n_fft, rng)
x = apply_channel(channel, tx, n0=0.0)
r = ofdm_demodulate(x)
pred = np.einsum("kbu,uk->bk", channel.freq, frame.symbols)
print("max |r[k] - H[k] s[k]| =", np.max(np.abs(r - pred)))

# %% [markdown]
# Zero forcing with an identity hardware gain recovers the bits exactly when
# there is no noise.

# %%
h = channel.freq[layout.occupied]
a = zf_matrix(h, np.eye(n_ant))
est = np.einsum("kbu,bk->uk", a.conj(), r[:, layout.occupied])
bits = qpsk_demap(est)
print("bit errors:", int(np.count_nonzero(bits != frame.bits)), "of", bits.size)
