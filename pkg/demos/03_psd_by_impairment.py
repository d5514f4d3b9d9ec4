"""Spectral regrowth: which impairment leaks power into the guard band?

Reproduces the four PSD comparisons (LNA, phase noise, ADC, everything) at
full system size with a reduced frame count so it finishes in well under a
minute. Pass ``--frames 500`` for the full-accuracy version.
"""

# %%
import argparse

import numpy as np

from impaired_mimo.config import paper_config
from impaired_mimo.experiments import psd_pair, to_db

parser = argparse.ArgumentParser()
parser.add_argument("--frames", type=int, default=100)
args, _ = parser.parse_known_args()

cases = {
    "LNA only": {"enable.pn": False, "enable.adc": False},
    "phase noise only": {"enable.lna": False, "enable.adc": False},
    "ADC only": {"enable.lna": False, "enable.pn": False},
    "all impairments": {},
}

# %%
curves = {}
for name, overrides in cases.items():
    cfg = paper_config(**overrides)
    analytic, empirical, layout = psd_pair(cfg, args.frames, seed=3)
    da, de = to_db(analytic), to_db(empirical)
    inband = np.mean(da[layout.occupied])
    leaked = np.sum(analytic[layout.guard]) / np.sum(analytic[layout.occupied])
    print(
        f"{name:>17}: in-band {inband:6.2f} dB, "
        f"worst guard leakage {np.max(da[layout.guard]) - inband:6.1f} dBc, "
        f"total guard power {10 * np.log10(leaked):6.1f} dBc, "
        f"max |analytic - simulated| on occupied {np.max(np.abs(da - de)[layout.occupied]):.2f} dB"
    )
    curves[name] = (da, de)

# %%
try:
    import matplotlib.pyplot as plt
except ImportError:
    plt = None
if plt is not None:
    fig, axes = plt.subplots(2, 2, figsize=(10, 7), sharex=True, sharey=True)
    k = np.fft.fftshift(np.arange(1024) - (np.arange(1024) >= 512) * 1024)
    for ax, (name, (da, de)) in zip(axes.flat, curves.items()):
        ax.plot(k, np.fft.fftshift(de), lw=0.8, label="simulated")
        ax.plot(k, np.fft.fftshift(da), "--", lw=1.0, label="analytic")
        ax.set_title(name)
        ax.set_ylim(-80, 5)
    axes[0, 0].legend()
    fig.supxlabel("subcarrier index")
    fig.supylabel("PSD [dB]")
    fig.tight_layout()
    fig.savefig("psd_by_impairment.png", dpi=120)
    print("wrote psd_by_impairment.png")
