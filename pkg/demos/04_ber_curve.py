"""Uncoded BER of zero forcing with every impairment on: model versus simulation.

The analytic curve averages Q(sqrt(SINDR)) over users and subcarriers; the
simulated one counts bit errors of the exact nonlinear chain. A reduced
channel count keeps the runtime short; pass ``--channels 20`` for the full
experiment.
"""

# %%
import argparse

from impaired_mimo.analysis import ber_monte_carlo
from impaired_mimo.config import paper_config

parser = argparse.ArgumentParser()
parser.add_argument("--channels", type=int, default=5)
args, _ = parser.parse_known_args()

cfg = paper_config()
print(f"B={cfg.n_antennas} U={cfg.n_users} N={cfg.n_fft} S={cfg.n_occupied}, {args.channels} channels")

# %%
print(f"{'SNR dB':>7} {'analytic':>10} {'simulated':>10} {'95% +-':>9}")
for snr in cfg.snr_db:
    n0 = 10 ** (-snr / 10)
    res = ber_monte_carlo(
        cfg.n_antennas, cfg.n_taps, cfg.layout, cfg.n_users, n0, cfg.hardware(n0),
        n_channels=args.channels, n_frames=cfg.n_frames, seed=1,
    )
    print(f"{snr:7.1f} {res.ber_analytic:10.3e} {res.ber_mc:10.3e} {res.halfwidth:9.1e}")

# %% [markdown]
# Note the last column: at high SNR the error count is small and the interval
# is wide, so agreement there is only meaningful with many more frames.
