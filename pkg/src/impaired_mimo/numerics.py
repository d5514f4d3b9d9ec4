"""Shared numerical primitives: unitary DFT, Gaussian tail, seeded sampling."""

from __future__ import annotations

import numpy as np
from scipy.special import erfc

__all__ = ["dft", "q_function", "rng_stream", "sample_cn"]


def dft(x, direction: str = "forward", axis: int = -1) -> np.ndarray:
    """Unitary DFT along ``axis``.

    Both directions carry the symmetric ``1/sqrt(N)`` scale, so
    ``dft(dft(x), "inverse") == x`` and norms are preserved.

    Args:
        x: complex array.
        direction: ``"forward"`` (``exp(-j...)``) or ``"inverse"`` (``exp(+j...)``).
        axis: axis holding the N time/frequency samples.

    Raises:
        ValueError: on zero-length transform axis or unknown direction.
    """
    x = np.asarray(x)
    if x.ndim == 0 or x.shape[axis] == 0:
        raise ValueError("dft needs at least one sample along the transform axis")
    if direction == "forward":
        return np.fft.fft(x, axis=axis, norm="ortho")
    if direction == "inverse":
        return np.fft.ifft(x, axis=axis, norm="ortho")
    raise ValueError(f"unknown DFT direction {direction!r}")


def q_function(x):
    """Gaussian tail probability ``P(Z > x)`` for standard normal ``Z``."""
    return 0.5 * erfc(np.asarray(x, dtype=float) / np.sqrt(2.0))


def rng_stream(seed: int, stream_id: int = 0) -> np.random.Generator:
    """Independent, reproducible generator for ``(seed, stream_id)``.

    Streams with different ids are spawned from the same seed sequence, so
    trial ``i`` sees the same draws regardless of which worker runs it.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream_id),))
    return np.random.Generator(np.random.PCG64(ss))


def sample_cn(rng: np.random.Generator, size, variance: float = 1.0) -> np.ndarray:
    """Draw i.i.d. circularly-symmetric complex Gaussian samples CN(0, variance)."""
    if variance < 0:
        raise ValueError(f"variance must be nonnegative, got {variance}")
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))
