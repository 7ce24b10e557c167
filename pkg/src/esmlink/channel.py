"""Rayleigh fading channel, noise scaling and the transmit operation."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np


def sample_channel(n_r: int, n_t: int, rng: np.random.Generator) -> np.ndarray:
    """i.i.d. circularly symmetric complex Gaussian entries, unit variance."""
    if n_r < 1 or n_t < 1:
        raise ValueError("antenna counts must be positive")
    h = rng.standard_normal((n_r, n_t, 2))
    return (h[..., 0] + 1j * h[..., 1]) / np.sqrt(2.0)


@dataclass(frozen=True)
class NoiseConfig:
    """SNR bookkeeping: snr = es_per_use / n0 with per-scheme energy."""

    es_per_use: Fraction | float
    snr_db: float

    @property
    def n0(self) -> float:
        return float(self.es_per_use) / 10.0 ** (self.snr_db / 10.0)


def sample_noise(shape, n0: float, rng: np.random.Generator) -> np.ndarray:
    """Complex Gaussian noise with total per-entry variance n0."""
    n = rng.standard_normal(tuple(shape) + (2,))
    return (n[..., 0] + 1j * n[..., 1]) * np.sqrt(n0 / 2.0)


def transmit(
    x: np.ndarray, h: np.ndarray, cfg: NoiseConfig, rng: np.random.Generator
) -> np.ndarray:
    """y = Hx + n; the same channel applies to every column of ``x``."""
    x = np.asarray(x, dtype=np.complex128)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[:, None]
    if x.shape[0] != h.shape[1]:
        raise ValueError(f"channel has {h.shape[1]} inputs, signal has {x.shape[0]}")
    y = h @ x + sample_noise((h.shape[0], x.shape[1]), cfg.n0, rng)
    return y[:, 0] if squeeze else y
