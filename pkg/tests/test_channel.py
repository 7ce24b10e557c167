"""Channel statistics, noise scaling and the transmit operation."""

import numpy as np
import pytest

from esmlink.channel import NoiseConfig, sample_channel, sample_noise, transmit


def test_channel_unit_variance_and_circularity(rng):
    h = sample_channel(1000, 1000, rng)
    power = np.mean(np.abs(h) ** 2)
    assert abs(power - 1.0) < 0.01
    assert abs(h.real.var() - 0.5) < 0.01
    assert abs(h.imag.var() - 0.5) < 0.01
    assert abs(h.mean()) < 0.01


def test_channel_deterministic_per_seed():
    a = sample_channel(8, 4, np.random.Generator(np.random.Philox(99)))
    b = sample_channel(8, 4, np.random.Generator(np.random.Philox(99)))
    assert np.array_equal(a, b)


def test_channel_validates_dims(rng):
    with pytest.raises(ValueError):
        sample_channel(0, 4, rng)


def test_noise_config_scaling():
    cfg = NoiseConfig(es_per_use=20, snr_db=10.0)
    assert np.isclose(cfg.n0, 2.0)
    cfg = NoiseConfig(es_per_use=12, snr_db=0.0)
    assert np.isclose(cfg.n0, 12.0)


def test_transmit_noiseless_is_hx(rng):
    h = sample_channel(8, 4, rng)
    x = np.array([1 + 1j, 0, 2 - 2j, 0])
    y = transmit(x, h, NoiseConfig(20, snr_db=400.0), rng)
    assert np.allclose(y, h @ x, atol=1e-15)


def test_transmit_zero_signal_noise_variance(rng):
    h = sample_channel(2, 4, rng)
    cfg = NoiseConfig(es_per_use=20, snr_db=10.0)  # n0 = 2
    ys = np.stack([transmit(np.zeros(4), h, cfg, rng) for _ in range(50_000)])
    assert abs(np.mean(np.abs(ys) ** 2) / cfg.n0 - 1.0) < 0.01


def test_transmit_two_columns_same_channel(rng):
    h = sample_channel(8, 4, rng)
    x = np.array([[1, 1], [1j, -1j], [0, 0], [0, 0]], dtype=complex)
    y = transmit(x, h, NoiseConfig(12, snr_db=400.0), rng)
    assert y.shape == (8, 2)
    assert np.allclose(y, h @ x, atol=1e-12)


def test_transmit_channel_energy_identity(rng):
    """E ||Hx||^2 over random H equals N_R ||x||^2."""
    x = np.array([3 + 1j, 0, 0, 1 - 1j])
    n_r = 4
    total = 0.0
    trials = 100_000
    h = sample_channel(n_r * trials // n_r, 4, rng).reshape(trials // n_r, n_r, 4)
    total = np.sum(np.abs(h @ x) ** 2, axis=1)
    ratio = total.mean() / (n_r * np.sum(np.abs(x) ** 2))
    assert abs(ratio - 1.0) < 0.01


def test_transmit_validates_dims(rng):
    h = sample_channel(8, 4, rng)
    with pytest.raises(ValueError):
        transmit(np.zeros(3), h, NoiseConfig(20, 10.0), rng)


def test_sample_noise_shape_and_scale(rng):
    n = sample_noise((2000, 4), 3.0, rng)
    assert n.shape == (2000, 4)
    assert abs(np.mean(np.abs(n) ** 2) - 3.0) < 0.1
