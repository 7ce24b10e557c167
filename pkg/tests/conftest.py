import numpy as np
import pytest

from esmlink.codebooks import build_codebook


@pytest.fixture(scope="session")
def books16():
    return {s: build_codebook(s, 16) for s in ("msm", "esm1", "esm2", "esm3")}


@pytest.fixture(scope="session")
def books64():
    return {s: build_codebook(s, 64) for s in ("msm", "esm1", "esm2", "esm3")}


@pytest.fixture()
def rng():
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(20240917)))


def complex_normal(rng, *shape):
    z = rng.standard_normal(tuple(shape) + (2,))
    return (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2.0)
