"""Backend parity: the numba kernels and the numpy reference must agree exactly."""

import os
import subprocess
import sys

import numpy as np
import pytest

from conftest import complex_normal
from esmlink.kernels import (
    active_backend,
    build_tables,
    decode_batch,
    pairwise_counts,
    prep_batch,
    set_backend,
)


@pytest.fixture()
def workload(books16, rng):
    cb = books16["esm2"]
    tables = build_tables(cb)
    words = cb.words_complex()
    n = 400
    h = complex_normal(rng, n, 8, 4)
    idx = rng.integers(0, cb.n_words, n)
    n0 = float(cb.avg_energy_per_use()) / 10 ** (8 / 10)
    y = np.einsum("brt,bt->br", h, words[idx]) + complex_normal(rng, n, 8) * np.sqrt(n0)
    return tables, y, h


def run_both(tables, y, h, method):
    out = {}
    for backend in ("numba", "numpy"):
        set_backend(backend)
        try:
            out[backend] = decode_batch(tables, y, h, method)
        finally:
            set_backend(None)
    return out


def test_backends_identical_exhaustive(workload):
    tables, y, h = workload
    r = run_both(tables, y, h, "exhaustive")
    for a, b in zip(r["numba"], r["numpy"]):
        assert np.array_equal(a, b)


def test_backends_identical_sphere(workload):
    tables, y, h = workload
    r = run_both(tables, y[:120], h[:120], "sphere")
    for a, b in zip(r["numba"], r["numpy"]):
        assert np.array_equal(a, b)  # indexes, metrics and leaf counts


def test_backends_identical_pairwise_counts(rng):
    a = rng.integers(-7, 8, (400, 8)).astype(np.int64)
    b = rng.integers(-7, 8, (250, 8)).astype(np.int64)
    outs = {}
    for backend in ("numba", "numpy"):
        set_backend(backend)
        try:
            outs[backend] = (
                pairwise_counts(a, None, 8 * 196),
                pairwise_counts(a, b, 8 * 196),
            )
        finally:
            set_backend(None)
    assert np.array_equal(outs["numba"][0], outs["numpy"][0])
    assert np.array_equal(outs["numba"][1], outs["numpy"][1])
    # totals must match the pair counts
    assert outs["numba"][0].sum() == 400 * 399 // 2
    assert outs["numba"][1].sum() == 400 * 250


def test_env_var_selects_backend():
    code = (
        "import os; os.environ['ESMLINK_BACKEND']='numpy';"
        "from esmlink.kernels import active_backend; print(active_backend())"
    )
    out = subprocess.run(
        [sys.executable, "-c", code], capture_output=True, text=True, check=True
    )
    assert out.stdout.strip() == "numpy"


def test_set_backend_validates():
    with pytest.raises(ValueError):
        set_backend("cuda")
    assert active_backend() in ("numba", "numpy")


def test_unknown_method_rejected(workload):
    tables, y, h = workload
    with pytest.raises(ValueError):
        decode_batch(tables, y, h, "zigzag")


def test_prep_handles_degenerate_channel(books16):
    # an all-zero channel must not produce NaNs; all metrics equal ||y||^2
    cb = books16["msm"]
    tables = build_tables(cb)
    y = np.ones((1, 8), dtype=complex)
    h = np.zeros((1, 8, 4), dtype=complex)
    prep = prep_batch(y, h, tables.pairs)
    assert np.isfinite(prep.const).all()
    idx, metric, _ = decode_batch(tables, y, h, "exhaustive")
    assert idx[0] == 0
    assert np.isclose(metric[0], 8.0)
