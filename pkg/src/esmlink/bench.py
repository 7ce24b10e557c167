"""Throughput benchmark of the decoder backends on a fixed workload."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .codebooks import build_codebook
from .kernels import _numba_available, build_tables, decode_batch, set_backend


@dataclass(frozen=True)
class BenchRow:
    backend: str
    method: str
    trials: int
    seconds: float

    @property
    def rate(self) -> float:
        return self.trials / self.seconds if self.seconds > 0 else float("inf")


def _workload(trials: int, n_r: int, snr_db: float):
    cb = build_codebook("esm2", 16)
    tables = build_tables(cb)
    words = cb.words_complex()
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(1234)))
    h2 = rng.standard_normal((trials, n_r, cb.n_t, 2))
    h = (h2[..., 0] + 1j * h2[..., 1]) / np.sqrt(2.0)
    idx = rng.integers(0, cb.n_words, size=trials)
    n0 = float(cb.avg_energy_per_use()) / 10.0 ** (snr_db / 10.0)
    n2 = rng.standard_normal((trials, n_r, 2))
    y = np.einsum("brt,bt->br", h, words[idx]) + (n2[..., 0] + 1j * n2[..., 1]) * np.sqrt(
        n0 / 2.0
    )
    return tables, y, h


def run_benchmark(trials: int = 2048, n_r: int = 8, snr_db: float = 10.0) -> list[BenchRow]:
    tables, y, h = _workload(trials, n_r, snr_db)
    backends = ["numpy"] + (["numba"] if _numba_available() else [])
    rows = []
    baseline: dict[str, np.ndarray] = {}
    for backend in backends:
        set_backend(backend)
        try:
            for method in ("exhaustive", "sphere"):
                # numpy sphere is a slow reference loop; keep its share small
                n = trials if backend == "numba" or method == "exhaustive" else max(64, trials // 16)
                decode_batch(tables, y[:2], h[:2], method)  # warm-up / JIT compile
                t0 = time.perf_counter()
                got, _, _ = decode_batch(tables, y[:n], h[:n], method)
                dt = time.perf_counter() - t0
                key = f"{method}:{n}"
                if key in baseline and not np.array_equal(baseline[key], got):
                    raise AssertionError("backend outputs disagree")
                baseline[key] = got
                rows.append(BenchRow(backend, method, n, dt))
        finally:
            set_backend(None)
    return rows
