"""Maximum-likelihood detection: exhaustive search and exact sphere decoding."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codebooks import Codebook, SingleUseCodebook, TwoUseCodebook
from .kernels import build_tables, decode_batch, decode_two_use_batch


@dataclass(frozen=True)
class DecodeResult:
    index: int
    metric: float
    metrics_computed: int | None = None
    nodes_visited: int | None = None


def _check_single_use(y: np.ndarray, h: np.ndarray, cb: Codebook) -> None:
    if not isinstance(cb, SingleUseCodebook):
        raise ValueError("two-channel-use codebooks are decoded with decode_type3")
    if h.shape != (len(y), cb.n_t):
        raise ValueError(f"expected channel of shape ({len(y)}, {cb.n_t}), got {h.shape}")


def ml_exhaustive(y: np.ndarray, h: np.ndarray, cb: SingleUseCodebook) -> DecodeResult:
    """Global metric minimizer over every codeword; ties go to the lowest index."""
    y = np.asarray(y, dtype=np.complex128)
    h = np.asarray(h, dtype=np.complex128)
    _check_single_use(y, h, cb)
    idx, metric, count = decode_batch(build_tables(cb), y[None], h[None], "exhaustive")
    return DecodeResult(int(idx[0]), float(metric[0]), metrics_computed=int(count[0]))


def sphere_decode(y: np.ndarray, h: np.ndarray, cb: SingleUseCodebook) -> DecodeResult:
    """Exact-ML tree search; starts with an infinite radius, shrinks on leaves."""
    y = np.asarray(y, dtype=np.complex128)
    h = np.asarray(h, dtype=np.complex128)
    _check_single_use(y, h, cb)
    idx, metric, count = decode_batch(build_tables(cb), y[None], h[None], "sphere")
    return DecodeResult(int(idx[0]), float(metric[0]), nodes_visited=int(count[0]))


def decode_type3(
    y: np.ndarray, h: np.ndarray, cb: TwoUseCodebook, method: str = "exhaustive"
) -> DecodeResult:
    """Joint ML decision over a stacked two-use codebook.

    Per-column metrics are computed once per (vector space, column) and
    combined, honoring the column-order pairing constraint.
    """
    if not isinstance(cb, TwoUseCodebook):
        raise ValueError("decode_type3 requires a two-channel-use codebook")
    y = np.asarray(y, dtype=np.complex128)
    h = np.asarray(h, dtype=np.complex128)
    if y.shape != (h.shape[0], 2) or h.shape[1] != cb.n_t:
        raise ValueError("dimension mismatch between y, h and the codebook")
    idx, metric, count = decode_two_use_batch(cb, y[None], h[None], method)
    kwargs = (
        {"metrics_computed": int(count[0])}
        if method == "exhaustive"
        else {"nodes_visited": int(count[0])}
    )
    return DecodeResult(int(idx[0]), float(metric[0]), **kwargs)
