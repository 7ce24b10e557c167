"""Decoder kernel dispatch: numba-compiled hot loops with a numpy fallback.

The backend is chosen by the ESMLINK_BACKEND environment variable
("numba" or "numpy"); it defaults to numba when importable.  Both
backends consume identical preprocessed inputs and produce identical
outputs, so a run is reproducible across them.
"""

from __future__ import annotations

import os
from importlib import import_module

import numpy as np

from ..codebooks import TwoUseCodebook
from .tables import ChannelPrep, DecoderTables, build_tables, prep_batch

_ENV_VAR = "ESMLINK_BACKEND"
_forced: str | None = None


def _numba_available() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def active_backend() -> str:
    if _forced is not None:
        return _forced
    choice = os.environ.get(_ENV_VAR, "").strip().lower()
    if choice in ("numba", "numpy"):
        if choice == "numba" and not _numba_available():
            raise RuntimeError(f"{_ENV_VAR}=numba requested but numba is not importable")
        return choice
    return "numba" if _numba_available() else "numpy"


def set_backend(name: str | None) -> None:
    """Force a backend programmatically (None restores env/default choice)."""
    global _forced
    if name is not None and name not in ("numba", "numpy"):
        raise ValueError("backend must be 'numba' or 'numpy'")
    _forced = name


def _backend_module():
    return import_module(f".{active_backend()}_backend", __package__)


def decode_batch(
    tables: DecoderTables, y: np.ndarray, h: np.ndarray, method: str = "exhaustive"
):
    """ML-decode a batch of single-use receptions.

    Returns (index, metric, count); count is the metric evaluations of the
    exhaustive search or the leaves visited by the sphere search.
    """
    prep = prep_batch(y, h, tables.pairs)
    mod = _backend_module()
    if method == "exhaustive":
        return mod.exhaustive_batch(tables, prep)
    if method == "sphere":
        return mod.sphere_batch(tables, prep)
    raise ValueError(f"unknown decode method {method!r}")


def pairwise_counts(a: np.ndarray, b: np.ndarray | None, max_tau: int) -> np.ndarray:
    """Exact integer squared-distance histogram over word-array pairs."""
    return _backend_module().pairwise_counts(a, b, max_tau)


def decode_two_use_batch(
    cb: TwoUseCodebook, y: np.ndarray, h: np.ndarray, method: str = "exhaustive"
):
    """Joint ML decode of stacked two-use receptions, y of shape (B, NR, 2).

    The joint metric separates per column, so the decision reduces to four
    single-use searches (each column against both vector spaces) plus an
    order comparison; ties prefer the lower codeword index.
    """
    ps_t = build_tables(cb.ps)
    tf_t = build_tables(cb.tf)
    i_ps1, m_ps1, c1 = decode_batch(ps_t, y[:, :, 0], h, method)
    i_tf1, m_tf1, c2 = decode_batch(tf_t, y[:, :, 0], h, method)
    i_ps2, m_ps2, c3 = decode_batch(ps_t, y[:, :, 1], h, method)
    i_tf2, m_tf2, c4 = decode_batch(tf_t, y[:, :, 1], h, method)

    m_s1 = m_ps1 + m_tf2
    m_s2 = m_tf1 + m_ps2
    order = (m_s2 < m_s1).astype(np.int64)
    ps_i = np.where(order == 0, i_ps1, i_ps2)
    tf_i = np.where(order == 0, i_tf2, i_tf1)
    idx = (order << (cb.ps.b + cb.tf.b)) | (ps_i << cb.tf.b) | tf_i
    metric = np.where(order == 0, m_s1, m_s2)
    return idx, metric, c1 + c2 + c3 + c4


__all__ = [
    "ChannelPrep",
    "DecoderTables",
    "active_backend",
    "build_tables",
    "decode_batch",
    "decode_two_use_batch",
    "pairwise_counts",
    "prep_batch",
    "set_backend",
]
