"""Flat decoder tables and per-batch channel preprocessing.

The decoders work per active-antenna pair on a QR-reduced metric:

    ||y - H x||^2 = const_p + |z2 - r22*s2|^2 + |z1 - r11*s1 - r12*s2|^2

where (z, R) come from the Gram-Schmidt factorization of the two active
columns and const_p is the energy of y outside their span.  The column
with the smaller norm is placed first, which maximizes |r22| and hence
tree pruning; the swap is recorded per (trial, pair) so kernels can map
cell symbols onto factor levels.

Preprocessing runs once here, in numpy, for both backends, so backend
outputs can agree bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..codebooks import SingleUseCodebook


@dataclass(frozen=True)
class DecoderTables:
    """Index-ordered word and cell layout of a two-active-antenna codebook."""

    n_t: int
    n_words: int
    pairs: np.ndarray  # (P, 2) int32 active antenna pairs
    word_pair: np.ndarray  # (N,) int32 pair id per word
    word_sa: np.ndarray  # (N, 2) float64 symbol on the lower antenna (re, im)
    word_sb: np.ndarray  # (N, 2) float64 symbol on the higher antenna
    cell_pair: np.ndarray  # (C,) int32
    cell_off: np.ndarray  # (C,) int64 first word index
    cell_na: np.ndarray  # (C,) int32 lower-antenna candidate count
    cell_nb: np.ndarray  # (C,) int32 higher-antenna candidate count
    cell_a_ptr: np.ndarray  # (C,) int64 offset into sym_a
    cell_b_ptr: np.ndarray  # (C,) int64 offset into sym_b
    sym_a: np.ndarray  # (sum na, 2) float64 pooled lower-antenna candidates
    sym_b: np.ndarray  # (sum nb, 2) float64 pooled higher-antenna candidates


def build_tables(cb: SingleUseCodebook) -> DecoderTables:
    if cb.n_a != 2:
        raise ValueError("decoder tables require exactly two active antennas per word")
    cached = getattr(cb, "_decoder_tables", None)
    if cached is not None:
        return cached

    pair_ids: dict[tuple[int, int], int] = {}
    for cell in cb.cells:
        pair_ids.setdefault(cell.antennas, len(pair_ids))
    pairs = np.array(sorted(pair_ids, key=pair_ids.get), dtype=np.int32)

    n = cb.n_words
    word_pair = np.empty(n, dtype=np.int32)
    word_sa = np.empty((n, 2), dtype=np.float64)
    word_sb = np.empty((n, 2), dtype=np.float64)
    cell_pair, cell_off, cell_na, cell_nb = [], [], [], []
    cell_a_ptr, cell_b_ptr, sym_a, sym_b = [], [], [], []
    a_ptr = b_ptr = 0
    for cell, off in zip(cb.cells, cb.offsets[:-1]):
        sa = cell.sets[0].as_int_array().astype(np.float64)
        sb = cell.sets[1].as_int_array().astype(np.float64)
        na, nb = len(sa), len(sb)
        size = cell.size
        word_pair[off : off + size] = pair_ids[cell.antennas]
        word_sa[off : off + size] = np.repeat(sa, nb, axis=0)
        word_sb[off : off + size] = np.tile(sb, (na, 1))
        cell_pair.append(pair_ids[cell.antennas])
        cell_off.append(int(off))
        cell_na.append(na)
        cell_nb.append(nb)
        cell_a_ptr.append(a_ptr)
        cell_b_ptr.append(b_ptr)
        sym_a.append(sa)
        sym_b.append(sb)
        a_ptr += na
        b_ptr += nb

    tables = DecoderTables(
        n_t=cb.n_t,
        n_words=n,
        pairs=pairs,
        word_pair=word_pair,
        word_sa=word_sa,
        word_sb=word_sb,
        cell_pair=np.array(cell_pair, dtype=np.int32),
        cell_off=np.array(cell_off, dtype=np.int64),
        cell_na=np.array(cell_na, dtype=np.int32),
        cell_nb=np.array(cell_nb, dtype=np.int32),
        cell_a_ptr=np.array(cell_a_ptr, dtype=np.int64),
        cell_b_ptr=np.array(cell_b_ptr, dtype=np.int64),
        sym_a=np.concatenate(sym_a).astype(np.float64),
        sym_b=np.concatenate(sym_b).astype(np.float64),
    )
    cb._decoder_tables = tables
    return tables


@dataclass(frozen=True)
class ChannelPrep:
    """Per-(trial, pair) reduced-metric coefficients."""

    r11: np.ndarray  # (B, P) float64
    r12: np.ndarray  # (B, P, 2) float64
    r22: np.ndarray  # (B, P) float64
    z1: np.ndarray  # (B, P, 2) float64
    z2: np.ndarray  # (B, P, 2) float64
    const: np.ndarray  # (B, P) float64
    perm: np.ndarray  # (B, P) uint8, 1 if the higher antenna column was put first


def _safe(x: np.ndarray) -> np.ndarray:
    return np.where(x == 0.0, 1.0, x)


def prep_batch(y: np.ndarray, h: np.ndarray, pairs: np.ndarray) -> ChannelPrep:
    """Factorize every active pair of every trial's channel against y.

    y: (B, NR) complex, h: (B, NR, NT) complex.
    """
    ha = h[:, :, pairs[:, 0]]
    hb = h[:, :, pairs[:, 1]]
    na2 = np.einsum("brp,brp->bp", ha.conj(), ha).real
    nb2 = np.einsum("brp,brp->bp", hb.conj(), hb).real
    perm = (nb2 < na2).astype(np.uint8)
    swap = perm.astype(bool)[:, None, :]
    c1 = np.where(swap, hb, ha)
    c2 = np.where(swap, ha, hb)

    r11 = np.sqrt(np.einsum("brp,brp->bp", c1.conj(), c1).real)
    q1 = c1 / _safe(r11)[:, None, :]
    r12 = np.einsum("brp,brp->bp", q1.conj(), c2)
    w = c2 - r12[:, None, :] * q1
    r22 = np.sqrt(np.einsum("brp,brp->bp", w.conj(), w).real)
    q2 = w / _safe(r22)[:, None, :]

    z1 = np.einsum("brp,br->bp", q1.conj(), y)
    z2 = np.einsum("brp,br->bp", q2.conj(), y)
    ynorm = np.einsum("br,br->b", y.conj(), y).real
    const = ynorm[:, None] - (z1.conj() * z1).real - (z2.conj() * z2).real

    split = lambda c: np.stack([c.real, c.imag], axis=-1)
    return ChannelPrep(
        r11=np.ascontiguousarray(r11),
        r12=np.ascontiguousarray(split(r12)),
        r22=np.ascontiguousarray(r22),
        z1=np.ascontiguousarray(split(z1)),
        z2=np.ascontiguousarray(split(z2)),
        const=np.ascontiguousarray(const),
        perm=np.ascontiguousarray(perm),
    )
