"""Numba-compiled decoders; arithmetic mirrors the numpy reference exactly."""

from __future__ import annotations

import numpy as np
from numba import njit

from .tables import ChannelPrep, DecoderTables


@njit(cache=True, nogil=True)
def _exhaustive_kernel(
    word_pair,
    sa,
    sb,
    r11,
    r12,
    r22,
    z1,
    z2,
    const,
    perm,
    best_idx,
    best_metric,
):
    batch = r11.shape[0]
    n = word_pair.shape[0]
    for t in range(batch):
        best = np.inf
        bidx = -1
        for w in range(n):
            p = word_pair[w]
            if perm[t, p]:
                sl_re = sb[w, 0]
                sl_im = sb[w, 1]
                sr_re = sa[w, 0]
                sr_im = sa[w, 1]
            else:
                sl_re = sa[w, 0]
                sl_im = sa[w, 1]
                sr_re = sb[w, 0]
                sr_im = sb[w, 1]
            e2r = z2[t, p, 0] - r22[t, p] * sr_re
            e2i = z2[t, p, 1] - r22[t, p] * sr_im
            t2 = e2r * e2r + e2i * e2i
            u = r12[t, p, 0] * sr_re - r12[t, p, 1] * sr_im
            v = r12[t, p, 0] * sr_im + r12[t, p, 1] * sr_re
            e1r = z1[t, p, 0] - r11[t, p] * sl_re - u
            e1i = z1[t, p, 1] - r11[t, p] * sl_im - v
            f1 = e1r * e1r + e1i * e1i
            m = const[t, p] + t2 + f1
            if m < best:
                best = m
                bidx = w
        best_idx[t] = bidx
        best_metric[t] = best


@njit(cache=True, nogil=True)
def _sphere_kernel(
    cell_pair,
    cell_off,
    cell_na,
    cell_nb,
    cell_a_ptr,
    cell_b_ptr,
    sym_a,
    sym_b,
    max_set,
    r11a,
    r12a,
    r22a,
    z1a,
    z2a,
    consta,
    perma,
    best_idx,
    best_metric,
    leaves,
):
    batch = r11a.shape[0]
    n_cells = cell_pair.shape[0]
    partials = np.empty((n_cells, max_set), dtype=np.float64)
    orders = np.empty((n_cells, max_set), dtype=np.int64)
    cell_best = np.empty(n_cells, dtype=np.float64)
    for t in range(batch):
        best = np.inf
        bidx = -1
        n_leaves = 0
        for c in range(n_cells):
            p = cell_pair[c]
            r22 = r22a[t, p]
            z2r = z2a[t, p, 0]
            z2i = z2a[t, p, 1]
            const = consta[t, p]
            if perma[t, p]:
                roots_ptr, nr = cell_a_ptr[c], cell_na[c]
                roots = sym_a
            else:
                roots_ptr, nr = cell_b_ptr[c], cell_nb[c]
                roots = sym_b
            for k in range(nr):
                e2r = z2r - r22 * roots[roots_ptr + k, 0]
                e2i = z2i - r22 * roots[roots_ptr + k, 1]
                partials[c, k] = const + (e2r * e2r + e2i * e2i)
            order = np.argsort(partials[c, :nr], kind="mergesort")
            orders[c, :nr] = order
            cell_best[c] = partials[c, order[0]]
        cell_order = np.argsort(cell_best, kind="mergesort")
        for ci in range(n_cells):
            c = cell_order[ci]
            if cell_best[c] > best:
                break  # remaining cells are at least as far
            p = cell_pair[c]
            off = cell_off[c]
            na = cell_na[c]
            nb = cell_nb[c]
            a0 = cell_a_ptr[c]
            b0 = cell_b_ptr[c]
            r11 = r11a[t, p]
            r12r = r12a[t, p, 0]
            r12i = r12a[t, p, 1]
            z1r = z1a[t, p, 0]
            z1i = z1a[t, p, 1]
            swapped = perma[t, p] != 0
            # the root level holds whichever column was factored second
            if swapped:
                roots_ptr, nr = a0, na
                lo_ptr, nl = b0, nb
                roots = sym_a
                lo_syms = sym_b
            else:
                roots_ptr, nr = b0, nb
                lo_ptr, nl = a0, na
                roots = sym_b
                lo_syms = sym_a
            for oi in range(nr):
                ir = orders[c, oi]
                partial = partials[c, ir]
                if partial > best:
                    break  # remaining roots are at least as far
                u = r12r * roots[roots_ptr + ir, 0] - r12i * roots[roots_ptr + ir, 1]
                v = r12r * roots[roots_ptr + ir, 1] + r12i * roots[roots_ptr + ir, 0]
                for il in range(nl):
                    sl_re = lo_syms[lo_ptr + il, 0]
                    sl_im = lo_syms[lo_ptr + il, 1]
                    e1r = z1r - r11 * sl_re - u
                    e1i = z1i - r11 * sl_im - v
                    m = partial + (e1r * e1r + e1i * e1i)
                    n_leaves += 1
                    if swapped:
                        widx = off + ir * nb + il
                    else:
                        widx = off + il * nb + ir
                    if m < best or (m == best and widx < bidx):
                        best = m
                        bidx = widx
        best_idx[t] = bidx
        best_metric[t] = best
        leaves[t] = n_leaves


@njit(cache=True, nogil=True)
def _pair_counts_self(a, counts):
    n, d = a.shape
    for i in range(n):
        for j in range(i + 1, n):
            s = 0
            for k in range(d):
                df = a[i, k] - a[j, k]
                s += df * df
            counts[s] += 1


@njit(cache=True, nogil=True)
def _pair_counts_cross(a, b, counts):
    na, d = a.shape
    nb = b.shape[0]
    for i in range(na):
        for j in range(nb):
            s = 0
            for k in range(d):
                df = a[i, k] - b[j, k]
                s += df * df
            counts[s] += 1


def pairwise_counts(a: np.ndarray, b: np.ndarray | None, max_tau: int) -> np.ndarray:
    """Counts of squared distances over a x b (unordered a pairs if b is None)."""
    counts = np.zeros(max_tau + 1, dtype=np.int64)
    a = np.ascontiguousarray(a, dtype=np.int64)
    if b is None:
        _pair_counts_self(a, counts)
    else:
        _pair_counts_cross(a, np.ascontiguousarray(b, dtype=np.int64), counts)
    return counts


def exhaustive_batch(tables: DecoderTables, prep: ChannelPrep):
    batch = prep.r11.shape[0]
    best_idx = np.empty(batch, dtype=np.int64)
    best_metric = np.empty(batch, dtype=np.float64)
    _exhaustive_kernel(
        tables.word_pair,
        tables.word_sa,
        tables.word_sb,
        prep.r11,
        prep.r12,
        prep.r22,
        prep.z1,
        prep.z2,
        prep.const,
        prep.perm,
        best_idx,
        best_metric,
    )
    counts = np.full(batch, tables.n_words, dtype=np.int64)
    return best_idx, best_metric, counts


def sphere_batch(tables: DecoderTables, prep: ChannelPrep):
    batch = prep.r11.shape[0]
    best_idx = np.empty(batch, dtype=np.int64)
    best_metric = np.empty(batch, dtype=np.float64)
    leaves = np.zeros(batch, dtype=np.int64)
    max_set = int(max(tables.cell_na.max(), tables.cell_nb.max()))
    _sphere_kernel(
        tables.cell_pair,
        tables.cell_off,
        tables.cell_na,
        tables.cell_nb,
        tables.cell_a_ptr,
        tables.cell_b_ptr,
        tables.sym_a,
        tables.sym_b,
        max_set,
        prep.r11,
        prep.r12,
        prep.r22,
        prep.z1,
        prep.z2,
        prep.const,
        prep.perm,
        best_idx,
        best_metric,
        leaves,
    )
    return best_idx, best_metric, leaves
