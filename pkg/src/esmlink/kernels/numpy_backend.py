"""Pure-numpy reference decoders.

The exhaustive path is vectorized; the sphere path is a plain-Python
reference of the pruned tree search.  Both mirror the numba kernels
operation for operation, so indices, metrics and node counts agree
exactly between backends.
"""

from __future__ import annotations

import numpy as np

from .tables import ChannelPrep, DecoderTables

_CHUNK_ELEMS = 1 << 22


def pairwise_counts(a: np.ndarray, b: np.ndarray | None, max_tau: int) -> np.ndarray:
    """Counts of squared distances over a x b (unordered a pairs if b is None).

    Blocked |x|^2 + |y|^2 - 2 x.y in float64; all quantities are small
    integers, so the arithmetic is exact.
    """
    counts = np.zeros(max_tau + 1, dtype=np.int64)
    a = np.asarray(a, dtype=np.float64)
    an = (a * a).sum(axis=1)
    na = a.shape[0]
    if b is None:
        step = max(1, (1 << 24) // na)
        for lo in range(0, na, step):
            hi = min(lo + step, na)
            d = an[lo:hi, None] + an[None, :] - 2.0 * (a[lo:hi] @ a.T)
            d = np.rint(d).astype(np.int64)
            tri = np.triu_indices(hi - lo, k=1)  # pairs inside the diagonal block
            counts += np.bincount(d[tri], minlength=max_tau + 1)
            if hi < na:
                counts += np.bincount(d[:, hi:].ravel(), minlength=max_tau + 1)
        return counts
    b = np.asarray(b, dtype=np.float64)
    bn = (b * b).sum(axis=1)
    step = max(1, (1 << 24) // b.shape[0])
    for lo in range(0, na, step):
        hi = min(lo + step, na)
        d = an[lo:hi, None] + bn[None, :] - 2.0 * (a[lo:hi] @ b.T)
        d = np.rint(d).astype(np.int64)
        counts += np.bincount(d.ravel(), minlength=max_tau + 1)
    return counts


def exhaustive_batch(tables: DecoderTables, prep: ChannelPrep):
    n = tables.n_words
    batch = prep.r11.shape[0]
    p = tables.word_pair
    sa_re, sa_im = tables.word_sa[:, 0], tables.word_sa[:, 1]
    sb_re, sb_im = tables.word_sb[:, 0], tables.word_sb[:, 1]

    best_idx = np.empty(batch, dtype=np.int64)
    best_metric = np.empty(batch, dtype=np.float64)
    step = max(1, _CHUNK_ELEMS // n)
    for lo in range(0, batch, step):
        hi = min(lo + step, batch)
        perm = prep.perm[lo:hi][:, p].astype(bool)
        sl_re = np.where(perm, sb_re, sa_re)
        sl_im = np.where(perm, sb_im, sa_im)
        sr_re = np.where(perm, sa_re, sb_re)
        sr_im = np.where(perm, sa_im, sb_im)
        r11 = prep.r11[lo:hi][:, p]
        r12r = prep.r12[lo:hi, :, 0][:, p]
        r12i = prep.r12[lo:hi, :, 1][:, p]
        r22 = prep.r22[lo:hi][:, p]
        z1r = prep.z1[lo:hi, :, 0][:, p]
        z1i = prep.z1[lo:hi, :, 1][:, p]
        z2r = prep.z2[lo:hi, :, 0][:, p]
        z2i = prep.z2[lo:hi, :, 1][:, p]
        const = prep.const[lo:hi][:, p]

        e2r = z2r - r22 * sr_re
        e2i = z2i - r22 * sr_im
        t2 = e2r * e2r + e2i * e2i
        u = r12r * sr_re - r12i * sr_im
        v = r12r * sr_im + r12i * sr_re
        e1r = z1r - r11 * sl_re - u
        e1i = z1i - r11 * sl_im - v
        f1 = e1r * e1r + e1i * e1i
        metric = const + t2 + f1

        idx = np.argmin(metric, axis=1)
        best_idx[lo:hi] = idx
        best_metric[lo:hi] = metric[np.arange(hi - lo), idx]

    counts = np.full(batch, n, dtype=np.int64)
    return best_idx, best_metric, counts


def sphere_batch(tables: DecoderTables, prep: ChannelPrep):
    batch = prep.r11.shape[0]
    n_cells = len(tables.cell_pair)
    best_idx = np.empty(batch, dtype=np.int64)
    best_metric = np.empty(batch, dtype=np.float64)
    leaves = np.zeros(batch, dtype=np.int64)

    for t in range(batch):
        best = np.inf
        bidx = -1
        n_leaves = 0
        cell_partials = []
        cell_orders = []
        for c in range(n_cells):
            p = tables.cell_pair[c]
            r22 = prep.r22[t, p]
            z2r = prep.z2[t, p, 0]
            z2i = prep.z2[t, p, 1]
            const = prep.const[t, p]
            if prep.perm[t, p]:
                a0 = tables.cell_a_ptr[c]
                roots = tables.sym_a[a0 : a0 + tables.cell_na[c]]
            else:
                b0 = tables.cell_b_ptr[c]
                roots = tables.sym_b[b0 : b0 + tables.cell_nb[c]]
            e2r = z2r - r22 * roots[:, 0]
            e2i = z2i - r22 * roots[:, 1]
            partials = const + (e2r * e2r + e2i * e2i)
            cell_partials.append(partials)
            cell_orders.append(np.argsort(partials, kind="stable"))
        cell_best = np.array([p[o[0]] for p, o in zip(cell_partials, cell_orders)])
        for c in np.argsort(cell_best, kind="stable"):
            if cell_best[c] > best:
                break  # remaining cells are at least as far
            p = tables.cell_pair[c]
            off = tables.cell_off[c]
            nb = tables.cell_nb[c]
            a0 = tables.cell_a_ptr[c]
            b0 = tables.cell_b_ptr[c]
            r11 = prep.r11[t, p]
            r12r = prep.r12[t, p, 0]
            r12i = prep.r12[t, p, 1]
            z1r = prep.z1[t, p, 0]
            z1i = prep.z1[t, p, 1]
            swapped = bool(prep.perm[t, p])
            # the root level holds whichever column was factored second
            if swapped:
                roots = tables.sym_a[a0 : a0 + tables.cell_na[c]]
                lo_syms, nl = tables.sym_b[b0 : b0 + nb], nb
            else:
                roots = tables.sym_b[b0 : b0 + nb]
                lo_syms, nl = tables.sym_a[a0 : a0 + tables.cell_na[c]], tables.cell_na[c]
            partials = cell_partials[c]
            for ir in cell_orders[c]:
                partial = partials[ir]
                if partial > best:
                    break  # remaining roots are at least as far
                u = r12r * roots[ir, 0] - r12i * roots[ir, 1]
                v = r12r * roots[ir, 1] + r12i * roots[ir, 0]
                for il in range(nl):
                    sl_re = lo_syms[il, 0]
                    sl_im = lo_syms[il, 1]
                    e1r = z1r - r11 * sl_re - u
                    e1i = z1i - r11 * sl_im - v
                    m = partial + (e1r * e1r + e1i * e1i)
                    n_leaves += 1
                    widx = off + (int(ir) * nb + il if swapped else il * nb + int(ir))
                    if m < best or (m == best and widx < bidx):
                        best = m
                        bidx = widx
        best_idx[t] = bidx
        best_metric[t] = best
        leaves[t] = n_leaves
    return best_idx, best_metric, leaves
