"""Codeword spaces for multi-stream and enhanced spatial modulation.

Every codebook is a union of *cells*.  A cell fixes the active antennas and
the constellation transmitted on each of them; its codewords are the free
product of the per-antenna symbol sets.  Codeword indexing is positional:
cells are laid out consecutively and, inside a cell, the symbol on the
lowest active antenna is the most significant digit.  This yields the
bit-to-codeword bijection (prefixes in ascending binary order, combinations
and subspace vectors in their defining order, symbols in lex label order).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import numpy as np

from .constellations import (
    build_extension,
    build_primary_qam,
    build_primary_subset,
    build_secondary,
    build_tf_family,
)
from .lattice import Constellation, avg_energy

MATERIALIZE_LIMIT = 1 << 22

SCHEMES = ("msm", "esm1", "esm2", "esm3")


@dataclass(frozen=True)
class Cell:
    """One active-antenna/constellation combination."""

    antennas: tuple[int, ...]
    sets: tuple[Constellation, ...]

    def __post_init__(self):
        if len(self.antennas) != len(self.sets):
            raise ValueError("antenna/constellation arity mismatch")
        if list(self.antennas) != sorted(set(self.antennas)):
            raise ValueError("antennas must be strictly ascending")

    @property
    def size(self) -> int:
        return math.prod(len(s) for s in self.sets)

    def energy_sum(self) -> Fraction:
        """Sum of codeword energies over the cell."""
        return self.size * sum((avg_energy(s) for s in self.sets), Fraction(0))


@dataclass(frozen=True)
class Codeword:
    """Transmit matrix: one column per channel use, one row per antenna."""

    ints: np.ndarray  # (n_c, n_t, 2) integer lattice coordinates

    def as_complex(self) -> np.ndarray:
        """(n_t, n_c) complex transmit matrix."""
        m = self.ints[..., 0] + 1j * self.ints[..., 1]
        return m.T.astype(np.complex128)

    def energy(self) -> int:
        return int((self.ints.astype(np.int64) ** 2).sum())

    def active_per_column(self) -> list[int]:
        return [int(np.count_nonzero(col.any(axis=-1))) for col in self.ints]


class CodebookBase:
    scheme: str
    m: int
    n_t: int
    n_a: int
    n_c: int
    b: int
    n_words: int

    @property
    def bpcu(self) -> float:
        return self.b / self.n_c

    def avg_energy_per_use(self) -> Fraction:
        raise NotImplementedError

    def word_at(self, index: int) -> Codeword:
        raise NotImplementedError

    def encode(self, bits: Sequence[int]) -> Codeword:
        bits = list(bits)
        if len(bits) != self.b or any(b not in (0, 1) for b in bits):
            raise ValueError(f"expected {self.b} bits")
        return self.word_at(int("".join(map(str, bits)), 2))

    def decode_index(self, index: int) -> np.ndarray:
        """MSB-first bit label of a codeword index."""
        if not 0 <= index < self.n_words:
            raise ValueError("index out of range")
        return np.array([(index >> (self.b - 1 - k)) & 1 for k in range(self.b)], dtype=np.uint8)


class SingleUseCodebook(CodebookBase):
    """Codebook whose words occupy one channel use (one transmit column)."""

    def __init__(self, scheme: str, m: int, n_t: int, cells: Sequence[Cell]):
        self.scheme = scheme
        self.m = m
        self.n_t = n_t
        self.n_c = 1
        self.cells = tuple(cells)
        n_a = {len(c.antennas) for c in self.cells}
        if len(n_a) != 1:
            raise ValueError("cells disagree on the number of active antennas")
        self.n_a = n_a.pop()
        sizes = [c.size for c in self.cells]
        self.offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
        self.n_words = int(self.offsets[-1])
        if self.n_words & (self.n_words - 1):
            raise ValueError(f"codebook size {self.n_words} is not a power of two")
        self.b = self.n_words.bit_length() - 1
        self._words_int: np.ndarray | None = None

    def avg_energy_per_use(self) -> Fraction:
        total = sum((c.energy_sum() for c in self.cells), Fraction(0))
        return total / self.n_words

    def cell_of(self, index: int) -> tuple[Cell, int]:
        k = int(np.searchsorted(self.offsets, index, side="right")) - 1
        return self.cells[k], index - int(self.offsets[k])

    def word_at(self, index: int) -> Codeword:
        if not 0 <= index < self.n_words:
            raise ValueError("index out of range")
        cell, local = self.cell_of(index)
        ints = np.zeros((1, self.n_t, 2), dtype=np.int64)
        for ant, cset in zip(reversed(cell.antennas), reversed(cell.sets)):
            local, sym = divmod(local, len(cset))
            p = cset[sym]
            ints[0, ant] = (p.re, p.im)
        return Codeword(ints)

    def words_int(self) -> np.ndarray:
        """All words as an (n_words, n_t, 2) int8 array, in index order."""
        if self._words_int is not None:
            return self._words_int
        if self.n_words > MATERIALIZE_LIMIT:
            raise MemoryError(
                f"{self.n_words} words exceed the materialization limit; iterate cells instead"
            )
        out = np.zeros((self.n_words, self.n_t, 2), dtype=np.int8)
        for cell, off in zip(self.cells, self.offsets[:-1]):
            local = np.arange(cell.size)
            for ant, cset in zip(reversed(cell.antennas), reversed(cell.sets)):
                local, sym = np.divmod(local, len(cset))
                out[off : off + cell.size, ant] = cset.as_int_array()[sym]
        self._words_int = out
        return out

    def words_complex(self) -> np.ndarray:
        w = self.words_int()
        return (w[..., 0] + 1j * w[..., 1]).astype(np.complex128)


class TwoUseCodebook(CodebookBase):
    """Stacked two-channel-use codebook.

    A word is (order bit, single-use vector from ``ps``, vector from ``tf``);
    the order bit decides which vector occupies which column.  Index layout
    is [order | ps index | tf index], most significant first.
    """

    def __init__(self, scheme: str, m: int, ps: SingleUseCodebook, tf: SingleUseCodebook):
        if ps.n_t != tf.n_t:
            raise ValueError("slot spaces disagree on antenna count")
        self.scheme = scheme
        self.m = m
        self.n_t = ps.n_t
        self.n_c = 2
        self.n_a = ps.n_a
        self.ps = ps
        self.tf = tf
        self.b = 1 + ps.b + tf.b
        self.n_words = 1 << self.b

    def avg_energy_per_use(self) -> Fraction:
        return (self.ps.avg_energy_per_use() + self.tf.avg_energy_per_use()) / 2

    def split_index(self, index: int) -> tuple[int, int, int]:
        if not 0 <= index < self.n_words:
            raise ValueError("index out of range")
        order = index >> (self.ps.b + self.tf.b)
        ps_i = (index >> self.tf.b) & ((1 << self.ps.b) - 1)
        tf_i = index & ((1 << self.tf.b) - 1)
        return order, ps_i, tf_i

    def join_index(self, order: int, ps_i: int, tf_i: int) -> int:
        return (order << (self.ps.b + self.tf.b)) | (ps_i << self.tf.b) | tf_i

    def word_at(self, index: int) -> Codeword:
        order, ps_i, tf_i = self.split_index(index)
        a = self.ps.word_at(ps_i).ints[0]
        b = self.tf.word_at(tf_i).ints[0]
        cols = (a, b) if order == 0 else (b, a)
        return Codeword(np.stack(cols))

    def words_int(self) -> np.ndarray:
        """All words as (n_words, 2, n_t, 2) int8, in index order."""
        if self.n_words > MATERIALIZE_LIMIT:
            raise MemoryError(
                f"{self.n_words} words exceed the materialization limit; use the factors"
            )
        ps_w = self.ps.words_int()
        tf_w = self.tf.words_int()
        n_ps, n_tf = len(ps_w), len(tf_w)
        ps_rep = np.repeat(ps_w, n_tf, axis=0)
        tf_rep = np.tile(tf_w, (n_ps, 1, 1))
        s1 = np.stack([ps_rep, tf_rep], axis=1)
        s2 = np.stack([tf_rep, ps_rep], axis=1)
        return np.concatenate([s1, s2])


Codebook = SingleUseCodebook | TwoUseCodebook


def _pair_cells(pairs, set_pairs) -> list[Cell]:
    """Cells for two-active-antenna vectors, set pairs in antenna order."""
    cells = []
    for (a, b), (sa, sb) in zip(pairs, set_pairs):
        cells.append(Cell((a, b), (sa, sb)))
    return cells


def build_msm(m: int) -> SingleUseCodebook:
    """Baseline: four lex-ordered antenna pairs, full M-QAM on both."""
    p = build_primary_qam(m)
    pairs = [(0, 1), (0, 2), (1, 3), (2, 3)]
    cells = _pair_cells(pairs, [(p, p)] * 4)
    return SingleUseCodebook("msm", m, 4, cells)


def build_esm_type1(m: int) -> SingleUseCodebook:
    """Full primary on one active antenna, half-size secondary on the other."""
    p = build_primary_qam(m)
    s = build_secondary(m)
    pairs = [(0, 1), (0, 3), (1, 2), (2, 3)]
    cells = _pair_cells(pairs, [(p, s)] * 4) + _pair_cells(pairs, [(s, p)] * 4)
    return SingleUseCodebook("esm1", m, 4, cells)


def _esm2_l4_cells(m: int, base: int = 0) -> list[Cell]:
    """The fourth-subspace cells, optionally shifted to another antenna quad."""
    pairs = [(0, 1), (2, 3), (0, 2), (1, 3)]
    pairs = [(a + base, b + base) for a, b in pairs]
    if m == 16:
        q, s = build_extension("q4"), build_secondary(16)
        groups = [(q, s)]
    else:
        groups = [
            (build_extension("q8"), build_primary_subset(64)),
            (build_extension("r8"), build_secondary(64)),
        ]
    cells = []
    for hi, lo in groups:
        for pair in pairs:
            cells.extend(_pair_cells([pair, pair], [(hi, lo), (lo, hi)]))
    return cells


def build_esm_type2(m: int) -> SingleUseCodebook:
    """Reduced-energy design: low-energy primary subset plus secondary."""
    p = build_primary_subset(m)
    s = build_secondary(m)
    l1 = _pair_cells([(0, 1), (0, 1), (2, 3), (2, 3)], [(p, s), (s, p), (p, s), (s, p)])
    l2 = _pair_cells([(0, 2), (0, 2), (1, 3), (1, 3)], [(p, s), (s, p), (p, s), (s, p)])
    l3 = _pair_cells([(0, 3), (0, 3), (1, 2), (1, 2)], [(p, s), (s, p), (p, s), (s, p)])
    return SingleUseCodebook("esm2", m, 4, l1 + l2 + l3 + _esm2_l4_cells(m))


def build_tf_space(m: int) -> SingleUseCodebook:
    """Single-use vector space over the two second-interpolation sets.

    Subset sizes halve with each extra prefix bit: the full-family subset
    takes half the space, the reduced one a quarter, and the two
    mixed-partition subsets an eighth each.  Innermost points appear only
    in the first subset.
    """
    fam = build_tf_family(m)
    t, f = fam.t, fam.f
    sub1 = _pair_cells(
        [(0, 1), (0, 1), (2, 3), (2, 3)],
        [(t.full, f.full), (f.full, t.full), (t.full, f.full), (f.full, t.full)],
    )

    def mixed(ta: Constellation, fa: Constellation) -> list[Cell]:
        pairs = [(0, 2), (0, 2), (1, 3), (1, 3), (0, 3), (0, 3), (1, 2), (1, 2)]
        sets = [(ta, fa), (fa, ta)] * 4
        return _pair_cells(pairs, sets)

    sub2 = mixed(t.main, f.main)
    sub3 = mixed(t.ext, f.main)
    sub4 = mixed(t.main, f.ext)
    return SingleUseCodebook("esm3_tf", m, 4, sub1 + sub2 + sub3 + sub4)


def build_esm_type3(m: int) -> TwoUseCodebook:
    """Two-channel-use design pairing the reduced space with the rotated one."""
    return TwoUseCodebook("esm3", m, build_esm_type2(m), build_tf_space(m))


def build_codebook(scheme: str, m: int) -> Codebook:
    builders = {
        "msm": build_msm,
        "esm1": build_esm_type1,
        "esm2": build_esm_type2,
        "esm3": build_esm_type3,
    }
    key = scheme.lower()
    if key not in builders:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    return builders[key](m)


def antenna_combination_bits(n_t: int, n_a: int) -> int:
    """Address bits available from the active-antenna combination count."""
    if not 1 <= n_a <= n_t:
        raise ValueError("need 1 <= n_a <= n_t")
    return math.comb(n_t, n_a).bit_length() - 1


def build_esm_type1_general(n_t: int, n_a: int, m: int) -> SingleUseCodebook:
    """General construction: secondary constellation on half the active antennas.

    Combination and subset choices are the lexicographically first power-of-two
    block.  The (4, 2) case is served by the dedicated builder so that the
    word list matches it exactly.
    """
    if n_a % 2 or not 2 <= n_a <= n_t:
        raise ValueError("the construction requires an even number of active antennas")
    if (n_t, n_a) == (4, 2):
        return build_esm_type1(m)
    p = build_primary_qam(m)
    s = build_secondary(m)
    n = antenna_combination_bits(n_t, n_a)
    mbits = math.comb(n_a, n_a // 2).bit_length() - 1
    combos = list(combinations(range(n_t), n_a))[: 1 << n]
    subsets = list(combinations(range(n_a), n_a // 2))[: 1 << mbits]
    cells = []
    for combo in combos:
        for sub in subsets:
            sets = tuple(s if k in sub else p for k in range(n_a))
            cells.append(Cell(combo, sets))
    return SingleUseCodebook("esm1_general", m, n_t, cells)


def _even_weight_patterns(length: int, odd: bool = False) -> list[tuple[int, ...]]:
    want = 1 if odd else 0
    out = []
    for v in range(1 << length):
        bits = tuple((v >> (length - 1 - k)) & 1 for k in range(length))
        if sum(bits) % 2 == want:
            out.append(bits)
    return out


def _type2_8tx_na2(m: int) -> SingleUseCodebook:
    p = build_primary_subset(m)
    s = build_secondary(m)
    cells = []
    for pair in combinations(range(8), 2):
        cells.extend(_pair_cells([pair, pair], [(p, s), (s, p)]))
    # two copies of the 4-TX fourth subspace, one per antenna quad
    cells += _esm2_l4_cells(m, base=0)
    cells += _esm2_l4_cells(m, base=4)
    return SingleUseCodebook("esm2_8tx", m, 8, cells)


def _type2_8tx_na4(m: int) -> SingleUseCodebook:
    p_half = build_primary_subset(m)
    p_full = build_primary_qam(m)
    s = build_secondary(m)
    combos = list(combinations(range(8), 4))[:64]
    cells = []
    for combo in combos:
        for r in range(4):
            roles = [None] * 4
            roles[r] = p_full
            roles[(r + 1) % 4] = s
            roles[(r + 2) % 4] = s
            roles[(r + 3) % 4] = p_half
            cells.append(Cell(combo, tuple(roles)))
    return SingleUseCodebook("esm2_8tx", m, 8, cells)


def _type2_8tx_na6(m: int) -> SingleUseCodebook:
    p = build_primary_subset(m)
    s = build_secondary(m)
    cells = []
    for combo in combinations(range(8), 6):
        for pat in _even_weight_patterns(6):
            cells.append(Cell(combo, tuple(s if b else p for b in pat)))
    # four extra combination slots: one symbol from an extension set, the
    # other five from the main pair under a parity-constrained pattern
    if m == 16:
        specials = [(build_extension("q4"), False)]  # odd-lattice special: even S-count
    else:
        specials = [(build_extension("q8"), True), (build_extension("r8"), False)]
    for base_pair in [(0, 1), (2, 3), (4, 5), (6, 7)]:
        combo = tuple(k for k in range(8) if k not in base_pair)
        for qpos in range(4):
            for special, s_is_even_lattice in specials:
                for pat in _even_weight_patterns(5, odd=s_is_even_lattice):
                    sets = []
                    it = iter(pat)
                    for k in range(6):
                        sets.append(special if k == qpos else (s if next(it) else p))
                    cells.append(Cell(combo, tuple(sets)))
    return SingleUseCodebook("esm2_8tx", m, 8, cells)


def build_esm_type2_8tx(n_a: int, m: int) -> SingleUseCodebook:
    """Reduced-energy design on eight transmit antennas."""
    if m not in (16, 64):
        raise ValueError("m must be 16 or 64")
    if n_a == 2:
        return _type2_8tx_na2(m)
    if n_a == 4:
        return _type2_8tx_na4(m)
    if n_a == 6:
        return _type2_8tx_na6(m)
    raise ValueError("n_a must be 2, 4 or 6")


# ---------------------------------------------------------------------------
# constellation-family membership checks


def slot_family(c: Constellation) -> tuple[int, int]:
    """(interp_step, lattice_side) parity class of a constellation.

    The first flag is set for second-interpolation-step sets (mixed
    coordinate parity), the second for the even-lattice side.  Both are
    functions of coordinate parity alone; all design sets are parity-pure.
    """
    classes = {((p.re % 2), (p.im % 2)) for p in c.points}
    if len(classes) != 1:
        raise ValueError(f"constellation {c.name!r} mixes lattice parities")
    re_par, im_par = classes.pop()
    alpha = int(re_par != im_par)
    beta = int(im_par == 0)
    return alpha, beta


@dataclass(frozen=True)
class AlphaBetaReport:
    """Minimum Hamming distances of the per-slot family indicator codes."""

    alpha_min: int | None
    beta_min: int | None
    n_classes: int

    @property
    def alpha_ok(self) -> bool:
        return self.alpha_min is None or self.alpha_min >= 4

    @property
    def beta_ok(self) -> bool:
        return self.beta_min is None or self.beta_min >= 2

    @property
    def passed(self) -> bool:
        return self.alpha_ok and self.beta_ok


def _codeword_classes(cb: Codebook) -> list[tuple[tuple, tuple, tuple]]:
    """(pattern, alpha, beta) per cell/cell-product; symbols do not matter."""
    if isinstance(cb, SingleUseCodebook):
        out = []
        for cell in cb.cells:
            fams = [slot_family(s) for s in cell.sets]
            out.append(
                (
                    (cell.antennas,),
                    tuple(f[0] for f in fams),
                    tuple(f[1] for f in fams),
                )
            )
        return out
    ps_cls = _codeword_classes(cb.ps)
    tf_cls = _codeword_classes(cb.tf)
    out = []
    for order in (0, 1):
        first, second = (ps_cls, tf_cls) if order == 0 else (tf_cls, ps_cls)
        for p1, a1, b1 in first:
            for p2, a2, b2 in second:
                out.append((p1 + p2, a1 + a2, b1 + b2))
    return out


def _hamming(u: tuple, v: tuple) -> int:
    return sum(x != y for x, y in zip(u, v))


def verify_alpha_beta(cb: Codebook) -> AlphaBetaReport:
    """Check the Hamming-distance design rule of the family indicator codes.

    Over codeword pairs sharing the active-antenna pattern, the
    interpolation-step indicator sequences must differ in at least 4 slots
    whenever they differ, and — with those equal — the lattice-side
    indicator sequences must differ in at least 2.
    """
    classes = _codeword_classes(cb)
    alpha_min: int | None = None
    beta_min: int | None = None
    for i, (pat1, a1, b1) in enumerate(classes):
        for pat2, a2, b2 in classes[i:]:
            if pat1 != pat2:
                continue
            if a1 != a2:
                d = _hamming(a1, a2)
                alpha_min = d if alpha_min is None else min(alpha_min, d)
            elif b1 != b2:
                d = _hamming(b1, b2)
                beta_min = d if beta_min is None else min(beta_min, d)
    return AlphaBetaReport(alpha_min, beta_min, len(classes))
