"""Construction of every constellation used by the ESM codebook designs.

The family layout on the half-grid lattice:

* primary M-QAM and its low-energy half subset sit on odd/odd coordinates,
* the secondary interpolated set sits on even/even coordinates,
* the two second-step interpolated sets sit on even/odd and odd/even
  coordinates (one is the pi/2 rotation of the other),
* three small extension sets (q4, q8, r8) fill out the fourth subspace of
  the reduced-energy design.

Coordinate parity alone therefore fixes the squared-distance floors 4 / 2 / 1
between same-family, first-step and second-step sets.
"""

from __future__ import annotations

from dataclasses import dataclass

from .lattice import Constellation, points_from_pairs, union

_SUPPORTED_QAM = (4, 16, 64)


def _negation_closure(pairs) -> list[tuple[int, int]]:
    out = []
    for r, i in pairs:
        out.append((r, i))
        out.append((-r, -i))
    return out


def _pm_grid(pairs) -> list[tuple[int, int]]:
    """Expand +/-a +/-bi shorthand."""
    out = set()
    for r, i in pairs:
        for sr in (1, -1):
            for si in (1, -1):
                out.add((sr * r, si * i))
    return sorted(out)


def build_primary_qam(m: int) -> Constellation:
    """Square M-QAM on odd integer coordinates, adjacent points 2 apart."""
    if m not in _SUPPORTED_QAM:
        raise ValueError(f"unsupported QAM size {m}; expected one of {_SUPPORTED_QAM}")
    k = {4: 1, 16: 2, 64: 4}[m]
    coords = range(-(2 * k - 1), 2 * k, 2)
    return Constellation(f"qam{m}", points_from_pairs((r, i) for r in coords for i in coords))


def build_secondary(m: int) -> Constellation:
    """Half-size secondary set interpolated at the even/even grid centers."""
    if m == 16:
        pts = _pm_grid([(2, 2)]) + _negation_closure([(2, 0), (0, 2)])
        return Constellation("s8", points_from_pairs(pts))
    if m == 64:
        pts = (
            _pm_grid([(2, 2)])
            + _negation_closure([(2, 0), (0, 2)])
            + _negation_closure([(4, 0), (0, 4), (6, 0), (0, 6)])
            + _pm_grid([(4, 2), (4, 4), (2, 4)])
            + _negation_closure([(2, 6), (6, -2)])
        )
        return Constellation("s32", points_from_pairs(pts))
    raise ValueError(f"unsupported modulation size {m}; expected 16 or 64")


def build_primary_subset(m: int) -> Constellation:
    """The M/2 lowest-energy points of the primary constellation."""
    if m == 16:
        pts = _pm_grid([(1, 1)]) + [(3, 1), (1, -3), (-3, -1), (-1, 3)]
        return Constellation("p8", points_from_pairs(pts))
    if m == 64:
        # conventional cross 32QAM: the 6x6 odd grid without its corners
        pts = [
            (r, i)
            for r in range(-5, 6, 2)
            for i in range(-5, 6, 2)
            if not (abs(r) == 5 and abs(i) == 5)
        ]
        return Constellation("p32", points_from_pairs(pts))
    raise ValueError(f"unsupported modulation size {m}; expected 16 or 64")


_EXTENSIONS = {
    "q4": [(1, 3), (3, -1), (-1, -3), (-3, 1)],
    # the printed q8 listing is unusable (duplicates, 6 distinct points);
    # this reconstruction is negation-symmetric, even-lattice, disjoint
    # from s32 and averages exactly 46
    "q8": _negation_closure([(4, 6), (6, -4), (6, 2), (2, -6)]),
    "r8": _pm_grid([(5, 5)]) + _negation_closure([(1, 7), (7, -1)]),
}


def build_extension(name: str) -> Constellation:
    """One of the three small fourth-subspace sets: q4, q8 or r8."""
    key = name.lower()
    if key not in _EXTENSIONS:
        raise ValueError(f"unknown extension constellation {name!r}")
    return Constellation(key, points_from_pairs(_EXTENSIONS[key]))


@dataclass(frozen=True)
class RotatedFamily:
    """One of the two second-interpolation-step constellations.

    ``full`` is the whole M/2-point set; ``main`` holds its M/4 lowest-energy
    points excluding the innermost ``core`` pair, ``ext`` the minimum-energy
    M/8-point extension of ``main``, and ``rem`` the remaining points
    (which include ``core``).
    """

    full: Constellation
    main: Constellation
    ext: Constellation
    rem: Constellation
    core: Constellation


@dataclass(frozen=True)
class TfPair:
    """The mixed-parity constellation pair; t = i * f pointwise."""

    t: RotatedFamily
    f: RotatedFamily


_F16_PARTS = {
    "main": _pm_grid([(1, 2)]),
    "ext": _negation_closure([(3, 0)]),
    "rem": _negation_closure([(1, 0)]),
}

_F64_PARTS = {
    "main": _pm_grid([(1, 2), (3, 2), (1, 4)]) + _negation_closure([(3, 0), (5, 0)]),
    "ext": _pm_grid([(3, 4), (5, 2)]),
    "rem": _negation_closure([(1, 0)]) + _pm_grid([(1, 6)]) + [(-5, 4), (5, -4)],
}


def build_tf_family(m: int) -> TfPair:
    """Both second-step sets with their size M/4, M/8 and remainder parts.

    The odd/even-parity set is constructed from its explicit listings; the
    even/odd-parity set is its pointwise pi/2 rotation, partition by
    partition (the two printed listings disagree for M=64 and the rotation
    relation is what the design actually relies on).
    """
    if m == 16:
        parts, half = _F16_PARTS, 8
    elif m == 64:
        parts, half = _F64_PARTS, 32
    else:
        raise ValueError(f"unsupported modulation size {m}; expected 16 or 64")

    f_main = Constellation(f"f{half}_main", points_from_pairs(parts["main"]))
    f_ext = Constellation(f"f{half}_ext", points_from_pairs(parts["ext"]))
    f_rem = Constellation(f"f{half}_rem", points_from_pairs(parts["rem"]))
    f_full = union(f"f{half}", f_main, f_ext, f_rem)
    f_core = Constellation(f"f{half}_core", points_from_pairs([(1, 0), (-1, 0)]))

    t_main = f_main.rotated(f"t{half}_main")
    t_ext = f_ext.rotated(f"t{half}_ext")
    t_rem = f_rem.rotated(f"t{half}_rem")
    t_full = union(f"t{half}", t_main, t_ext, t_rem)
    t_core = Constellation(f"t{half}_core", points_from_pairs([(0, 1), (0, -1)]))

    t = RotatedFamily(t_full, t_main, t_ext, t_rem, t_core)
    f = RotatedFamily(f_full, f_main, f_ext, f_rem, f_core)
    return TfPair(t, f)


def named_constellations() -> dict[str, Constellation]:
    """All individually constructible constellations, keyed by name."""
    out: dict[str, Constellation] = {}
    for size in _SUPPORTED_QAM:
        c = build_primary_qam(size)
        out[c.name] = c
    for size in (16, 64):
        for c in (build_secondary(size), build_primary_subset(size)):
            out[c.name] = c
        tf = build_tf_family(size)
        for fam in (tf.t, tf.f):
            for c in (fam.full, fam.main, fam.ext, fam.rem, fam.core):
                out[c.name] = c
    for name in _EXTENSIONS:
        out[name] = build_extension(name)
    return out
