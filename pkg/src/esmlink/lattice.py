"""Exact integer-lattice constellation points and distance/energy arithmetic.

All constellation geometry lives on the integer grid where adjacent M-QAM
points differ by 2 (half the QAM minimum distance per axis).  Energies are
exact rationals and squared distances exact integers, so every designed
value can be checked with equality rather than a floating tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple

import numpy as np


class LatticePoint(NamedTuple):
    re: int
    im: int

    def energy(self) -> int:
        return self.re * self.re + self.im * self.im

    def __neg__(self) -> "LatticePoint":
        return LatticePoint(-self.re, -self.im)

    def rot90(self) -> "LatticePoint":
        """Rotate by pi/2 (multiply by i)."""
        return LatticePoint(-self.im, self.re)

    def as_complex(self) -> complex:
        return complex(self.re, self.im)


def sq_dist(p: LatticePoint, q: LatticePoint) -> int:
    dr = p.re - q.re
    di = p.im - q.im
    return dr * dr + di * di


@dataclass(frozen=True)
class Constellation:
    """Named, ordered set of lattice points.

    Points are stored sorted lexicographically by (re, im); that order is
    the symbol bit labeling used everywhere (CSV dumps, codeword indexing).
    """

    name: str
    points: tuple[LatticePoint, ...]
    _complex: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pts = tuple(sorted(LatticePoint(*p) for p in self.points))
        if len(set(pts)) != len(pts):
            raise ValueError(f"duplicate points in constellation {self.name!r}")
        object.__setattr__(self, "points", pts)
        arr = np.array([p.as_complex() for p in pts], dtype=np.complex128)
        arr.setflags(write=False)
        object.__setattr__(self, "_complex", arr)

    def __len__(self) -> int:
        return len(self.points)

    def __contains__(self, p) -> bool:
        return LatticePoint(*p) in set(self.points)

    def __getitem__(self, i: int) -> LatticePoint:
        return self.points[i]

    def as_complex(self) -> np.ndarray:
        """Points in labeling order as a read-only complex array."""
        return self._complex

    def as_int_array(self) -> np.ndarray:
        return np.array([[p.re, p.im] for p in self.points], dtype=np.int64)

    def is_negation_symmetric(self) -> bool:
        s = set(self.points)
        return all(-p in s for p in self.points)

    def rotated(self, name: str) -> "Constellation":
        """The constellation multiplied pointwise by i."""
        return Constellation(name, tuple(p.rot90() for p in self.points))


def union(name: str, *parts: Constellation) -> Constellation:
    pts: list[LatticePoint] = []
    for c in parts:
        pts.extend(c.points)
    return Constellation(name, tuple(pts))


def avg_energy(c: Constellation) -> Fraction:
    """Exact mean point energy."""
    if len(c) == 0:
        raise ValueError("empty constellation")
    return Fraction(sum(p.energy() for p in c.points), len(c))


def min_energy(c: Constellation) -> int:
    return min(p.energy() for p in c.points)


def min_sq_dist(c: Constellation) -> int:
    """Exact minimum squared distance over distinct point pairs."""
    pts = c.points
    if len(pts) < 2:
        raise ValueError("need at least two points")
    return min(
        sq_dist(pts[i], pts[j]) for i in range(len(pts)) for j in range(i + 1, len(pts))
    )


def cross_min_sq_dist(c1: Constellation, c2: Constellation) -> int:
    """Exact minimum squared distance between points of two constellations."""
    if len(c1) == 0 or len(c2) == 0:
        raise ValueError("empty constellation")
    return min(sq_dist(p, q) for p in c1.points for q in c2.points)


def points_from_pairs(pairs: Iterable[tuple[int, int]]) -> tuple[LatticePoint, ...]:
    return tuple(LatticePoint(r, i) for r, i in pairs)
