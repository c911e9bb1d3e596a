"""Finite atomic measures on the (Berkovich) projective line."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .fields import INF, is_inf

__all__ = ["DiscreteMeasure", "CINF"]

# point at infinity inside complex arrays
CINF = complex(np.inf, 0.0)


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Weighted atoms.

    Archimedean measures hold ``points`` as a complex ndarray (``CINF`` marks
    infinity) and float ``masses``.  Exact measures hold tuples of points
    (``Fraction``, ``INF`` or ``BerkPoint``) and ``Fraction`` masses.
    """

    points: object
    masses: object

    def __post_init__(self):
        if isinstance(self.points, np.ndarray):
            pts = np.asarray(self.points, dtype=complex)
            ms = np.asarray(self.masses, dtype=float)
            if pts.shape != ms.shape:
                raise ValueError("points and masses differ in length")
            if np.any(ms < 0):
                raise ValueError("negative mass")
            object.__setattr__(self, "points", pts)
            object.__setattr__(self, "masses", ms)
        else:
            pts = tuple(self.points)
            ms = tuple(Fraction(m) for m in self.masses)
            if len(pts) != len(ms):
                raise ValueError("points and masses differ in length")
            if any(m < 0 for m in ms):
                raise ValueError("negative mass")
            object.__setattr__(self, "points", pts)
            object.__setattr__(self, "masses", ms)

    @classmethod
    def uniform(cls, points) -> DiscreteMeasure:
        pts = np.asarray(points, dtype=complex)
        return cls(pts, np.full(len(pts), 1.0 / len(pts)))

    @classmethod
    def dirac(cls, point, mass=1) -> DiscreteMeasure:
        return cls((point,), (Fraction(mass),))

    @property
    def is_archimedean(self) -> bool:
        return isinstance(self.points, np.ndarray)

    @property
    def total_mass(self):
        if self.is_archimedean:
            return float(self.masses.sum())
        return sum(self.masses, Fraction(0))

    def __len__(self):
        return len(self.points)

    def atoms(self):
        return list(zip(self.points, self.masses))

    def finite_part(self) -> DiscreteMeasure:
        if self.is_archimedean:
            keep = ~np.isinf(self.points.real)
            return DiscreteMeasure(self.points[keep], self.masses[keep])
        keep = [(z, m) for z, m in self.atoms() if not is_inf(z)]
        return DiscreteMeasure([z for z, _ in keep], [m for _, m in keep])

    def mass_at_infinity(self):
        if self.is_archimedean:
            return float(self.masses[np.isinf(self.points.real)].sum())
        return sum((m for z, m in self.atoms() if z is INF), Fraction(0))

    def merged(self) -> DiscreteMeasure:
        """Combine equal atoms (exact measures only)."""
        if self.is_archimedean:
            return self
        acc = Counter()
        order = []
        for z, m in self.atoms():
            if z not in acc:
                order.append(z)
            acc[z] += m
        return DiscreteMeasure(order, [acc[z] for z in order])

    def scaled(self, c) -> DiscreteMeasure:
        if self.is_archimedean:
            return DiscreteMeasure(self.points, self.masses * float(c))
        return DiscreteMeasure(self.points, [m * Fraction(c) for m in self.masses])

    def __repr__(self):
        return f"DiscreteMeasure({len(self)} atoms, mass={self.total_mass})"
