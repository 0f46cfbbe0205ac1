"""Concrete endomorphisms used as semigroup generators.

All maps are immutable and expose the same small surface: ``apply`` for a
single point, ``apply_array`` for a vector of points, ``preimages`` and, when
the map is a bijection, ``inverse``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from .core import REAL_LINE, TAU_EXACT, DomainError, Space, finite_space


class UnsupportedDomain(DomainError):
    """A preimage is a whole interval rather than a finite set."""


class Endomorphism:
    space: Space

    def apply(self, x):
        raise NotImplementedError

    def apply_array(self, xs: np.ndarray) -> np.ndarray:
        out = np.empty(len(xs), dtype=object)
        for i, x in enumerate(xs):
            out[i] = self.apply(x)
        return out

    def preimages(self, y) -> list:
        raise NotImplementedError

    @property
    def invertible(self) -> bool:
        return False

    def inverse(self) -> "Endomorphism":
        raise DomainError(f"{self} is not a bijection")

    def __call__(self, x):
        return self.apply(x)


def _affine_solve(slope: float, intercept: float, y: float) -> list[float]:
    if slope == 0.0:
        if math.isclose(y, intercept, rel_tol=TAU_EXACT, abs_tol=TAU_EXACT):
            raise UnsupportedDomain(f"preimage of {y} under a constant branch is an interval")
        return []
    return [(y - intercept) / slope]


@dataclass(frozen=True)
class Affine(Endomorphism):
    slope: float
    intercept: float = 0.0
    space: Space = REAL_LINE

    def apply(self, x):
        return self.slope * x + self.intercept

    def apply_array(self, xs):
        return self.slope * np.asarray(xs, dtype=float) + self.intercept

    def preimages(self, y):
        return _affine_solve(self.slope, self.intercept, y)

    @property
    def invertible(self):
        return self.slope != 0.0

    def inverse(self):
        if not self.invertible:
            super().inverse()
        return Affine(1.0 / self.slope, -self.intercept / self.slope)

    def to_dict(self):
        return {"type": "affine", "slope": self.slope, "intercept": self.intercept}


@dataclass(frozen=True)
class PiecewisePsi(Endomorphism):
    """x -> a*x + c for x <= 0, b*x + d for x > 0."""

    a: float
    b: float
    c: float = 0.0
    d: float = 0.0
    space: Space = REAL_LINE

    def apply(self, x):
        return self.a * x + self.c if x <= 0 else self.b * x + self.d

    def apply_array(self, xs):
        xs = np.asarray(xs, dtype=float)
        return np.where(xs <= 0, self.a * xs + self.c, self.b * xs + self.d)

    def preimages(self, y):
        left = [x for x in _affine_solve(self.a, self.c, y) if x <= 0]
        right = [x for x in _affine_solve(self.b, self.d, y) if x > 0]
        return sorted(left + right)

    @property
    def continuous(self) -> bool:
        return self.c == self.d

    @property
    def invertible(self):
        return self.c == self.d and self.a * self.b > 0

    def inverse(self):
        if not self.invertible:
            super().inverse()
        if self.c == 0.0:
            if self.a > 0:
                return PiecewisePsi(1.0 / self.a, 1.0 / self.b)
            # decreasing: the negative half maps onto [0, inf)
            return PiecewisePsi(1.0 / self.b, 1.0 / self.a)
        return InverseMap(self)

    def to_dict(self):
        return {"type": "psi", "a": self.a, "b": self.b, "c": self.c, "d": self.d}


@dataclass(frozen=True)
class InverseMap(Endomorphism):
    """Inverse of a bijection whose inverse has no closed form in this module."""

    base: Endomorphism

    @property
    def space(self):
        return self.base.space

    def apply(self, x):
        pre = self.base.preimages(x)
        if len(pre) != 1:
            raise DomainError(f"{self.base} is not invertible at {x!r}")
        return pre[0]

    def apply_array(self, xs):
        return np.array([self.apply(x) for x in xs], dtype=float if self.space.is_real else object)

    def preimages(self, y):
        return [self.base.apply(y)]

    @property
    def invertible(self):
        return True

    def inverse(self):
        return self.base

    def to_dict(self):
        return {"type": "inverse", "of": self.base.to_dict()}


@dataclass(frozen=True)
class FiniteTable(Endomorphism):
    table: tuple[tuple[Hashable, Hashable], ...]

    def __post_init__(self):
        labels = [k for k, _ in self.table]
        space = finite_space(labels)
        for _, v in self.table:
            if v not in space.labels:
                raise DomainError(f"image {v!r} outside the label set {space}")
        object.__setattr__(self, "_map", dict(self.table))

    @classmethod
    def from_mapping(cls, mapping: dict) -> "FiniteTable":
        return cls(tuple(mapping.items()))

    @property
    def space(self) -> Space:
        return finite_space([k for k, _ in self.table])

    def apply(self, x):
        try:
            return self._map[x]
        except KeyError:
            raise DomainError(f"{x!r} is not a label of {self.space}") from None

    def preimages(self, y):
        return [k for k, v in self.table if v == y]

    @property
    def invertible(self):
        return len(set(self._map.values())) == len(self._map)

    def inverse(self):
        if not self.invertible:
            super().inverse()
        inv = {v: k for k, v in self.table}
        return FiniteTable(tuple((k, inv[k]) for k, _ in self.table))

    def to_dict(self):
        return {"type": "table", "table": [[k, v] for k, v in self.table]}


@dataclass(frozen=True)
class CompositionWord(Endomorphism):
    """g_{i_n} o ... o g_{i_1}; ``components`` lists g_{i_1} first."""

    components: tuple[Endomorphism, ...]

    def __post_init__(self):
        if not self.components:
            raise DomainError("a composition word must be non-empty")

    @property
    def space(self):
        return self.components[0].space

    def apply(self, x):
        for g in self.components:
            x = g.apply(x)
        return x

    def apply_array(self, xs):
        for g in self.components:
            xs = g.apply_array(xs)
        return xs

    def preimages(self, y):
        current = [y]
        for g in reversed(self.components):
            nxt = []
            for p in current:
                nxt.extend(g.preimages(p))
            current = nxt
        if self.space.is_real:
            return sorted(set(current))
        return list(dict.fromkeys(current))

    @property
    def invertible(self):
        return all(g.invertible for g in self.components)

    def inverse(self):
        if not self.invertible:
            super().inverse()
        return CompositionWord(tuple(g.inverse() for g in reversed(self.components)))

    def to_dict(self):
        return {"type": "composition", "components": [g.to_dict() for g in self.components]}


def psi(a: float, b: float, c: float = 0.0, d: float | None = None) -> PiecewisePsi:
    return PiecewisePsi(a, b, c, c if d is None else d)


def cyclic_g() -> FiniteTable:
    """g(x) = (x + 1 mod 3) + 1 on {1, 2, 3}: a 3-cycle 1 -> 3 -> 2 -> 1."""
    return FiniteTable.from_mapping({x: (x + 1) % 3 + 1 for x in (1, 2, 3)})


def nearest_preimage(g: Endomorphism, y, guide):
    """Preimage of y under g closest to ``guide``; ties go to the smallest value.

    Returns None when y has no preimage.
    """
    pre = g.preimages(y)
    if not pre:
        return None
    space = g.space
    if space.is_real:
        return min(pre, key=lambda p: (abs(p - guide), p))
    return min(pre, key=lambda p: (space.distance(p, guide), space.labels.index(p)))


def map_from_dict(spec: dict, space: Space | None = None) -> Endomorphism:
    kind = spec.get("type")
    if kind == "affine":
        return Affine(float(spec["slope"]), float(spec.get("intercept", 0.0)))
    if kind == "psi":
        c = float(spec.get("c", 0.0))
        return PiecewisePsi(float(spec["a"]), float(spec["b"]), c, float(spec.get("d", c)))
    if kind == "table":
        return FiniteTable(tuple((k, v) for k, v in spec["table"]))
    if kind == "cyclic-g":
        return cyclic_g()
    if kind == "inverse":
        return map_from_dict(spec["of"], space).inverse()
    if kind == "composition":
        return CompositionWord(tuple(map_from_dict(s, space) for s in spec["components"]))
    raise DomainError(f"unknown map type {kind!r}")


def sample_grid(space: Space, n: int = 1000, lo: float = -10.0, hi: float = 10.0) -> Sequence:
    """Sample points used for pointwise comparisons of maps."""
    if space.is_real:
        return np.linspace(lo, hi, n)
    return list(space.labels)
