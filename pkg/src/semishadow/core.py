"""Metric spaces and set-valued distances.

Two kinds of space are supported: the real line with the absolute-value
metric, and a finite label set with the 0/1 discrete metric.  Points on the
real line are floats; points of a finite space are its labels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Hashable, Sequence

import numpy as np

# Equality tolerance used by every validator in the package.  Comparisons are
# scaled by max(1, |a|, |b|) so that large orbit values are not flagged for
# round-off.
TAU_EXACT = 1e-9


class DomainError(ValueError):
    """Raised when an operation is called outside its domain."""


@dataclass(frozen=True)
class Space:
    kind: str  # "real" | "finite"
    labels: tuple[Hashable, ...] = ()

    def __post_init__(self):
        if self.kind not in ("real", "finite"):
            raise DomainError(f"unknown space kind {self.kind!r}")
        if self.kind == "finite":
            if not self.labels:
                raise DomainError("finite space needs at least one label")
            if len(set(self.labels)) != len(self.labels):
                raise DomainError("duplicate labels in finite space")
        elif self.labels:
            raise DomainError("the real line carries no labels")

    @property
    def is_real(self) -> bool:
        return self.kind == "real"

    def contains(self, x: Any) -> bool:
        if self.is_real:
            return isinstance(x, (int, float, np.integer, np.floating)) and math.isfinite(x)
        return x in self.labels

    def check(self, x: Any):
        if not self.contains(x):
            raise DomainError(f"{x!r} is not a point of {self}")
        return float(x) if self.is_real else x

    def distance(self, x, y) -> float:
        if self.is_real:
            return abs(float(x) - float(y))
        return 0.0 if x == y else 1.0

    def distances(self, xs, ys) -> np.ndarray:
        """Elementwise distances between two equally long point arrays."""
        if self.is_real:
            return np.abs(np.asarray(xs, dtype=float) - np.asarray(ys, dtype=float))
        xs = np.asarray(xs, dtype=object)
        ys = np.asarray(ys, dtype=object)
        return (xs != ys).astype(float)

    def as_array(self, points: Sequence) -> np.ndarray:
        if self.is_real:
            arr = np.asarray(points, dtype=float)
            if arr.size and not np.all(np.isfinite(arr)):
                raise DomainError("real points must be finite")
            return arr
        arr = np.empty(len(points), dtype=object)
        for i, p in enumerate(points):
            if p not in self.labels:
                raise DomainError(f"{p!r} is not a label of {self}")
            arr[i] = p
        return arr

    def scale(self, *values) -> float:
        """Magnitude used to scale TAU_EXACT for comparisons of these values."""
        if not self.is_real:
            return 1.0
        return max([1.0] + [abs(float(v)) for v in values])

    def close(self, x, y) -> bool:
        return self.distance(x, y) <= TAU_EXACT * self.scale(x, y)

    def __str__(self):
        if self.is_real:
            return "R"
        return "{" + ", ".join(map(str, self.labels)) + "}"


REAL_LINE = Space("real")


def finite_space(labels: Sequence[Hashable]) -> Space:
    return Space("finite", tuple(labels))


def _checked(points, space: Space) -> list:
    points = list(points)
    if not points:
        raise DomainError("empty point set")
    return [space.check(p) for p in points]


def set_distance_argmin(A, B, space: Space = REAL_LINE) -> tuple[float, tuple[int, int]]:
    """Smallest pairwise distance between two finite sets and the index pair
    achieving it (first index of A, then of B, wins ties)."""
    A = _checked(A, space)
    B = _checked(B, space)
    best, pair = math.inf, (0, 0)
    for i, a in enumerate(A):
        for j, b in enumerate(B):
            d = space.distance(a, b)
            if d < best:
                best, pair = d, (i, j)
    return best, pair


def set_distance(A, B, space: Space = REAL_LINE) -> float:
    """inf over a in A, b in B of rho(a, b).  Not a metric."""
    return set_distance_argmin(A, B, space)[0]


def hausdorff_distance(A, B, space: Space = REAL_LINE, variant: str = "standard") -> float:
    """Hausdorff distance between finite sets.

    ``variant="standard"`` takes the max of the two one-sided sup-inf values;
    ``variant="min"`` takes their min (also accepted under the contract
    name "paper-literal").
    """
    A = _checked(A, space)
    B = _checked(B, space)
    a_to_b = max(min(space.distance(a, b) for b in B) for a in A)
    b_to_a = max(min(space.distance(a, b) for a in A) for b in B)
    if variant == "standard":
        return max(a_to_b, b_to_a)
    if variant in ("min", "paper-literal"):
        return min(a_to_b, b_to_a)
    raise DomainError(f"unknown Hausdorff variant {variant!r}")
