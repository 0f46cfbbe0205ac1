"""Semigroup actions, trajectories and pseudo-trajectories.

Sequences live on a finite integer window ``[t_min, t_max]``.  A step ``t``
is the transition from time ``t`` to ``t + 1``; the gap of a pseudo-trajectory
at step ``t`` is ``rho(G y_t, y_{t+1})``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

import numpy as np

from .core import TAU_EXACT, DomainError, Space
from .maps import CompositionWord, Endomorphism, sample_grid


class InvalidTrajectory(ValueError):
    """A claimed true trajectory violates x_{t+1} = g(x_t) somewhere."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


@dataclass(frozen=True)
class GeneratorSet:
    space: Space
    generators: tuple[tuple[str, Endomorphism], ...]

    def __post_init__(self):
        gens = tuple((str(i), g) for i, g in self.generators)
        if not gens:
            raise DomainError("a generator set must be non-empty")
        ids = [i for i, _ in gens]
        if len(set(ids)) != len(ids):
            raise DomainError("duplicate generator ids")
        for i, g in gens:
            if g.space != self.space:
                raise DomainError(f"generator {i} acts on {g.space}, not {self.space}")
        object.__setattr__(self, "generators", gens)

    @classmethod
    def of(cls, space: Space, mapping: dict[str, Endomorphism] | Sequence) -> "GeneratorSet":
        items = mapping.items() if isinstance(mapping, dict) else mapping
        return cls(space, tuple(items))

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(i for i, _ in self.generators)

    @property
    def maps(self) -> tuple[Endomorphism, ...]:
        return tuple(g for _, g in self.generators)

    def __getitem__(self, gid: str) -> Endomorphism:
        for i, g in self.generators:
            if i == gid:
                return g
        raise KeyError(gid)

    def __len__(self):
        return len(self.generators)

    def index(self, gid: str) -> int:
        return self.ids.index(gid)

    # a semigroup may use any generator at any step
    def allowed(self, t: int) -> tuple[str, ...]:
        return self.ids

    @property
    def generator_set(self) -> "GeneratorSet":
        return self


def semigroup_image(G: GeneratorSet, x) -> list:
    """Gx: images of x under every generator, duplicates removed, generator order."""
    x = G.space.check(x)
    out = []
    for g in G.maps:
        y = g.apply(x)
        if not any(G.space.close(y, z) if G.space.is_real else y == z for z in out):
            out.append(y)
    return out


def _validate_steps(G: GeneratorSet, points: np.ndarray, word: Sequence[str], t_min: int):
    space = G.space
    src, dst = points[:-1], points[1:]
    word_arr = np.asarray(word, dtype=object)
    for gid in set(word):
        try:
            g = G[gid]
        except KeyError:
            raise InvalidTrajectory(f"unknown generator id {gid!r}") from None
        mask = word_arr == gid
        images = g.apply_array(src[mask])
        d = space.distances(images, dst[mask])
        if space.is_real:
            scale = np.maximum(1.0, np.maximum(np.abs(images), np.abs(dst[mask].astype(float))))
            bad = d > TAU_EXACT * scale
        else:
            bad = d > 0
        if np.any(bad):
            step = int(np.flatnonzero(mask)[np.argmax(bad)]) + t_min
            raise InvalidTrajectory(f"step {step} breaks x_(t+1) = {gid}(x_t)", step=step)


@dataclass(frozen=True, eq=False)
class PseudoTrajectory:
    space: Space
    t_min: int
    points: np.ndarray
    word: tuple[str, ...] | None = None

    def __post_init__(self):
        pts = self.space.as_array(self.points)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "t_min", int(self.t_min))
        if len(pts) < 2:
            raise DomainError("a pseudo-trajectory needs at least two points")
        if self.word is not None:
            word = tuple(str(w) for w in self.word)
            if len(word) != len(pts) - 1:
                raise DomainError("reference word must have one id per step")
            object.__setattr__(self, "word", word)

    @property
    def t_max(self) -> int:
        return self.t_min + len(self.points) - 1

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.t_min, self.t_max + 1)

    def __len__(self):
        return len(self.points)

    def at(self, t: int):
        return self.points[t - self.t_min]

    def window(self, t0: int, t1: int) -> "PseudoTrajectory":
        i0, i1 = t0 - self.t_min, t1 - self.t_min + 1
        word = None if self.word is None else self.word[i0:i1 - 1]
        return PseudoTrajectory(self.space, t0, self.points[i0:i1], word)

    def reversed(self) -> "PseudoTrajectory":
        """y''_k := y_{-k} on the mirrored window."""
        return PseudoTrajectory(self.space, -self.t_max, self.points[::-1].copy())

    def same_as(self, other) -> bool:
        return (self.t_min == other.t_min and len(self) == len(other)
                and bool(np.all(self.points == other.points)))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """A true trajectory: validated against its generator set on construction."""

    generators: GeneratorSet
    t_min: int
    points: np.ndarray
    word: tuple[str, ...] = ()

    def __post_init__(self):
        G = self.generators
        pts = G.space.as_array(self.points)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "t_min", int(self.t_min))
        word = tuple(str(w) for w in self.word)
        if len(pts) < 1:
            raise DomainError("empty trajectory")
        if len(word) != len(pts) - 1:
            raise InvalidTrajectory("word must have one generator id per step")
        object.__setattr__(self, "word", word)
        _validate_steps(G, pts, word, self.t_min)

    @property
    def space(self) -> Space:
        return self.generators.space

    @property
    def t_max(self) -> int:
        return self.t_min + len(self.points) - 1

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.t_min, self.t_max + 1)

    def __len__(self):
        return len(self.points)

    def at(self, t: int):
        return self.points[t - self.t_min]

    def as_pseudo(self) -> PseudoTrajectory:
        return PseudoTrajectory(self.space, self.t_min, self.points, self.word or None)

    def window(self, t0: int, t1: int) -> "Trajectory":
        i0, i1 = t0 - self.t_min, t1 - self.t_min + 1
        return Trajectory(self.generators, t0, self.points[i0:i1], self.word[i0:i1 - 1])


def validate_trajectory(G: GeneratorSet, points, word, t_min: int = 0) -> None:
    """Universal validator; raises InvalidTrajectory on the first bad step."""
    pts = G.space.as_array(points)
    if len(word) != len(pts) - 1:
        raise InvalidTrajectory("word must have one generator id per step")
    _validate_steps(G, pts, tuple(word), t_min)


def step_gaps(system, y: PseudoTrajectory) -> tuple[np.ndarray, list[str]]:
    """Gap and best generator at every step of y.

    ``system`` is a GeneratorSet (every generator allowed) or anything with
    ``generator_set`` and ``allowed(t)`` (e.g. a fixed non-autonomous branch).
    Ties go to the lowest generator index.
    """
    G = system.generator_set
    space = G.space
    src, dst = y.points[:-1], y.points[1:]
    n = len(src)
    dist = np.full((len(G), n), np.inf)
    for k, g in enumerate(G.maps):
        dist[k] = space.distances(g.apply_array(src), dst)
    if system is not G:
        allowed = np.zeros_like(dist, dtype=bool)
        for s in range(n):
            for gid in system.allowed(y.t_min + s):
                allowed[G.index(gid), s] = True
        dist = np.where(allowed, dist, np.inf)
    best = np.argmin(dist, axis=0)
    gaps = dist[best, np.arange(n)]
    return gaps, [G.ids[k] for k in best]


def is_positive_gap(space: Space, gap: float, scale: float = 1.0) -> bool:
    return gap > TAU_EXACT * max(1.0, scale)


def _gap_scales(y: PseudoTrajectory) -> np.ndarray:
    if not y.space.is_real:
        return np.ones(len(y) - 1)
    p = np.abs(y.points.astype(float))
    return np.maximum(1.0, np.maximum(p[:-1], p[1:]))


def perturbation_mask(system, y: PseudoTrajectory) -> tuple[np.ndarray, np.ndarray, list[str]]:
    gaps, best = step_gaps(system, y)
    if y.space.is_real:
        mask = gaps > TAU_EXACT * _gap_scales(y)
    else:
        mask = gaps > 0
    return mask, gaps, best


@dataclass(frozen=True)
class GapProfile:
    """Perturbation moments and their amplitudes, sorted by time."""

    moments: tuple[tuple[int, float], ...] = ()
    gap_max: float = float("inf")

    def __post_init__(self):
        times = [t for t, _ in self.moments]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise DomainError("moments must be strictly increasing")
        for _, g in self.moments:
            if not 0 < g <= self.gap_max:
                raise DomainError(f"amplitude {g} outside (0, gap_max]")

    @property
    def times(self) -> list[int]:
        return [t for t, _ in self.moments]

    @property
    def amplitudes(self) -> list[float]:
        return [g for _, g in self.moments]

    def __len__(self):
        return len(self.moments)


def gap_profile(system, y: PseudoTrajectory, gap_max: float = float("inf")) -> GapProfile:
    """The moments of perturbation of y; amplitudes below tolerance count as zero."""
    mask, gaps, _ = perturbation_mask(system, y)
    idx = np.flatnonzero(mask)
    return GapProfile(tuple((int(y.t_min + i), float(gaps[i])) for i in idx), gap_max)


def cesaro_window(n: int, k_min: int | None = None) -> tuple[int, int, int]:
    """Center index, k_min and k_max of symmetric averages over a length-n array."""
    c = (n - 1) // 2
    k_max = min(c, n - 1 - c)
    if k_min is None:
        k_min = (n + 1) // 4
    k_min = min(max(0, k_min), k_max)
    return c, k_min, k_max


def max_cesaro(values, k_min: int | None = None) -> tuple[float, int, int]:
    """max over k in [k_min, k_max] of (1/(2k+1)) sum_{i=-k}^{k} v_{c+i}.

    Finite-window stand-in for the limsup of symmetric averages; the center c
    is the middle of the array.  Returns (value, k_min, k_max).
    """
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return 0.0, 0, 0
    c, k_min, k_max = cesaro_window(len(v), k_min)
    csum = np.concatenate([[0.0], np.cumsum(v)])
    ks = np.arange(k_min, k_max + 1)
    sums = csum[c + ks + 1] - csum[c - ks]
    return float(np.max(sums / (2 * ks + 1))), int(k_min), int(k_max)


@dataclass(frozen=True)
class PseudoClass:
    is_U: bool
    is_A: bool
    is_S: bool
    max_gap: float
    max_average: float
    k_min: int
    k_max: int


def classify_pseudo(y: PseudoTrajectory, system, eps: float, k_min: int | None = None) -> PseudoClass:
    if not eps > 0:
        raise DomainError("eps must be positive")
    mask, gaps, _ = perturbation_mask(system, y)
    gaps = np.where(mask, gaps, 0.0)
    if k_min is None:
        k_min = len(y) // 4
    avg, k0, k1 = max_cesaro(gaps, k_min)
    return PseudoClass(
        is_U=bool(np.all(gaps <= eps)),
        is_A=avg <= eps,
        is_S=int(mask.sum()) == 1,
        max_gap=float(gaps.max()),
        max_average=avg,
        k_min=k0,
        k_max=k1,
    )


def check_dictionary(old: GeneratorSet, new: GeneratorSet, dictionary: dict[str, Sequence[str]],
                     grid: Iterable | None = None) -> None:
    """Verify that every new generator equals its word over the old ones."""
    pts = sample_grid(old.space) if grid is None else list(grid)
    pts = old.space.as_array(pts)
    for hid, h in new.generators:
        if hid not in dictionary or not dictionary[hid]:
            raise DomainError(f"no dictionary word for new generator {hid!r}")
        comp = CompositionWord(tuple(old[i] for i in dictionary[hid]))
        a, b = h.apply_array(pts), comp.apply_array(pts)
        d = old.space.distances(a, b)
        if old.space.is_real:
            tol = TAU_EXACT * np.maximum(1.0, np.maximum(np.abs(a), np.abs(b.astype(float))))
        else:
            tol = 0.0
        if np.any(d > tol):
            bad = pts[int(np.argmax(d - tol))]
            raise DomainError(f"dictionary word for {hid!r} disagrees with it at {bad!r}")


def reencode_generators(y: PseudoTrajectory, old: GeneratorSet, new: GeneratorSet,
                        dictionary: dict[str, Sequence[str]]) -> PseudoTrajectory:
    """Rewrite a pseudo-trajectory of the new generators over the old ones.

    Each step is expanded into the old-generator word of its (best) new
    generator; the intermediate points are exact images, so all of the step's
    perturbation sits on its last sub-step and amplitudes carry over unchanged.
    The result keeps y's first time index and carries the expanded word.
    """
    check_dictionary(old, new, dictionary)
    _, best = step_gaps(new, y)
    points = [y.points[0]]
    word: list[str] = []
    for s, hid in enumerate(best):
        x = y.points[s]
        sub = list(dictionary[hid])
        for gid in sub[:-1]:
            x = old[gid].apply(x)
            points.append(x)
        points.append(y.points[s + 1])
        word.extend(sub)
    return PseudoTrajectory(y.space, y.t_min, points, tuple(word))


def words_connecting(G: GeneratorSet, u, v, n: int) -> list[tuple[str, ...]]:
    """All words of exactly n generators (g_{i_1} first) carrying u to v."""
    out = []
    for word in itertools.product(G.ids, repeat=n):
        x = u
        for gid in word:
            x = G[gid].apply(x)
        if G.space.close(x, v) if G.space.is_real else x == v:
            out.append(word)
    return out


def exact_length_reachability(G: GeneratorSet, n: int) -> dict[tuple, tuple[str, ...] | None]:
    """For a finite space: a word of exactly n generators from u to v, per pair."""
    if G.space.is_real:
        raise DomainError("reachability tables need a finite space")
    table = {}
    for u in G.space.labels:
        for v in G.space.labels:
            words = words_connecting(G, u, v, n)
            table[(u, v)] = words[0] if words else None
    return table
