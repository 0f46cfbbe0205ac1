"""Shadowing verdicts and brute-force falsification.

Falsification is evidence only: it enumerates a finite candidate set of true
trajectories and reports the best statistic any of them achieves.  A claim of
non-shadowing is made only when every candidate is worse than delta and the
search radius covers all trajectories that could do better.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .core import TAU_EXACT, DomainError
from .gluing import RateFunction
from .maps import Affine
from .semigroup import PseudoTrajectory, max_cesaro

KINDS = ("U", "A", "L")


@dataclass(frozen=True)
class ShadowVerdict:
    kind: str
    delta: float | None
    statistic: float
    passed: bool
    meta: dict = field(default_factory=dict)

    def to_dict(self):
        return {"kind": self.kind, "delta": self.delta, "statistic": self.statistic,
                "pass": self.passed, **self.meta}


def check_shadowing(x, y: PseudoTrajectory, kind: str, delta: float | None = None, *,
                    k_min: int | None = None, envelope: Callable | None = None,
                    rate: RateFunction | None = None) -> ShadowVerdict:
    """Does x delta-shadow y uniformly (U), on average (A) or in the limit (L)?

    U uses the sup distance and A the largest symmetric average over
    k in [k_min, k_max] (default k_min = window // 4).  L ignores delta: it
    passes when every distance on the outer quarters of the window lies under
    a vanishing envelope.  The default envelope is ``D * rate(t - t*)`` with
    t* the time of the largest distance D and ``rate`` defaulting to 2^-|k|.
    """
    if kind not in KINDS:
        raise DomainError(f"unknown shadowing kind {kind!r}")
    if x.t_min != y.t_min or len(x) != len(y):
        raise DomainError("x and y must share a window")
    d = y.space.distances(x.points, y.points)
    if kind != "L" and (delta is None or not delta > 0):
        raise DomainError("delta must be positive")
    if kind == "U":
        stat = float(d.max())
        return ShadowVerdict("U", delta, stat, stat <= delta, {"window": [y.t_min, y.t_max]})
    if kind == "A":
        k_min = len(y) // 4 if k_min is None else k_min
        stat, k0, k1 = max_cesaro(d, k_min)
        return ShadowVerdict("A", delta, stat, stat <= delta, {"k_min": k0, "k_max": k1})

    n = len(d)
    q = n // 4
    outer = np.r_[0:q, n - q:n]
    times = y.times
    if envelope is None:
        rate = RateFunction.geometric(0.5) if rate is None else rate
        i_peak = int(np.argmax(d))
        D = max(float(d[i_peak]), TAU_EXACT)
        t_peak = int(times[i_peak])
        envelope = lambda t: D * rate(np.asarray(t) - t_peak)  # noqa: E731
    env = np.asarray(envelope(times[outer]), dtype=float)
    tol = TAU_EXACT * (np.maximum(1.0, np.abs(y.points[outer].astype(float))) if y.space.is_real else 1.0)
    do = d[outer]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(do <= tol, 0.0, np.where(env > 0, do / env, np.inf))
    stat = float(ratio.max()) if ratio.size else 0.0
    passed = bool(np.all(do <= env + tol))
    return ShadowVerdict("L", None, stat, passed,
                         {"tail_split": [int(times[q - 1]) if q else None,
                                         int(times[n - q]) if q else None]})


@dataclass
class FalsificationWitness:
    pseudo: PseudoTrajectory
    kind: str
    delta: float
    budget: dict[str, Any]
    lower_bound: float
    best_start: Any
    best_word: tuple[str, ...] | None
    claim: bool
    diagnostics: str = ""

    def to_dict(self):
        start = self.best_start
        if isinstance(start, (np.floating, float)):
            start = float(start)
        return {"kind": self.kind, "delta": self.delta, "budget": self.budget,
                "lower_bound": self.lower_bound, "best_start": start,
                "best_word": list(self.best_word) if self.best_word else None,
                "claim": self.claim, "diagnostics": self.diagnostics,
                "window": [self.pseudo.t_min, self.pseudo.t_max]}


def _statistic(d: np.ndarray, kind: str, k_min: int) -> np.ndarray:
    """Per-candidate statistic from a (candidates, time) distance matrix."""
    if kind == "U":
        return d.max(axis=1)
    n = d.shape[1]
    c = (n - 1) // 2
    k_max = min(c, n - 1 - c)
    k_min = min(k_min, k_max)
    csum = np.concatenate([np.zeros((d.shape[0], 1)), np.cumsum(d, axis=1)], axis=1)
    ks = np.arange(k_min, k_max + 1)
    sums = csum[:, c + ks + 1] - csum[:, c - ks]
    return (sums / (2 * ks + 1)).max(axis=1)


def _run_word(G, word, start, y, kind, k_min):
    maps = [G[gid] for gid in word]
    x = float(start)
    xs = [x]
    for g in maps:
        x = g.apply(x)
        xs.append(x)
    d = np.abs(np.asarray(xs)[None, :] - y.points.astype(float)[None, :])
    return float(_statistic(d, kind, k_min)[0])


def _ternary_min(f, lo: float, hi: float, max_iter: int = 4000) -> tuple[float, float]:
    """Minimize a unimodal f on [lo, hi] until the bracket stops shrinking."""
    for _ in range(max_iter):
        a = lo + (hi - lo) / 3
        b = hi - (hi - lo) / 3
        if not lo < a < b < hi:
            break
        if f(a) <= f(b):
            hi = b
        else:
            lo = a
    cands = [lo, 0.5 * (lo + hi), hi]
    vals = [f(c) for c in cands]
    i = int(np.argmin(vals))
    return cands[i], vals[i]


def falsify_shadowing(system, pseudo, delta: float, *, word_length: int | None = None,
                      grid_step: float = 1e-3, radius: float | None = None, kind: str = "U",
                      refine: bool = True, refine_top: int = 16, k_min: int | None = None,
                      max_candidates: int = 20_000_000) -> FalsificationWitness:
    """Search for a true trajectory delta-shadowing ``pseudo``; report the best found.

    Candidates are every allowed generator word over the pseudo-trajectory's
    window combined with a grid of starting points at its first time (all
    labels on a finite space).  On the real line the best words are refined
    by ternary search around their best grid point, which finds the exact
    minimum whenever the statistic is unimodal in the start (e.g. increasing
    piecewise affine maps).  ``pseudo`` may be a PseudoTrajectory or a
    zero-argument callable building one.
    """
    y = pseudo() if callable(pseudo) else pseudo
    if kind not in ("U", "A"):
        raise DomainError("falsification supports U and A statistics")
    G = system.generator_set
    space = G.space
    n_steps = len(y) - 1
    k_min = len(y) // 4 if k_min is None else k_min
    radius = 10.0 * delta if radius is None else radius
    budget = {"word_length": word_length, "grid_step": grid_step, "radius": radius,
              "refine": refine, "refine_top": refine_top}

    def inconclusive(msg):
        return FalsificationWitness(y, kind, delta, budget, float("inf"), None, None, False, msg)

    if word_length is not None and n_steps > word_length:
        return inconclusive(f"window needs words of length {n_steps} > budget {word_length}")
    choices = [tuple(G.index(g) for g in system.allowed(y.t_min + s)) for s in range(n_steps)]
    n_words = int(np.prod([len(c) for c in choices], dtype=float))
    if space.is_real:
        m = int(np.floor(radius / grid_step + 1e-9))
        starts = float(y.points[0]) + grid_step * np.arange(-m, m + 1)
    else:
        starts = np.asarray(space.labels, dtype=object)
    budget.update(n_words=n_words, n_starts=int(len(starts)))
    if n_words * len(starts) > max_candidates:
        return inconclusive(f"{n_words} words x {len(starts)} starts exceeds the candidate cap")

    # breadth-first expansion of all words, vectorized over start points
    words = np.zeros((1, 0), dtype=int)
    x = starts[None, :].astype(float if space.is_real else object)
    d_cols = [space.distances(x[0], np.full(len(starts), y.points[0], dtype=x.dtype))[None, :]]
    for s, ch in enumerate(choices):
        new_x, new_words = [], []
        for gi in ch:
            g = G.maps[gi]
            nx = np.stack([g.apply_array(row) for row in x]) if not space.is_real else g.apply_array(x)
            new_x.append(nx)
            new_words.append(np.concatenate([words, np.full((len(words), 1), gi)], axis=1))
        x = np.concatenate(new_x, axis=0)
        words = np.concatenate(new_words, axis=0)
        reps = len(ch)
        d_cols = [np.tile(c, (reps, 1)) for c in d_cols]
        target = np.full(x.shape, y.points[s + 1], dtype=x.dtype)
        d_cols.append(space.distances(x.ravel(), target.ravel()).reshape(x.shape))
    d = np.stack(d_cols, axis=2)  # (words, starts, time)
    stat = _statistic(d.reshape(-1, d.shape[2]), kind, k_min).reshape(d.shape[:2])

    flat = int(np.argmin(stat))
    wi, si = divmod(flat, stat.shape[1])
    best = float(stat[wi, si])
    best_start = starts[si]
    best_word = tuple(G.ids[i] for i in words[wi])

    if space.is_real and refine:
        per_word = stat.min(axis=1)
        order = np.argsort(per_word, kind="stable")[:refine_top]
        for w in order:
            word = tuple(G.ids[i] for i in words[w])
            j = int(np.argmin(stat[w]))
            lo = starts[max(j - 1, 0)]
            hi = starts[min(j + 1, len(starts) - 1)]
            f = lambda s: _run_word(G, word, s, y, kind, k_min)  # noqa: E731
            s_opt, v = _ternary_min(f, float(lo), float(hi))
            if v < best:
                best, best_start, best_word = v, s_opt, word

    diagnostics = ""
    covered = True
    if space.is_real and kind == "U" and radius < delta:
        covered = False
        diagnostics = "search radius smaller than delta; candidates outside it were not excluded"
    if space.is_real and kind == "A":
        # the average is convex in the start for a fixed affine word, so an
        # interior grid minimum of the best word excludes starts outside the grid
        edge = stat[wi].argmin() in (0, stat.shape[1] - 1)
        affine = all(isinstance(g, Affine) for g in G.maps)
        if n_words > 1 or edge or not affine:
            covered = False
            diagnostics = "average statistic: starts outside the searched set are not excluded"
    claim = bool(best > delta and covered)
    return FalsificationWitness(y, kind, delta, budget, best, best_start, best_word, claim,
                                diagnostics)
