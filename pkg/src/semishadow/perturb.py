"""Pseudo-trajectory builders.

A pseudo-trajectory is a true trajectory with a displacement applied after
some steps.  On the real line the displacement models are:

* ``uniform``: every step, uniform in [-eps, eps];
* ``gaussian``: every step, |N(0, sigma)| clipped at gamma_max with a random
  sign (sigma defaults to eps * sqrt(pi / 2), so the mean magnitude is eps);
* ``constant``: the same displacement ``amplitude`` after every step;
* ``single``: one displacement ``amplitude`` after step t0;
* ``explicit``: a list of (step, displacement) pairs;
* ``none``: no displacement.

Expanding systems are built backward from an anchor at the right end, which
keeps the points bounded: y_t is the preimage of y_{t+1} - d_t nearest to
y_{t+1}.  Everything else is built forward: y_{t+1} = g(y_t) + d_t.
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .core import DomainError
from .maps import Affine, PiecewisePsi, nearest_preimage
from .semigroup import GeneratorSet, PseudoTrajectory

MODELS = ("none", "uniform", "gaussian", "constant", "single", "explicit")


def displacements(model: dict, n_steps: int, t_min: int, rng: np.random.Generator) -> np.ndarray:
    """Signed displacement after each of the n_steps steps."""
    kind = model.get("type", "none")
    d = np.zeros(n_steps)
    if kind == "none":
        return d
    if kind == "uniform":
        eps = float(model["eps"])
        return rng.uniform(-eps, eps, n_steps) if eps > 0 else d
    if kind == "gaussian":
        gmax = float(model.get("gamma_max", math.inf))
        if not math.isfinite(gmax):
            raise DomainError("gamma_max must be finite")
        sigma = model.get("sigma")
        sigma = float(model["eps"]) * math.sqrt(math.pi / 2) if sigma is None else float(sigma)
        mag = np.minimum(np.abs(rng.normal(0.0, sigma, n_steps)), gmax)
        sign = np.where(rng.random(n_steps) < 0.5, -1.0, 1.0)
        return mag * sign
    if kind == "constant":
        return np.full(n_steps, float(model["amplitude"]))
    if kind == "single":
        d[int(model["t0"]) - t_min] = float(model["amplitude"])
        return d
    if kind == "explicit":
        for t, v in model["moments"]:
            d[int(t) - t_min] = float(v)
        return d
    raise DomainError(f"unknown perturbation model {kind!r}")


def is_expanding(G: GeneratorSet) -> bool:
    """True when every generator is affine or two-branch with all slopes of modulus > 1."""
    for g in G.maps:
        if isinstance(g, Affine):
            slopes = [g.slope]
        elif isinstance(g, PiecewisePsi):
            slopes = [g.a, g.b]
        else:
            return False
        if min(abs(s) for s in slopes) <= 1:
            return False
    return True


def choose_word(G: GeneratorSet, n_steps: int, policy, rng: np.random.Generator) -> tuple[str, ...]:
    """A generator id per step: a fixed id, 'random', or an explicit word."""
    if policy is None:
        return (G.ids[0],) * n_steps
    if isinstance(policy, str):
        if policy == "random":
            return tuple(G.ids[i] for i in rng.integers(0, len(G), n_steps))
        return (policy,) * n_steps
    word = tuple(str(w) for w in policy)
    if len(word) != n_steps:
        raise DomainError(f"word has {len(word)} ids for {n_steps} steps")
    return word


def build_pseudo(G: GeneratorSet, t_min: int, n_points: int, model: dict, *,
                 anchor: float | None = None, seed: int = 0, word=None,
                 direction: str = "auto") -> PseudoTrajectory:
    """Pseudo-trajectory on [t_min, t_min + n_points - 1] with reference word attached."""
    if n_points < 2:
        raise DomainError("need at least two points")
    rng = np.random.default_rng(seed)
    n_steps = n_points - 1
    w = choose_word(G, n_steps, word, rng)
    if not G.space.is_real:
        return _build_finite(G, t_min, n_points, model, w, anchor, rng)
    if anchor is None:
        anchor = float(rng.uniform(-1.0, 1.0))
    d = displacements(model, n_steps, t_min, rng)
    if direction == "auto":
        direction = "backward" if is_expanding(G) else "forward"
    pts = np.empty(n_points)
    if direction == "forward":
        pts[0] = anchor
        for s in range(n_steps):
            pts[s + 1] = G[w[s]].apply(pts[s]) + d[s]
    elif direction == "backward":
        pts[-1] = anchor
        for s in range(n_steps - 1, -1, -1):
            target = pts[s + 1] - d[s]
            p = nearest_preimage(G[w[s]], target, pts[s + 1])
            if p is None:
                raise DomainError(f"no preimage at step {t_min + s}")
            pts[s] = p
    else:
        raise DomainError(f"unknown build direction {direction!r}")
    return PseudoTrajectory(G.space, t_min, pts, w)


def _build_finite(G, t_min, n_points, model, w, anchor, rng):
    labels = list(G.space.labels)
    x = labels[0] if anchor is None else G.space.check(anchor)
    jumps: dict[int, object] = {}
    kind = model.get("type", "none")
    if kind == "single":
        jumps[int(model["t0"])] = model.get("to")
    elif kind == "explicit":
        for t, v in model["moments"]:
            jumps[int(t)] = v
    elif kind != "none":
        raise DomainError(f"model {kind!r} needs a real state space")
    pts = [x]
    for s in range(n_points - 1):
        t = t_min + s
        nxt = G[w[s]].apply(pts[-1])
        if t in jumps:
            to = jumps[t]
            if to is None:
                image = {g.apply(pts[-1]) for g in G.maps}
                outside = [lab for lab in labels if lab not in image]
                nxt = outside[0] if outside else next(lab for lab in labels if lab != nxt)
            else:
                nxt = G.space.check(to)
        pts.append(nxt)
    return PseudoTrajectory(G.space, t_min, G.space.as_array(pts), w)


def join_pseudo(G: GeneratorSet, t_min: int, t_max: int, t0: int, u, v,
                left: str, right: str) -> PseudoTrajectory:
    """Backward semi-trajectory of ``left`` ending at u (time t0 - 1) followed by
    the forward semi-trajectory of ``right`` starting at v (time t0)."""
    if not t_min < t0 <= t_max:
        raise DomainError("join time must split the window")
    back = [G.space.check(u)]
    for _ in range(t0 - 1 - t_min):
        p = nearest_preimage(G[left], back[-1], back[-1])
        if p is None:
            raise DomainError("backward semi-trajectory ends inside the window")
        back.append(p)
    fwd = [G.space.check(v)]
    for _ in range(t_max - t0):
        fwd.append(G[right].apply(fwd[-1]))
    pts = back[::-1] + fwd
    word = (left,) * (t0 - t_min) + (right,) * (t_max - t0)
    return PseudoTrajectory(G.space, t_min, G.space.as_array(pts), word)


def pseudo_from_dict(G: GeneratorSet, spec: dict, seed: int) -> PseudoTrajectory:
    """Build from a config 'perturbation' block plus window."""
    model = spec.get("model", {"type": "none"})
    if model.get("type") == "join":
        return join_pseudo(G, spec["t_min"], spec["t_min"] + spec["length"] - 1,
                           model["t0"], model["u"], model["v"], model["left"], model["right"])
    word = spec.get("word")
    if isinstance(word, list) and word and isinstance(word[0], list):
        word = expand_rle(word)
    return build_pseudo(G, spec["t_min"], spec["length"], model, anchor=spec.get("anchor"),
                        seed=seed, word=word, direction=spec.get("direction", "auto"))


def expand_rle(runs: Sequence) -> list[str]:
    out: list[str] = []
    for gid, count in runs:
        out.extend([str(gid)] * int(count))
    return out
