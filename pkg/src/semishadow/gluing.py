"""Rate functions and single-perturbation gluing oracles.

A gluing oracle takes two true-trajectory segments meeting with one gap and
returns one true trajectory over their union, staying within
``phi(k - t0) * gap`` (strong mode) or ``phi(k - t0)`` (weak mode) of the
concatenated input at every time ``k``, where ``t0`` is the first time of the
right segment.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .core import TAU_EXACT, DomainError
from .maps import nearest_preimage
from .semigroup import InvalidTrajectory, PseudoTrajectory, Trajectory

STRATEGIES = (
    "expanding-pick-forward",
    "contracting-pick-backward",
    "finite-cyclic-reroute",
    "custom-table",
)


class OracleFailure(RuntimeError):
    """The oracle could not produce a trajectory within the rate bound.

    ``index`` is the worst offending time (None if no candidate trajectory
    exists at all).  A failure is evidence against the gluing property.
    """

    def __init__(self, message, index=None, ratio=math.inf):
        super().__init__(message)
        self.index = index
        self.ratio = ratio


@dataclass(frozen=True)
class RateFunction:
    """phi: Z -> R_+, either lam^|k| or a table on [-K, K] plus a tail bound.

    Outside the table a tabulated rate is ``tail_scale * tail_ratio**|k|``.
    """

    form: str
    lam: float = 0.5
    values: tuple[float, ...] = ()
    tail_scale: float = 0.0

    def __post_init__(self):
        if self.form == "geometric":
            if not self.lam > 0:
                raise DomainError("geometric rate needs lam > 0")
        elif self.form == "table":
            if len(self.values) % 2 != 1:
                raise DomainError("table must cover a symmetric range [-K, K]")
            if any(v < 0 for v in self.values) or self.tail_scale < 0:
                raise DomainError("rates are non-negative")
        else:
            raise DomainError(f"unknown rate form {self.form!r}")

    @classmethod
    def geometric(cls, lam: float) -> "RateFunction":
        return cls("geometric", float(lam))

    @classmethod
    def table(cls, values: dict[int, float], tail_scale: float = 0.0,
              tail_ratio: float = 0.5) -> "RateFunction":
        K = max((abs(int(k)) for k in values), default=0)
        vals = [0.0] * (2 * K + 1)
        for k, v in values.items():
            vals[int(k) + K] = float(v)
        return cls("table", float(tail_ratio), tuple(vals), float(tail_scale))

    @property
    def K(self) -> int:
        return (len(self.values) - 1) // 2

    def __call__(self, k):
        k = np.asarray(k)
        if self.form == "geometric":
            out = self.lam ** np.abs(k).astype(float)
        else:
            K = self.K
            table = np.asarray(self.values)
            inside = np.abs(k) <= K
            idx = np.clip(k, -K, K) + K
            tail = self.tail_scale * self.lam ** np.abs(k).astype(float)
            out = np.where(inside, table[idx], tail)
        return float(out) if out.ndim == 0 else out

    def per_round(self, n: int) -> tuple[float, float]:
        """(phi(-2^n), phi(2^n))."""
        return self(-(2 ** n)), self(2 ** n)

    @property
    def is_even(self) -> bool:
        return self.form == "geometric" or self.values == self.values[::-1]

    def to_dict(self) -> dict[str, Any]:
        if self.form == "geometric":
            return {"form": "geometric", "lambda": self.lam}
        K = self.K
        return {"form": "table",
                "values": {str(k - K): v for k, v in enumerate(self.values)},
                "tail": {"scale": self.tail_scale, "ratio": self.lam}}


def rate_from_dict(spec: dict) -> RateFunction:
    if spec["form"] == "geometric":
        return RateFunction.geometric(spec["lambda"])
    tail = spec.get("tail", {})
    return RateFunction.table({int(k): v for k, v in spec["values"].items()},
                              tail.get("scale", 0.0), tail.get("ratio", 0.5))


def _tail_sup(phi: RateFunction, k_abs: int) -> float:
    """sup of the tail over |i| >= k_abs."""
    if phi.tail_scale == 0.0:
        return 0.0
    if phi.lam >= 1.0:
        raise DomainError("tail bound does not decay")
    return phi.tail_scale * phi.lam ** k_abs


def monotone_envelope(phi: RateFunction) -> RateFunction:
    """sup_{i<=k} phi(i) for k < 0 and sup_{i>=k} phi(i) for k >= 0."""
    if phi.form == "geometric":
        return phi
    K = phi.K
    vals = list(phi.values)
    out = vals[:]
    running = _tail_sup(phi, K + 1)
    for k in range(-K, 0):
        running = max(running, vals[k + K])
        out[k + K] = running
    running = _tail_sup(phi, K + 1)
    for k in range(K, -1, -1):
        running = max(running, vals[k + K])
        out[k + K] = running
    return RateFunction("table", phi.lam, tuple(out), phi.tail_scale)


def symmetrize(phi: RateFunction) -> RateFunction:
    """max(phi(-k), phi(k)); even, and its total at most doubles."""
    if phi.form == "geometric":
        return phi
    vals = phi.values
    return RateFunction("table", phi.lam, tuple(max(a, b) for a, b in zip(vals, vals[::-1])),
                        phi.tail_scale)


def phi_sum(phi: RateFunction) -> float:
    """Phi = sum over all integers k of phi(k)."""
    if phi.form == "geometric":
        if phi.lam >= 1.0:
            raise DomainError("geometric rate with lam >= 1 is not summable")
        return (1.0 + phi.lam) / (1.0 - phi.lam)
    total = math.fsum(phi.values)
    if phi.tail_scale > 0:
        if phi.lam >= 1.0:
            raise DomainError("tail bound does not decay")
        total += 2.0 * phi.tail_scale * phi.lam ** (phi.K + 1) / (1.0 - phi.lam)
    return total


def _tolerance(space, a, b) -> np.ndarray:
    if not space.is_real:
        return np.zeros(len(a))
    a = np.abs(np.asarray(a, dtype=float))
    b = np.abs(np.asarray(b, dtype=float))
    return TAU_EXACT * np.maximum(1.0, np.maximum(a, b))


def verify_strong_approx(x, y, phi: RateFunction, t0: int, gap: float,
                         mode: str = "strong") -> tuple[bool, float]:
    """Check rho(x_k, y_k) <= phi(k - t0) * gap at every k (weak: drop the gap).

    Returns (holds, worst ratio); the ratio is inf where the bound is zero but
    the distance is not.
    """
    if x.t_min != y.t_min or len(x) != len(y):
        raise DomainError("x and y must share a window")
    space = y.space
    d = space.distances(x.points, y.points)
    d = np.where(d <= _tolerance(space, x.points, y.points), 0.0, d)
    bound = phi(np.arange(x.t_min, x.t_max + 1) - t0)
    if mode == "strong":
        bound = bound * gap
    elif mode != "weak":
        raise DomainError(f"unknown mode {mode!r}")
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(d == 0, 0.0, np.where(bound > 0, d / bound, np.inf))
    worst = float(ratio.max()) if ratio.size else 0.0
    slack = _tolerance(space, x.points, y.points)
    return bool(np.all(d <= bound + slack)), worst


@dataclass(frozen=True)
class GlueResult:
    trajectory: Trajectory
    errors: np.ndarray
    gap: float
    t0: int
    junction: str
    ratio: float


@dataclass(frozen=True, eq=False)
class GluingOracle:
    """Pluggable gluing strategy bound to one system.

    ``system`` is a GeneratorSet or a NonAutoSystem; in the latter case only
    the branch generator is available at each step.  ``bridges`` feeds the
    custom-table strategy: it maps a pair (left end, right start) to the word
    of generators that replaces the junction, starting from the left end.
    """

    system: Any
    strategy: str = "expanding-pick-forward"
    mode: str = "strong"
    radius: int = 3
    bridges: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise DomainError(f"unknown strategy {self.strategy!r}")
        if self.mode not in ("strong", "weak"):
            raise DomainError(f"unknown mode {self.mode!r}")

    @property
    def generators(self):
        return self.system.generator_set

    def junction_gap(self, left: Trajectory, right: Trajectory) -> tuple[float, str]:
        G = self.generators
        u, v = left.points[-1], right.points[0]
        best, best_id = math.inf, None
        for gid in self.system.allowed(left.t_max):
            d = G.space.distance(G[gid].apply(u), v)
            if d < best:
                best, best_id = d, gid
        return best, best_id

    def glue(self, left: Trajectory, right: Trajectory, phi: RateFunction) -> GlueResult:
        if left.t_max + 1 != right.t_min:
            raise DomainError("segments must be adjacent")
        G = self.generators
        space = G.space
        t0 = right.t_min
        gap, j = self.junction_gap(left, right)
        u, v = left.points[-1], right.points[0]
        scale = space.scale(G[j].apply(u), v)
        if gap <= TAU_EXACT * scale:
            gap = 0.0
            pts = np.concatenate([left.points, right.points])
            word = left.word + (j,) + right.word
        elif self.strategy == "expanding-pick-forward":
            pts, word = self._pick_forward(left, right, j)
        elif self.strategy == "contracting-pick-backward":
            pts, word = self._pick_backward(left, right, j)
        elif self.strategy == "finite-cyclic-reroute":
            pts, word = self._reroute(left, right)
        else:
            pts, word = self._bridge(left, right)
        try:
            z = Trajectory(G, left.t_min, pts, word)
        except InvalidTrajectory as exc:
            raise OracleFailure(f"oracle produced an invalid trajectory: {exc}", exc.step) from exc
        concat = PseudoTrajectory(space, left.t_min, np.concatenate([left.points, right.points]))
        errors = space.distances(z.points, concat.points)
        ok, ratio = verify_strong_approx(z, concat, phi, t0, gap, self.mode)
        if not ok:
            bound = phi(z.times - t0) * (gap if self.mode == "strong" else 1.0)
            with np.errstate(divide="ignore", invalid="ignore"):
                excess = np.where(bound > 0, errors / bound, np.where(errors > 0, np.inf, 0))
            worst = int(z.t_min + np.argmax(excess))
            raise OracleFailure(f"{self.strategy} glue at t0={t0} exceeds the rate bound "
                                f"(worst ratio {ratio:.3g} at t={worst})", worst, ratio)
        return GlueResult(z, errors, float(gap), t0, j, ratio)

    def _pick_forward(self, left, right, j):
        G = self.generators
        n_left = len(left)
        out = [None] * n_left
        g = G[j]
        x = right.points[0]
        for i in range(n_left - 1, -1, -1):
            x = nearest_preimage(g, x, left.points[i])
            if x is None:
                raise OracleFailure(f"backward extension has no preimage at t={left.t_min + i}",
                                    left.t_min + i)
            out[i] = x
            if i > 0:
                g = G[left.word[i - 1]]
        pts = np.concatenate([left.space.as_array(out), right.points])
        return pts, left.word + (j,) + right.word

    def _pick_backward(self, left, right, j):
        G = self.generators
        x = G[j].apply(left.points[-1])
        out = [x]
        for gid in right.word:
            x = G[gid].apply(x)
            out.append(x)
        pts = np.concatenate([left.points, right.space.as_array(out)])
        return pts, left.word + (j,) + right.word

    def _walks(self, start, t_start, n_steps):
        """All (word, points) of exactly n_steps allowed generators from ``start``."""
        G = self.generators
        choices = [self.system.allowed(t_start + s) for s in range(n_steps)]
        for word in itertools.product(*choices):
            x, pts = start, []
            for gid in word:
                x = G[gid].apply(x)
                pts.append(x)
            yield word, pts

    def _reroute(self, left, right):
        """Replace at most ``radius`` points next to the junction by an exact bridge."""
        space = self.generators.space
        t0 = right.t_min
        for m in range(1, self.radius + 1):
            best = None
            if right.t_max >= t0 + m:
                target = right.at(t0 + m)
                for word, pts in self._walks(left.points[-1], t0 - 1, m + 1):
                    if pts[-1] != target:
                        continue
                    changed = sum(p != right.at(t0 + i) for i, p in enumerate(pts[:-1]))
                    key = (changed, 0, [self.generators.index(g) for g in word])
                    if best is None or key < best[0]:
                        best = (key, "right", word, pts)
            if left.t_min <= t0 - 1 - m:
                start = left.at(t0 - 1 - m)
                for word, pts in self._walks(start, t0 - 1 - m, m + 1):
                    if pts[-1] != right.points[0]:
                        continue
                    changed = sum(p != left.at(t0 - m + i) for i, p in enumerate(pts[:-1]))
                    key = (changed, 1, [self.generators.index(g) for g in word])
                    if best is None or key < best[0]:
                        best = (key, "left", word, pts)
            if best is None:
                continue
            _, side, word, pts = best
            if side == "right":
                new_right = list(pts[:-1]) + list(right.points[m:])
                all_pts = list(left.points) + new_right
                full_word = left.word + tuple(word) + right.word[m:]
            else:
                keep = len(left) - m
                all_pts = list(left.points[:keep]) + list(pts[:-1]) + list(right.points)
                full_word = left.word[:keep - 1] + tuple(word) + right.word
            return space.as_array(all_pts), full_word
        raise OracleFailure(f"no bridge of at most {self.radius} edited points exists at t0={t0}")

    def _bridge(self, left, right):
        u, v = left.points[-1], right.points[0]
        key = (u, v) if not self.generators.space.is_real else (float(u), float(v))
        if key not in self.bridges:
            raise OracleFailure(f"custom table has no bridge for {key!r}")
        word = tuple(self.bridges[key])
        G = self.generators
        x, pts = u, []
        for gid in word:
            x = G[gid].apply(x)
            pts.append(x)
        m = len(word)
        if m == 0 or right.t_max < right.t_min + m - 1:
            raise OracleFailure("custom bridge does not fit the right segment")
        all_pts = list(left.points) + pts[:-1] + list(right.points[m - 1:])
        return G.space.as_array(all_pts), left.word + word + right.word[m - 1:]


def glue_pair(oracle: GluingOracle, left: Trajectory, right: Trajectory,
              phi: RateFunction) -> tuple[Trajectory, np.ndarray]:
    """Glue two adjacent segments; returns the trajectory and its error sequence."""
    res = oracle.glue(left, right, phi)
    return res.trajectory, res.errors
