"""Non-autonomous systems: one fixed branch of a semigroup.

A NonAutoSystem pins the generator used at every step.  It plugs into the
same gap, gluing and parallel machinery as a GeneratorSet, except that
``allowed(t)`` offers only the branch generator, so no oracle can exchange
generators.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import DomainError
from .gluing import GluingOracle, OracleFailure, RateFunction
from .maps import nearest_preimage
from .parallel import ShadowConstructionFailed, shadow_construct
from .semigroup import GeneratorSet, PseudoTrajectory, Trajectory


@dataclass(frozen=True)
class NonAutoSystem:
    generators: GeneratorSet
    t_min: int
    branch: tuple[str, ...]

    def __post_init__(self):
        branch = tuple(str(b) for b in self.branch)
        for gid in set(branch):
            if gid not in self.generators.ids:
                raise DomainError(f"branch uses unknown generator {gid!r}")
        object.__setattr__(self, "branch", branch)

    @classmethod
    def from_rle(cls, generators: GeneratorSet, t_min: int, runs: Sequence) -> "NonAutoSystem":
        """Branch from run-length pairs [[id, count], ...]."""
        word = []
        for gid, count in runs:
            word.extend([gid] * int(count))
        return cls(generators, t_min, tuple(word))

    @classmethod
    def periodic(cls, generators: GeneratorSet, t_min: int, period: Sequence[str],
                 n_steps: int) -> "NonAutoSystem":
        word = [period[i % len(period)] for i in range(n_steps)]
        return cls(generators, t_min, tuple(word))

    @property
    def generator_set(self) -> GeneratorSet:
        return self.generators

    @property
    def space(self):
        return self.generators.space

    @property
    def t_max(self) -> int:
        return self.t_min + len(self.branch)

    def allowed(self, t: int) -> tuple[str, ...]:
        i = t - self.t_min
        if not 0 <= i < len(self.branch):
            raise DomainError(f"step {t} lies outside the branch window")
        return (self.branch[i],)

    def word_between(self, t0: int, t1: int) -> tuple[str, ...]:
        """Branch generators for steps t0 .. t1 - 1."""
        return self.branch[t0 - self.t_min:t1 - self.t_min]


def branch_trajectory(sys: NonAutoSystem, x0, t0: int, guide: PseudoTrajectory | None = None):
    """The trajectory through x0 at time t0 over the whole branch window.

    Forward points are forced.  Backward points are preimages under the
    branch generators, nearest to ``guide`` when given (else to the later
    point).  Returns (trajectory, truncated_at); ``truncated_at`` is the time
    whose point had no preimage, or None.
    """
    if not sys.t_min <= t0 <= sys.t_max:
        raise DomainError("t0 outside the branch window")
    G = sys.generators
    x0 = G.space.check(x0)
    fwd = [x0]
    for t in range(t0, sys.t_max):
        fwd.append(G[sys.allowed(t)[0]].apply(fwd[-1]))
    back = []
    truncated = None
    x = x0
    for t in range(t0 - 1, sys.t_min - 1, -1):
        g = G[sys.allowed(t)[0]]
        target = guide.at(t) if guide is not None and guide.t_min <= t <= guide.t_max else x
        p = nearest_preimage(g, x, target)
        if p is None:
            truncated = t + 1
            break
        back.append(p)
        x = p
    pts = back[::-1] + fwd
    start = t0 - len(back)
    traj = Trajectory(G, start, G.space.as_array(pts), sys.word_between(start, sys.t_max))
    return traj, truncated


def branch_shadow_construct(y: PseudoTrajectory, sys: NonAutoSystem, oracle: GluingOracle,
                            phi: RateFunction, **kwargs):
    """Parallel gluing restricted to the branch; the output uses the branch word."""
    if y.word is None:
        raise DomainError("branch mode needs a pseudo-trajectory carrying its reference word")
    if y.word != sys.word_between(y.t_min, y.t_max):
        raise DomainError("pseudo-trajectory word differs from the branch")
    if oracle.system is not sys:
        raise DomainError("oracle must be restricted to the same branch")
    z, cert = shadow_construct(y, sys, oracle, phi, **kwargs)
    if z.word != y.word:
        raise RuntimeError("branch construction changed the generator word")
    return z, cert


@dataclass
class BranchComparison:
    semigroup_pass: bool
    branch_pass: bool
    semigroup_statistic: float | None
    branch_statistic: float | None
    delta: float
    branch_exhaustive: bool
    semigroup_error: str | None = None
    branch_error: str | None = None
    branch_candidates: list = field(default_factory=list)

    def to_dict(self):
        return {
            "semigroup": {"pass": self.semigroup_pass, "statistic": self.semigroup_statistic,
                          "error": self.semigroup_error},
            "branch": {"pass": self.branch_pass, "statistic": self.branch_statistic,
                       "error": self.branch_error, "exhaustive": self.branch_exhaustive,
                       "candidates": self.branch_candidates},
            "delta": self.delta,
        }


def branch_vs_semigroup_report(y: PseudoTrajectory, G: GeneratorSet, branch: NonAutoSystem,
                               delta: float | None = None, phi: RateFunction | None = None,
                               kind: str = "A") -> BranchComparison:
    """Run the semigroup and the branch engines on the same finite-space pseudo-trajectory.

    The branch verdict is backed by enumerating every branch trajectory (one
    per starting label), so a branch failure is exhaustive, not sampled.
    """
    from .verdicts import check_shadowing

    if G.space.is_real:
        raise DomainError("the comparison needs a finite space")
    if delta is None:
        delta = 6.0 / len(y)
    if phi is None:
        phi = RateFunction.table({k: 1.0 for k in range(-3, 4)})
    out = BranchComparison(False, False, None, None, delta, True)

    try:
        z, _ = shadow_construct(y, G, GluingOracle(G, "finite-cyclic-reroute", "weak"), phi)
        v = check_shadowing(z, y, kind, delta)
        out.semigroup_pass, out.semigroup_statistic = v.passed, v.statistic
    except ShadowConstructionFailed as exc:
        out.semigroup_error = str(exc)

    yb = PseudoTrajectory(y.space, y.t_min, y.points, branch.word_between(y.t_min, y.t_max))
    try:
        branch_shadow_construct(yb, branch, GluingOracle(branch, "finite-cyclic-reroute", "weak"), phi)
    except (ShadowConstructionFailed, OracleFailure) as exc:
        out.branch_error = str(exc)

    best = None
    for label in G.space.labels:
        sub = NonAutoSystem(G, y.t_min, branch.word_between(y.t_min, y.t_max))
        x, _ = branch_trajectory(sub, label, y.t_min)
        v = check_shadowing(x, y, kind, delta)
        out.branch_candidates.append({"start": label, "statistic": v.statistic, "pass": v.passed})
        if best is None or v.statistic < best:
            best = v.statistic
    out.branch_statistic = best
    out.branch_pass = best <= delta
    return out
