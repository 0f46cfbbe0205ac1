"""Moving shadowing statements between systems.

Two transfers are supported: time reversal of an invertible system, and
push-forward through a conjugating homeomorphism h.  A conjugacy is only
used after its intertwining identity has been checked on a grid and its
bi-Lipschitz constants have been estimated on the region the sequences live
in; a region where the distance ratios blow up is refused.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .core import REAL_LINE, TAU_EXACT, DomainError, Space
from .maps import Affine, Endomorphism, FiniteTable, map_from_dict
from .semigroup import GeneratorSet, PseudoTrajectory, Trajectory, step_gaps
from .verdicts import check_shadowing

log = logging.getLogger(__name__)

DIRECTIONS = ("h.f=g.h", "h.g=f.h")


class TransferRefused(DomainError):
    """The conjugacy cannot be used on the requested region."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


@dataclass(frozen=True)
class SignedPower(Endomorphism):
    """x -> sign(x) |x|^p, a homeomorphism of the line; not Lipschitz at 0 unless p == 1."""

    p: float
    space: Space = REAL_LINE

    def apply(self, x):
        return math.copysign(abs(x) ** self.p, x) if x != 0 else 0.0

    def apply_array(self, xs):
        xs = np.asarray(xs, dtype=float)
        return np.sign(xs) * np.abs(xs) ** self.p

    def preimages(self, y):
        return [self.inverse().apply(y)]

    @property
    def invertible(self):
        return self.p > 0

    def inverse(self):
        return SignedPower(1.0 / self.p)

    @property
    def singular_points(self) -> tuple[float, ...]:
        return () if self.p == 1 else (0.0,)

    def to_dict(self):
        return {"type": "signed-power", "p": self.p}


def homeomorphism_from_dict(spec: dict) -> Endomorphism:
    if spec.get("type") == "signed-power":
        p = spec["p"]
        if isinstance(p, str):
            p = _parse_exponent(p)
        return SignedPower(float(p))
    return map_from_dict(spec)


def _parse_exponent(text: str) -> float:
    """Accepts a number or 'log<base>(<arg>)' such as 'log3(2)'."""
    text = text.strip()
    if text.startswith("log") and "(" in text:
        base = float(text[3:text.index("(")])
        arg = float(text[text.index("(") + 1:-1])
        return math.log(arg) / math.log(base)
    return float(text)


@dataclass
class ConjugacySpec:
    """h together with the systems it relates.

    With direction "h.f=g.h", h maps the f-space to the g-space and
    h(f_i(x)) = g_i(h(x)); with "h.g=f.h" the roles swap.  Generators are
    paired by id.
    """

    h: Endomorphism
    f: GeneratorSet
    g: GeneratorSet
    direction: str = "h.f=g.h"
    region: tuple[float, float] = (-10.0, 10.0)
    singular_points: tuple[float, ...] = ()
    constants: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise DomainError(f"direction must be one of {DIRECTIONS}")
        if set(self.f.ids) != set(self.g.ids):
            raise DomainError("conjugated systems must share generator ids")
        if not self.singular_points and hasattr(self.h, "singular_points"):
            self.singular_points = tuple(self.h.singular_points)

    @property
    def source(self) -> GeneratorSet:
        return self.f if self.direction == "h.f=g.h" else self.g

    @property
    def target(self) -> GeneratorSet:
        return self.g if self.direction == "h.f=g.h" else self.f

    @property
    def h_inv(self) -> Endomorphism:
        return self.h.inverse()

    def _grid(self, n: int):
        sp = self.source.space
        if sp.is_real:
            return np.linspace(self.region[0], self.region[1], n)
        return np.asarray(sp.labels, dtype=object)

    def intertwining_residual(self, n: int = 1000) -> float:
        """Largest scaled residual of h o source_i = target_i o h on the grid."""
        xs = self._grid(n)
        sp = self.target.space
        worst = 0.0
        for gid in self.source.ids:
            a = self.h.apply_array(self.source[gid].apply_array(xs))
            b = self.target[gid].apply_array(self.h.apply_array(xs))
            worst = max(worst, _scaled_max(sp, a, b))
        back = self.h_inv.apply_array(self.h.apply_array(xs))
        worst = max(worst, _scaled_max(self.source.space, back, xs))
        return worst

    def validate(self, n: int = 1000) -> None:
        r = self.intertwining_residual(n)
        if r > TAU_EXACT:
            raise TransferRefused(f"intertwining identity {self.direction} fails (residual {r:.3e})")


def _scaled_max(space, a, b) -> float:
    d = space.distances(a, b)
    if not space.is_real:
        return float(d.max())
    scale = np.maximum(1.0, np.maximum(np.abs(a.astype(float)), np.abs(b.astype(float))))
    return float((d / scale).max())


def conjugacy_from_dict(spec: dict, f: GeneratorSet, g: GeneratorSet) -> ConjugacySpec:
    h = homeomorphism_from_dict(spec["h"])
    region = tuple(spec.get("region", (-10.0, 10.0)))
    sing = tuple(spec.get("singular_points", ()))
    return ConjugacySpec(h, f, g, spec.get("direction", "h.f=g.h"), region, sing)


@dataclass
class BilipschitzEstimate:
    lower: float
    upper: float
    n_pairs: int
    divergent: bool = False
    probes: list = field(default_factory=list)

    @property
    def C(self) -> float:
        if self.divergent:
            return math.inf
        return max(self.upper, 1.0 / self.lower if self.lower > 0 else math.inf)

    def to_dict(self):
        return {"C_lower": self.lower, "C_upper": self.upper, "C": self.C,
                "n_pairs": self.n_pairs, "divergent": self.divergent, "probes": self.probes}


def _ratios(h: Endomorphism, a, b) -> np.ndarray:
    sp = h.space
    d0 = sp.distances(a, b)
    keep = d0 > 0
    d1 = sp.distances(h.apply_array(a[keep]), h.apply_array(b[keep]))
    return d1 / d0[keep]


def estimate_bilipschitz(h, pairs=None, region: tuple[float, float] = (-10.0, 10.0),
                         n_pairs: int = 1000, seed: int = 0,
                         singular_points=(), probe_scales=range(1, 9)) -> BilipschitzEstimate:
    """Min and max of rho(h a, h b) / rho(a, b) over sample pairs.

    Coincident pairs are skipped.  Around each declared singular point inside
    the region, pairs (s - 10^-k, s + 10^-k) are probed for k in
    ``probe_scales``; the estimate is marked divergent when the ratio, or its
    reciprocal, grows by more than a factor 10 across the probe.
    """
    if isinstance(h, ConjugacySpec):
        singular_points = singular_points or h.singular_points
        h = h.h
    if not singular_points:
        singular_points = getattr(h, "singular_points", ())
    sp = h.space
    if pairs is None:
        if sp.is_real:
            rng = np.random.default_rng(seed)
            a = rng.uniform(region[0], region[1], n_pairs)
            b = rng.uniform(region[0], region[1], n_pairs)
        else:
            labels = list(sp.labels)
            a = np.asarray([u for u in labels for _ in labels], dtype=object)
            b = np.asarray([v for _ in labels for v in labels], dtype=object)
    else:
        a = np.asarray([p[0] for p in pairs], dtype=float if sp.is_real else object)
        b = np.asarray([p[1] for p in pairs], dtype=float if sp.is_real else object)
    r = _ratios(h, a, b)
    if r.size == 0:
        raise DomainError("no sample pair with distinct points")
    est = BilipschitzEstimate(float(r.min()), float(r.max()), int(r.size))
    if sp.is_real:
        for s in singular_points:
            if not region[0] <= s <= region[1]:
                continue
            ks = list(probe_scales)
            t = 10.0 ** -np.asarray(ks, dtype=float)
            pr = _ratios(h, s - t, s + t)
            growth = max(pr[-1] / pr[0], pr[0] / pr[-1])
            est.probes.append({"point": s, "scales": ks, "ratios": pr.tolist(),
                               "growth": float(growth)})
            if growth > 10.0:
                est.divergent = True
                est.upper = max(est.upper, float(pr.max()))
                est.lower = min(est.lower, float(pr.min()))
    return est


@dataclass
class TransferResult:
    y: PseudoTrajectory
    x: Trajectory
    before: dict
    after: dict
    estimate: BilipschitzEstimate

    def to_dict(self):
        return {"before": self.before, "after": self.after, "bilipschitz": self.estimate.to_dict()}


def _hull(*seqs) -> tuple[float, float]:
    vals = np.concatenate([np.asarray(s, dtype=float) for s in seqs])
    return float(vals.min()), float(vals.max())


def conjugate_transfer(spec: ConjugacySpec, y: PseudoTrajectory, x: Trajectory,
                       delta: float | None = None, k_min: int | None = None) -> TransferResult:
    """Push a shadowing pair (x true, y pseudo) through h.

    Raises TransferRefused if the intertwining identity fails or the
    bi-Lipschitz constant diverges on the hull of the two sequences.
    """
    spec.validate()
    if x.generators is not spec.source and x.generators != spec.source:
        raise DomainError("x is not a trajectory of the conjugacy's source system")
    sp = spec.source.space
    if sp.is_real:
        region = _hull(y.points, x.points)
        est = estimate_bilipschitz(spec.h, region=region, singular_points=spec.singular_points)
    else:
        est = estimate_bilipschitz(spec.h)
    spec.constants = est.to_dict()
    if est.divergent:
        log.warning("refusing transfer on [%g, %g]: C_upper diverges (%s)",
                    *(region if sp.is_real else (0, 0)), est.probes)
        raise TransferRefused("bi-Lipschitz constant diverges on the region", est)

    yp = PseudoTrajectory(spec.target.space, y.t_min, spec.h.apply_array(y.points), y.word)
    xp = Trajectory(spec.target, x.t_min, spec.h.apply_array(x.points), x.word)
    before, after = {}, {}
    C = est.C
    for kind in ("U", "A"):
        d0 = delta if delta is not None else 1.0
        v0 = check_shadowing(x, y, kind, d0, k_min=k_min)
        v1 = check_shadowing(xp, yp, kind, d0 * C, k_min=k_min)
        before[kind] = v0.to_dict()
        after[kind] = v1.to_dict()
        tol = TAU_EXACT * max(1.0, v0.statistic)
        if v1.statistic > C * v0.statistic + tol:
            raise AssertionError(f"{kind} statistic grew by more than C = {C}")
    return TransferResult(yp, xp, before, after, est)


@dataclass
class InversionResult:
    y: PseudoTrajectory
    x: Trajectory
    inverse: GeneratorSet
    lower: float
    gap_check: bool
    verdict: dict

    def to_dict(self):
        return {"C_lower": self.lower, "gap_check": self.gap_check, "verdict": self.verdict,
                "window": [self.y.t_min, self.y.t_max]}


def inverse_system(G: GeneratorSet) -> GeneratorSet:
    for gid, g in G.generators:
        if not g.invertible:
            raise DomainError(f"generator {gid!r} is not a bijection")
    return GeneratorSet(G.space, tuple((gid, g.inverse()) for gid, g in G.generators))


def _lower_ratio(G: GeneratorSet, region) -> float:
    lows = []
    for _, g in G.generators:
        if isinstance(g, Affine):
            lows.append(abs(g.slope))
        elif isinstance(g, FiniteTable) or not G.space.is_real:
            lows.append(1.0)
        else:
            lows.append(estimate_bilipschitz(g, region=region).lower)
    return min(lows)


def invert_transfer(G, y: PseudoTrajectory, x: Trajectory, delta: float = 1.0) -> InversionResult:
    """Reverse time: y''_k = y_{-k}, x''_k = x_{-k} as objects of the inverse system.

    Each reversed gap at step k is checked against the original gap at step
    -k-1 divided by the smallest expansion ratio of the generators.
    """
    if isinstance(G, Endomorphism):
        G = GeneratorSet.of(G.space, {"f": G})
    inv = inverse_system(G)
    yr = y.reversed()
    xr = Trajectory(inv, -x.t_max, x.points[::-1].copy(), tuple(reversed(x.word)))
    region = _hull(y.points, x.points) if G.space.is_real else None
    lower = _lower_ratio(G, region)
    g_old, _ = step_gaps(G, y)
    g_new, _ = step_gaps(inv, yr)
    # reversed step k pairs with original step -k-1, i.e. the arrays run backwards
    limit = g_old[::-1] / lower
    tol = TAU_EXACT * np.maximum(1.0, np.abs(yr.points[:-1].astype(float))) if G.space.is_real else 0.0
    ok = bool(np.all(g_new <= limit + tol))
    if not ok:
        raise AssertionError("reversed gaps exceed the inverse Lipschitz bound")
    v = check_shadowing(xr, yr, "U", delta).to_dict()
    return InversionResult(yr, xr, inv, lower, ok, v)
