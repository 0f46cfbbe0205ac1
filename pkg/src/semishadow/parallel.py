"""Parallel pairwise gluing of a pseudo-trajectory into a true trajectory.

The pseudo-trajectory is cut at its moments of perturbation into segments of
true trajectories.  Each round glues segment pairs (0, 1), (2, 3), ... at the
even-indexed surviving moments; an odd segment out at the right edge is
carried over unchanged.  Gaps of the new pseudo-trajectory are re-measured
every round and compared with the three-term recursion

    gap_i' <= gap_i + phi(-2^n) gap_{i-1} + phi(2^n) gap_{i+1}.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from .core import TAU_EXACT, DomainError
from .gluing import GluingOracle, OracleFailure, RateFunction, monotone_envelope, phi_sum, symmetrize
from .semigroup import PseudoTrajectory, Trajectory, max_cesaro, perturbation_mask

DEFAULT_PARTIAL_SUM_K = (8, 32, 128)


def gap_recursion_step(gaps, phi: RateFunction, n: int) -> np.ndarray:
    """Right-hand side of the gap recursion at every moment of round n.

    Missing neighbours (at the ends of the sequence) contribute zero.
    """
    g = np.asarray(gaps, dtype=float)
    if g.size == 0:
        return g
    phi_m, phi_p = phi.per_round(n)
    left = np.concatenate([[0.0], g[:-1]])
    right = np.concatenate([g[1:], [0.0]])
    return g + phi_m * left + phi_p * right


def product_exp_bound(b) -> tuple[np.ndarray, float, bool]:
    """Partial products of (1 + b_k) against exp(sum b_k).

    ``holds`` compares every partial product with the exponential of the
    matching partial sum, allowing relative round-off of 1e-12.
    """
    b = np.asarray(b, dtype=float)
    if np.any(b < 0):
        raise DomainError("entries must be non-negative")
    prods = np.cumprod(1.0 + b)
    sums = np.cumsum(b)
    bounds = np.exp(sums)
    holds = bool(np.all(prods <= bounds * (1.0 + 1e-12)))
    return prods, float(np.exp(b.sum())), holds


def tail_mass(phi: RateFunction, tau: int, total: float | None = None) -> float:
    """sum over |j| >= tau of phi(j)."""
    if tau <= 0:
        return phi_sum(phi) if total is None else total
    if phi.form == "geometric":
        return 2.0 * phi.lam ** tau / (1.0 - phi.lam)
    total = phi_sum(phi) if total is None else total
    j = np.arange(-(tau - 1), tau)
    return max(0.0, total - float(np.sum(phi(j))))


@dataclass
class RoundRecord:
    round: int
    segments: list[tuple[int, int]]
    moments: list[int]
    gaps: list[float]
    gap_sup: float
    partial_sums: dict[int, float]
    predicted: list[float] | None = None
    recursion_ok: bool | None = None
    glued: list[int] = field(default_factory=list)
    max_change: float = 0.0
    untouched_radius: int | None = None
    cauchy_ok: bool = True


@dataclass
class GluingCertificate:
    mode: str
    strategy: str
    phi: dict
    Phi: float
    window: tuple[int, int]
    center: int
    rounds: list[RoundRecord] = field(default_factory=list)
    consumed: list[int] = field(default_factory=list)
    final: dict[str, Any] = field(default_factory=dict)
    status: str = "complete"
    failure: str | None = None

    @property
    def gamma0_sup(self) -> float:
        return self.rounds[0].gap_sup if self.rounds else 0.0

    @property
    def exp_Phi(self) -> float:
        return math.exp(self.Phi)

    def to_dict(self) -> dict:
        d = asdict(self)
        for r in d["rounds"]:
            r["partial_sums"] = {str(k): v for k, v in r["partial_sums"].items()}
        d["bounds"] = {
            "Phi": self.Phi,
            "exp_Phi_gamma0_sup": self.exp_Phi * self.gamma0_sup,
        }
        return d


class ShadowConstructionFailed(RuntimeError):
    """An oracle failed mid-construction; ``certificate`` holds the rounds so far."""

    def __init__(self, message, certificate, index=None):
        super().__init__(message)
        self.certificate = certificate
        self.index = index


def _partial_sums(moments, gaps, center, ks) -> dict[int, float]:
    m = np.asarray(moments, dtype=int)
    g = np.asarray(gaps, dtype=float)
    return {int(k): float(g[np.abs(m - center) <= k].sum()) for k in ks}


def prepare_rate(phi: RateFunction) -> RateFunction:
    """Monotone envelope followed by symmetrization."""
    return symmetrize(monotone_envelope(phi))


def shadow_construct(y: PseudoTrajectory, system, oracle: GluingOracle, phi: RateFunction,
                     partial_sum_k=DEFAULT_PARTIAL_SUM_K, k_min: int | None = None):
    """Build a true trajectory shadowing y by parallel gluing.

    Returns (z, certificate).  Raises ShadowConstructionFailed if the oracle
    fails in some round; the exception carries the partial certificate.
    """
    G = system.generator_set
    if oracle.generators is not G:
        raise DomainError("oracle is bound to a different system")
    phi = prepare_rate(phi)
    Phi = phi_sum(phi)
    bound_factor = math.exp(Phi)
    space = G.space
    mask, _, best = perturbation_mask(system, y)
    moments = [int(y.t_min + i) for i in np.flatnonzero(mask)]
    center = y.t_min + (len(y) - 2) // 2
    cert = GluingCertificate(
        mode="branch" if hasattr(system, "branch") else "semigroup",
        strategy=oracle.strategy, phi=phi.to_dict(), Phi=Phi,
        window=(y.t_min, y.t_max), center=center,
    )

    # initial segments between consecutive moments
    segments = []
    start = y.t_min
    for t in moments + [y.t_max]:
        i0, i1 = start - y.t_min, t - y.t_min
        segments.append(Trajectory(G, start, y.points[i0:i1 + 1], best[i0:i1]))
        start = t + 1

    z_prev = np.array(y.points, copy=True)
    predicted = None
    cap = math.ceil(math.log2(len(segments))) + 1 if len(segments) > 1 else 0
    n = 0
    while True:
        gaps = [oracle.junction_gap(a, b)[0] for a, b in zip(segments, segments[1:])]
        rec = RoundRecord(
            round=n,
            segments=[(s.t_min, s.t_max) for s in segments],
            moments=list(moments),
            gaps=[float(g) for g in gaps],
            gap_sup=float(max(gaps, default=0.0)),
            partial_sums=_partial_sums(moments, gaps, center, partial_sum_k),
        )
        if predicted is not None:
            rec.predicted = [float(p) for p in predicted]
            tol = TAU_EXACT * max(1.0, float(np.max(np.abs(z_prev.astype(float))))) if space.is_real else 0.0
            rec.recursion_ok = bool(all(g <= p + tol for g, p in zip(gaps, predicted)))
        cert.rounds.append(rec)
        if len(segments) == 1:
            break
        if n >= cap:
            raise RuntimeError("parallel gluing did not terminate within its round cap")

        predicted = gap_recursion_step(gaps, phi, n)[1::2]
        merged, changes, radius = [], [], None
        for p in range(0, len(segments) - 1, 2):
            left, right = segments[p], segments[p + 1]
            try:
                res = oracle.glue(left, right, phi)
            except OracleFailure as exc:
                cert.status = "failed"
                cert.failure = str(exc)
                raise ShadowConstructionFailed(str(exc), cert, exc.index) from exc
            merged.append(res.trajectory)
            rec.glued.append(left.t_max)
            cert.consumed.append(left.t_max)
            changed = np.flatnonzero(res.errors > 0)
            if changed.size:
                taus = np.abs(res.trajectory.t_min + changed - res.t0)
                changes.append((taus, res.errors[changed]))
                r = int(taus.min())
                radius = r if radius is None else min(radius, r)
        if len(segments) % 2:
            merged.append(segments[-1])

        z_new = np.concatenate([s.points for s in merged])
        if space.is_real:
            rec.max_change = float(np.max(np.abs(z_new.astype(float) - z_prev.astype(float))))
        else:
            rec.max_change = float(np.max(z_new != z_prev))
        rec.untouched_radius = radius
        gamma_scale = bound_factor * cert.rounds[0].gap_sup if oracle.mode == "strong" else 1.0
        for taus, errs in changes:
            limits = np.array([gamma_scale * tail_mass(phi, int(t), Phi) for t in taus])
            if np.any(errs > limits + TAU_EXACT):
                rec.cauchy_ok = False
        z_prev = z_new
        segments = merged
        moments = moments[1::2]
        n += 1

    z = segments[0]
    d = space.distances(z.points, y.points)
    kmin = len(y) // 4 if k_min is None else k_min
    avg, k0, k1 = max_cesaro(d, kmin)
    cert.final = {"sup_distance": float(d.max()), "max_cesaro": avg, "k_min": k0, "k_max": k1}
    return z, cert


@dataclass
class CertificationReport:
    kind: str
    eps: float
    Phi: float
    bounds: dict[str, dict]

    @property
    def passed(self) -> bool:
        return all(self.bounds[k]["pass"] for k in ("err_u", "bound_est", "est_a", "fin_a"))

    def to_dict(self):
        return {"kind": self.kind, "eps": self.eps, "Phi": self.Phi,
                "bounds": self.bounds, "passed": self.passed}


def certify_bounds(cert: GluingCertificate, eps: float, kind: str = "U") -> CertificationReport:
    """Evaluate the uniform, gap, partial-sum and average bounds on a certificate.

    For kind "U", ``eps`` bounds every gap; for kind "A" it bounds their
    average, and the uniform error bound is evaluated with the largest
    initial gap in place of eps.
    """
    if kind not in ("U", "A"):
        raise DomainError("kind must be 'U' or 'A'")
    if cert.status != "complete":
        raise DomainError("certificate is incomplete")
    Phi = cert.Phi
    eP = math.exp(Phi)
    g0 = cert.gamma0_sup
    eps_u = eps if kind == "U" else g0
    sup_d = cert.final["sup_distance"]
    bounds = {}
    rhs = eps_u * Phi * eP
    bounds["err_u"] = {"pass": sup_d <= rhs, "lhs": sup_d, "rhs": rhs, "slack": rhs - sup_d}

    sups = [r.gap_sup for r in cert.rounds]
    rhs = eP * g0
    bounds["bound_est"] = {"pass": all(s <= rhs for s in sups), "lhs": max(sups, default=0.0),
                           "rhs": rhs, "slack": rhs - max(sups, default=0.0),
                           "per_round": sups}

    r0 = cert.rounds[0].partial_sums if cert.rounds else {}
    rows, ok, worst = [], True, 0.0
    for r in cert.rounds:
        for k, v in r.partial_sums.items():
            lim = eP * r0[k]
            ok &= v <= lim
            rows.append({"round": r.round, "k": k, "R": v, "limit": lim})
            if lim > 0:
                worst = max(worst, v / lim)
            elif v > 0:
                worst = math.inf
    bounds["est_a"] = {"pass": bool(ok), "lhs": worst, "rhs": 1.0, "slack": 1.0 - worst,
                       "rows": rows}

    q = cert.final["max_cesaro"]
    rhs = eps * Phi * eP
    bounds["fin_a"] = {"pass": q <= rhs, "lhs": q, "rhs": rhs, "slack": rhs - q,
                       "k_min": cert.final["k_min"], "k_max": cert.final["k_max"]}

    checks = [r.recursion_ok for r in cert.rounds if r.recursion_ok is not None]
    bounds["rec_est"] = {"pass": all(checks), "rounds_checked": len(checks)}
    bounds["cauchy"] = {"pass": all(r.cauchy_ok for r in cert.rounds),
                        "max_change": [r.max_change for r in cert.rounds],
                        "untouched_radius": [r.untouched_radius for r in cert.rounds]}
    return CertificationReport(kind, float(eps), Phi, bounds)
