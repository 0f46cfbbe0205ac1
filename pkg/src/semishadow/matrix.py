"""Desk-scale evidence for implications between shadowing classes.

A class (alpha, beta) pairs a perturbation type alpha (U uniform, A small on
average, S single moment) with a shadowing type beta (U, A, L).  For every
registered system we collect evidence per class:

* "in": every test pseudo-trajectory of type alpha was shadowed by the
  parallel gluing construction and passed the beta check at delta;
* "out": the falsifier certified that some witness of type alpha admits no
  beta-shadowing true trajectory within its budget (this overrides passes on
  the sampled pseudo-trajectories, which are not adversarial);
* "unknown": neither.

"conflict" flags a witness that the falsifier rejects while the construction
shadows it, which indicates a bug.

A cell row -> column is "counterexample-found" when some system is in the row
class and out of the column class, "consistent" when every system that is
in the row class is also in the column class, and "no-evidence" otherwise.
The reference marks shipped in REFERENCE_MARKS are annotations only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import REAL_LINE, TAU_EXACT, DomainError, finite_space
from .gluing import GluingOracle, OracleFailure, RateFunction
from .maps import Affine, cyclic_g, psi
from .parallel import ShadowConstructionFailed, shadow_construct
from .perturb import build_pseudo, join_pseudo
from .semigroup import GeneratorSet, PseudoTrajectory, perturbation_mask, max_cesaro
from .verdicts import check_shadowing, falsify_shadowing

CLASSES = ("UU", "UA", "AU", "AA", "SU", "SA", "SL")

REFERENCE_MARKS = {
    "UU": ("=", "+", "-", "-", "+", "+", "?"),
    "UA": ("-?", "=", "?", "-?", "+", "+", "?"),
    "AU": ("+?", "+?", "=", "+", "+", "+", "?"),
    "AA": ("-", "-?", "-", "=", "-?", "+", "-?"),
    "SU": ("-?", "?", "+?", "?", "=", "+", "+?"),
    "SA": ("-", "+?", "?", "+?", "-", "=", "+?"),
    "SL": ("-", "?", "-?", "-?", "-", "?", "="),
}


@dataclass
class Thresholds:
    eps: float = 1e-3
    delta: float = 1e-2
    gamma_max: float = 0.1
    window: int = 256
    single_amplitude: float | None = None  # defaults to eps
    seeds: int = 3

    @property
    def single(self) -> float:
        return self.eps if self.single_amplitude is None else self.single_amplitude


@dataclass
class Witness:
    """A pseudo-trajectory handed to the falsifier, with its budget."""

    pseudo: PseudoTrajectory
    budget: dict = field(default_factory=dict)
    # averages depend on the window, so short witnesses only speak for U
    kinds: tuple[str, ...] = ("U", "A")


@dataclass
class RegisteredSystem:
    name: str
    system: GeneratorSet
    strategy: str
    mode: str
    phi: RateFunction
    thresholds: Thresholds
    witnesses: Callable[["RegisteredSystem"], list[Witness]] = lambda s: []
    anchor: float | None = None

    def oracle(self) -> GluingOracle:
        return GluingOracle(self.system, self.strategy, self.mode)


def pseudo_type(sys: RegisteredSystem, y: PseudoTrajectory) -> set[str]:
    """Perturbation types y belongs to at the system's thresholds."""
    th = sys.thresholds
    mask, gaps, _ = perturbation_mask(sys.system, y)
    gaps = np.where(mask, gaps, 0.0)
    slack = 1.0 + TAU_EXACT  # displacements of exactly eps pick up round-off
    out = set()
    if np.all(gaps <= th.eps * slack):
        out.add("U")
    if max_cesaro(gaps, len(y) // 4)[0] <= th.eps * slack:
        out.add("A")
    if int(mask.sum()) == 1 and gaps.max() <= th.single * slack:
        out.add("S")
    return out


def test_pseudos(sys: RegisteredSystem, alpha: str) -> list[PseudoTrajectory]:
    """Representative pseudo-trajectories of type alpha."""
    th = sys.thresholds
    G = sys.system
    n = th.window
    t_min = -(n // 2)
    mid = t_min + n // 2 - 1
    word = "random" if len(G) > 1 else None
    out = []
    if G.space.is_real:
        if alpha == "U":
            for s in range(th.seeds):
                out.append(build_pseudo(G, t_min, n, {"type": "uniform", "eps": th.eps},
                                        seed=s, anchor=sys.anchor, word=word))
        elif alpha == "A":
            for s in range(th.seeds):
                out.append(build_pseudo(G, t_min, n, {"type": "gaussian", "eps": th.eps,
                                                      "gamma_max": th.gamma_max},
                                        seed=s, anchor=sys.anchor, word=word))
            out.append(build_pseudo(G, t_min, n, {"type": "single", "t0": mid,
                                                  "amplitude": th.gamma_max}, seed=0, anchor=sys.anchor))
        else:
            out.append(build_pseudo(G, t_min, n, {"type": "single", "t0": mid,
                                                  "amplitude": th.single}, seed=0, anchor=sys.anchor))
    elif alpha in ("A", "S"):
        out.append(build_pseudo(G, t_min, n, {"type": "single", "t0": mid}, word=G.ids[0]))
    return [y for y in out if alpha in pseudo_type(sys, y)]


def evidence(sys: RegisteredSystem) -> dict[str, dict]:
    """Per-class evidence for one system."""
    th = sys.thresholds
    result = {}
    witnesses = sys.witnesses(sys)
    for cls in CLASSES:
        alpha, beta = cls
        tests = test_pseudos(sys, alpha)
        inside = bool(tests)
        for y in tests:
            try:
                z, _ = shadow_construct(y, sys.system, sys.oracle(), sys.phi)
            except (ShadowConstructionFailed, OracleFailure, DomainError, RuntimeError):
                inside = False
                break
            if not check_shadowing(z, y, beta, th.delta).passed:
                inside = False
                break
        outside, conflict, detail = False, False, None
        if beta in ("U", "A"):
            for wt in witnesses:
                if alpha not in pseudo_type(sys, wt.pseudo) or beta not in wt.kinds:
                    continue
                w = falsify_shadowing(sys.system, wt.pseudo, th.delta, kind=beta, **wt.budget)
                if w.claim:
                    outside, detail = True, w.lower_bound
                    conflict = _shadows(sys, wt.pseudo, beta)
                    break
        if conflict:
            status = "conflict"
        elif outside:
            # a certified witness overrides passes on sampled pseudo-trajectories
            status = "out"
        else:
            status = "in" if inside else "unknown"
        result[cls] = {"status": status, "tests": len(tests), "sampled_pass": inside,
                       "lower_bound": detail}
    return result


def _shadows(sys: RegisteredSystem, y: PseudoTrajectory, beta: str) -> bool:
    """Does the gluing construction shadow y itself at the system's delta?"""
    try:
        z, _ = shadow_construct(y, sys.system, sys.oracle(), sys.phi)
    except (ShadowConstructionFailed, OracleFailure, DomainError, RuntimeError):
        return False
    return check_shadowing(z, y, beta, sys.thresholds.delta).passed


def implication_matrix(systems: list[RegisteredSystem]) -> dict:
    """Evidence table over ordered pairs of classes."""
    if len(systems) < 2:
        raise DomainError("need at least two registered systems")
    ev = {s.name: evidence(s) for s in systems}
    cells = {}
    for i, row in enumerate(CLASSES):
        for j, col in enumerate(CLASSES):
            if row == col:
                cells[(row, col)] = {"value": "consistent", "systems": []}
                continue
            members = [n for n, e in ev.items() if e[row]["status"] == "in"]
            breakers = [n for n in members if ev[n][col]["status"] == "out"]
            if breakers:
                value = "counterexample-found"
                names = breakers
            elif members and all(ev[n][col]["status"] == "in" for n in members):
                value = "consistent"
                names = members
            else:
                value = "no-evidence"
                names = []
            cells[(row, col)] = {"value": value, "systems": names,
                                 "reference": REFERENCE_MARKS[row][j]}
    return {"evidence": ev, "cells": cells}


def _witness_single_big(sys):
    th = sys.thresholds
    n = th.window
    t_min = -(n // 2)
    y = build_pseudo(sys.system, t_min, n, {"type": "single", "t0": t_min + n // 2 - 1,
                                            "amplitude": th.gamma_max}, anchor=sys.anchor)
    return [Witness(y)]


def _witness_drift(sys):
    th = sys.thresholds
    n = th.window
    moments = [[t, th.eps] for t in range(-(n // 2), n - n // 2 - 1)]
    y = build_pseudo(sys.system, -(n // 2), n, {"type": "explicit", "moments": moments},
                     anchor=0.0, direction="forward")
    return [Witness(y, {"radius": 1.0})]


def _witness_psi(sys):
    eps = sys.thresholds.eps
    y = join_pseudo(sys.system, -10, 10, 0, -eps, eps / 2, "p", "p")
    return [Witness(y)]


def _witness_two_branches(sys):
    # gap |u - v| kept below eps so the witness is of uniform type
    y = join_pseudo(sys.system, -6, 6, 0, 2.0, 1 + math.sqrt(2) * 5e-4, "h", "d")
    return [Witness(y, {"word_length": 12, "grid_step": 1e-4, "radius": 2e-2}, kinds=("U",))]


def _witness_cyclic(sys):
    th = sys.thresholds
    G = sys.system
    short = join_pseudo(G, -4, 4, 0, 1, 1, "g", "g")
    n = th.window
    long = join_pseudo(G, -(n // 2), n - n // 2 - 1, 0, 1, 1, "g", "g")
    out = [Witness(short, kinds=("U",))]
    if len(G) == 1:
        out.append(Witness(long))
    return out


def registered_systems(window: int = 256) -> list[RegisteredSystem]:
    """The example systems used for the evidence table."""
    geo = RateFunction.geometric(0.5)
    R = REAL_LINE
    F = finite_space([1, 2, 3])
    g = cyclic_g()
    flat = RateFunction.table({k: 1.0 for k in range(-window, window + 1)})
    finite_th = Thresholds(eps=2e-3, delta=1e-2, window=1025, single_amplitude=1.0)
    return [
        RegisteredSystem("doubling", GeneratorSet.of(R, {"d": Affine(2.0)}),
                         "expanding-pick-forward", "strong", geo, Thresholds(window=window),
                         _witness_single_big),
        RegisteredSystem("halving", GeneratorSet.of(R, {"h": Affine(0.5)}),
                         "contracting-pick-backward", "strong", geo, Thresholds(window=window),
                         _witness_single_big, anchor=0.5),
        RegisteredSystem("shift", GeneratorSet.of(R, {"s": Affine(1.0, 1.0)}),
                         "expanding-pick-forward", "strong", flat, Thresholds(window=window),
                         _witness_drift, anchor=0.0),
        RegisteredSystem("psi-half-two", GeneratorSet.of(R, {"p": psi(0.5, 2.0)}),
                         "expanding-pick-forward", "strong", geo, Thresholds(window=window),
                         _witness_psi),
        RegisteredSystem("double-and-halve", GeneratorSet.of(R, {"d": Affine(2.0), "h": Affine(0.5)}),
                         "expanding-pick-forward", "strong", geo, Thresholds(window=window),
                         _witness_two_branches),
        RegisteredSystem("cyclic-g", GeneratorSet.of(F, {"g": g}),
                         "finite-cyclic-reroute", "weak", RateFunction.table({k: 1.0 for k in range(-3, 4)}),
                         finite_th, _witness_cyclic),
        RegisteredSystem("cyclic-g-and-inverse", GeneratorSet.of(F, {"g": g, "gi": g.inverse()}),
                         "finite-cyclic-reroute", "weak", RateFunction.table({k: 1.0 for k in range(-3, 4)}),
                         finite_th, _witness_cyclic),
    ]
