import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from semishadow.core import REAL_LINE, DomainError
from semishadow.gluing import GluingOracle, RateFunction
from semishadow.maps import Affine
from semishadow.parallel import shadow_construct
from semishadow.perturb import build_pseudo
from semishadow.semigroup import GeneratorSet, PseudoTrajectory, Trajectory, gap_profile, step_gaps
from semishadow.transfer import (ConjugacySpec, SignedPower, TransferRefused, conjugate_transfer,
                                 estimate_bilipschitz, homeomorphism_from_dict, invert_transfer)

R = REAL_LINE
FLAT = RateFunction.table({k: 1.0 for k in range(-40, 41)})


def _shift_pair(step=1.0):
    G = GeneratorSet.of(R, {"s": Affine(1.0, step)})
    y = build_pseudo(G, -16, 32, {"type": "uniform", "eps": 0.05}, seed=4, anchor=0.0)
    x, _ = shadow_construct(y, G, GluingOracle(G), FLAT)
    return G, y, x


def test_bilipschitz_affine_and_identity():
    est = estimate_bilipschitz(Affine(2.0))
    assert est.lower == pytest.approx(2.0) and est.upper == pytest.approx(2.0)
    assert est.C == pytest.approx(2.0)
    assert estimate_bilipschitz(Affine(1.0)).C == pytest.approx(1.0)


def test_signed_power_diverges_at_zero():
    h = SignedPower(math.log(2) / math.log(3))
    est = estimate_bilipschitz(h, region=(-1.0, 1.0))
    assert est.divergent and est.C == math.inf
    ratios = [abs(h.apply(t) - h.apply(-t)) / (2 * t) for t in (1e-2, 1e-4, 1e-6)]
    assert ratios[0] < ratios[1] < ratios[2]


def test_signed_power_intertwines_scalings():
    h = homeomorphism_from_dict({"type": "signed-power", "p": "log3(2)"})
    f = GeneratorSet.of(R, {"m": Affine(2.0)})
    g = GeneratorSet.of(R, {"m": Affine(3.0)})
    spec = ConjugacySpec(h, f, g, direction="h.g=f.h")
    assert spec.intertwining_residual() <= 1e-9
    assert h.apply(6.0) == pytest.approx(2 * h.apply(2.0))
    assert spec.source is g and spec.target is f


def test_affine_conjugacy_doubles_statistic():
    G, y, x = _shift_pair()
    target = GeneratorSet.of(R, {"s": Affine(1.0, 2.0)})
    spec = ConjugacySpec(Affine(2.0), G, target)
    res = conjugate_transfer(spec, y, x, delta=0.1)
    for kind in ("U", "A"):
        before = res.before[kind]["statistic"]
        assert res.after[kind]["statistic"] == pytest.approx(2 * before, rel=0, abs=1e-9)
    assert res.estimate.C == pytest.approx(2.0)


def test_identity_conjugacy_keeps_verdicts():
    G, y, x = _shift_pair()
    res = conjugate_transfer(ConjugacySpec(Affine(1.0), G, G), y, x, delta=0.1)
    assert res.before == res.after


def test_scaling_conjugacy_refused_across_zero():
    h = SignedPower(math.log(2) / math.log(3))
    f = GeneratorSet.of(R, {"m": Affine(2.0)})
    g = GeneratorSet.of(R, {"m": Affine(3.0)})
    y = build_pseudo(g, -6, 12, {"type": "uniform", "eps": 1e-3}, seed=0, anchor=0.5)
    x, _ = shadow_construct(y, g, GluingOracle(g), RateFunction.geometric(1 / 3))
    with pytest.raises(TransferRefused) as exc:
        conjugate_transfer(ConjugacySpec(h, f, g, direction="h.g=f.h"), y, x)
    assert exc.value.estimate.divergent


def test_wrong_identity_refused():
    f = GeneratorSet.of(R, {"s": Affine(1.0, 1.0)})
    g = GeneratorSet.of(R, {"s": Affine(1.0, 3.0)})
    with pytest.raises(TransferRefused):
        ConjugacySpec(Affine(2.0), f, g).validate()


def test_inversion_of_doubling():
    G = GeneratorSet.of(R, {"f": Affine(2.0)})
    y = build_pseudo(G, -5, 11, {"type": "single", "t0": 0, "amplitude": 0.1}, anchor=1.0)
    x, _ = shadow_construct(y, G, GluingOracle(G), RateFunction.geometric(0.5))
    res = invert_transfer(G, y, x)
    assert res.lower == 2.0 and res.gap_check
    prof = gap_profile(res.inverse, res.y)
    # the step 0 -> 1 reverses into the step -1 -> 0
    assert prof.times == [-1]
    assert prof.amplitudes[0] <= 0.05 + 1e-12
    assert res.x.generators[res.x.word[0]].apply(res.x.points[0]) == pytest.approx(res.x.points[1])


def test_inversion_of_isometry_keeps_amplitudes():
    G, y, x = _shift_pair()
    res = invert_transfer(G, y, x)
    old = sorted(gap_profile(G, y).amplitudes)
    new = sorted(gap_profile(res.inverse, res.y).amplitudes)
    assert np.allclose(old, new, atol=1e-12)


def test_inversion_rejects_non_bijection():
    G = GeneratorSet.of(R, {"c": Affine(0.0, 1.0)})
    y = PseudoTrajectory(R, 0, [1.0, 1.0])
    x = Trajectory(G, 0, [1.0, 1.0], ("c",))
    with pytest.raises(DomainError):
        invert_transfer(G, y, x)


@given(st.floats(0.2, 5), st.floats(-3, 3))
def test_affine_bilipschitz_is_slope(slope, shift):
    est = estimate_bilipschitz(Affine(slope, shift), n_pairs=200)
    assert est.lower == pytest.approx(slope) and est.upper == pytest.approx(slope)
