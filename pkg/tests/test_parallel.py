import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from semishadow.core import REAL_LINE, DomainError
from semishadow.gluing import GluingOracle, RateFunction
from semishadow.parallel import (ShadowConstructionFailed, certify_bounds, gap_recursion_step,
                                 product_exp_bound, shadow_construct)
from semishadow.perturb import build_pseudo
from semishadow.semigroup import GeneratorSet, gap_profile
from semishadow.maps import Affine

GEO = RateFunction.geometric(0.5)
BOUND = 1e-3 * 3 * math.exp(3)


def test_recursion_zero_and_isolated():
    assert not gap_recursion_step([0.0, 0.0, 0.0], GEO, 2).any()
    for n in range(5):
        assert list(gap_recursion_step([0.01], GEO, n)) == [0.01]


def test_recursion_uniform_gaps_round_zero():
    out = gap_recursion_step([1e-3] * 5, GEO, 0)
    assert out[2] == pytest.approx(2e-3)
    assert out[0] == pytest.approx(1.5e-3)


def test_product_exp_examples():
    prods, bound, holds = product_exp_bound([0.0, 0.0])
    assert prods[-1] == 1.0 and bound == 1.0 and holds
    prods, bound, holds = product_exp_bound([1.0])
    assert prods[-1] == 2.0 and bound == pytest.approx(math.e) and holds
    b = [2.0 ** -k for k in range(1, 21)]
    prods, bound, holds = product_exp_bound(b)
    ref_p, ref_e = oracles.product_and_exp(b)
    assert prods[-1] == pytest.approx(ref_p, rel=1e-12)
    assert prods[-1] == pytest.approx(2.384, abs=1e-3)
    assert bound == pytest.approx(ref_e)
    assert holds


def test_product_exp_rejects_negative():
    with pytest.raises(DomainError):
        product_exp_bound([0.1, -0.1])


@given(st.lists(st.floats(0, 1), max_size=50))
def test_product_exp_property(b):
    _, _, holds = product_exp_bound(b)
    assert holds


def _doubling():
    return GeneratorSet.of(REAL_LINE, {"d": Affine(2.0)})


def test_unperturbed_pseudo_returned_as_is():
    G = _doubling()
    y = build_pseudo(G, -8, 16, {"type": "none"}, anchor=1.0)
    z, cert = shadow_construct(y, G, GluingOracle(G), GEO)
    assert np.array_equal(z.points, y.points)
    assert all(not r.glued for r in cert.rounds)
    rep = certify_bounds(cert, 1e-3)
    assert rep.passed
    assert rep.bounds["err_u"]["lhs"] == 0.0


def test_single_perturbation_glues_once():
    G = _doubling()
    y = build_pseudo(G, -8, 17, {"type": "single", "t0": -1, "amplitude": 0.1}, anchor=1.0)
    z, cert = shadow_construct(y, G, GluingOracle(G), GEO)
    assert sum(1 for r in cert.rounds if r.glued) == 1
    assert cert.consumed == [-1]
    d = np.abs(z.points - y.points)
    k = z.times
    assert np.all(d <= 0.1 * 0.5 ** np.abs(k) + 1e-12)


def test_two_perturbations_recursion_prediction():
    G = _doubling()
    y = build_pseudo(G, -8, 17, {"type": "explicit", "moments": [[-1, 0.1], [2, 0.2]]}, anchor=1.0)
    _, cert = shadow_construct(y, G, GluingOracle(G), GEO)
    r1 = cert.rounds[1]
    assert r1.moments == [2]
    # 0.2 + phi(-1) * 0.1: the glued left neighbour feeds the surviving moment
    assert r1.predicted == pytest.approx([0.25])
    assert r1.gaps[0] <= r1.predicted[0]
    assert sorted(cert.consumed) == [-1, 2]


def test_uniform_run_meets_all_bounds():
    G = _doubling()
    y = build_pseudo(G, -128, 256, {"type": "uniform", "eps": 1e-3}, seed=7)
    z, cert = shadow_construct(y, G, GluingOracle(G), GEO)
    assert cert.final["sup_distance"] <= BOUND
    rep = certify_bounds(cert, 1e-3, "U")
    assert rep.passed
    assert rep.bounds["rec_est"]["pass"] and rep.bounds["cauchy"]["pass"]


def test_segment_count_halves_and_moments_consumed_once():
    G = _doubling()
    y = build_pseudo(G, -64, 128, {"type": "uniform", "eps": 1e-3}, seed=3)
    n_moments = len(gap_profile(G, y))
    _, cert = shadow_construct(y, G, GluingOracle(G), GEO)
    counts = [len(r.segments) for r in cert.rounds]
    for a, b in zip(counts, counts[1:]):
        assert b == math.ceil(a / 2)
    assert len(cert.consumed) == len(set(cert.consumed)) == n_moments
    assert len(cert.rounds) <= math.ceil(math.log2(counts[0])) + 1


def test_construction_is_deterministic():
    G = _doubling()
    y = build_pseudo(G, -64, 128, {"type": "uniform", "eps": 1e-3}, seed=11)
    a, ca = shadow_construct(y, G, GluingOracle(G), GEO)
    b, cb = shadow_construct(y, G, GluingOracle(G), GEO)
    assert np.array_equal(a.points, b.points)
    assert ca.to_dict() == cb.to_dict()


def test_oracle_failure_keeps_partial_certificate():
    G = GeneratorSet.of(REAL_LINE, {"h": Affine(0.5)})
    y = build_pseudo(G, -16, 32, {"type": "single", "t0": 0, "amplitude": 0.1}, anchor=1.0)
    with pytest.raises(ShadowConstructionFailed) as exc:
        shadow_construct(y, G, GluingOracle(G), GEO)
    assert exc.value.certificate.status != "complete"
    with pytest.raises(DomainError):
        certify_bounds(exc.value.certificate, 0.1)
