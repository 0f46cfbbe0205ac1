import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from semishadow.core import REAL_LINE, DomainError
from semishadow.gluing import (GluingOracle, OracleFailure, RateFunction, glue_pair, monotone_envelope,
                               phi_sum, rate_from_dict, symmetrize, verify_strong_approx)
from semishadow.maps import Affine
from semishadow.perturb import join_pseudo
from semishadow.semigroup import GeneratorSet, PseudoTrajectory, Trajectory, validate_trajectory

tables = st.dictionaries(st.integers(-6, 6), st.floats(0, 2), min_size=1)


def _table_dict(phi):
    return {k: phi(k) for k in range(-phi.K, phi.K + 1)}


def test_envelope_of_geometric_is_unchanged():
    phi = RateFunction.geometric(0.3)
    assert monotone_envelope(phi) == phi


def test_envelope_example():
    phi = RateFunction.table({-1: 0.1, 0: 0.5, 1: 0.05, 2: 0.2})
    env = monotone_envelope(phi)
    assert env(1) == 0.2
    assert env(-1) == 0.1
    assert env(0) == 0.5


@given(tables)
def test_envelope_matches_oracle_and_is_idempotent(values):
    phi = RateFunction.table(values)
    env = monotone_envelope(phi)
    full = {k: values.get(k, 0.0) for k in range(-phi.K, phi.K + 1)}
    assert _table_dict(env) == oracles.monotone_envelope_table(full)
    assert monotone_envelope(env) == env


def test_symmetrize_examples():
    phi = RateFunction.table({-1: 0.3, 0: 0.5, 1: 0.1})
    s = symmetrize(phi)
    assert (s(-1), s(0), s(1)) == (0.3, 0.5, 0.3)
    even = RateFunction.table({-1: 0.2, 0: 1.0, 1: 0.2})
    assert symmetrize(even) == even


@given(tables)
def test_symmetrize_total_at_most_doubles(values):
    phi = RateFunction.table(values)
    s = symmetrize(phi)
    assert s.is_even
    assert phi_sum(phi) <= phi_sum(s) <= 2 * phi_sum(phi) + 1e-12


def test_phi_sum_examples():
    assert phi_sum(RateFunction.geometric(0.5)) == 3.0
    assert phi_sum(RateFunction.table({0: 1.0})) == 1.0
    assert phi_sum(RateFunction.geometric(0.9)) == pytest.approx(oracles.geometric_phi_sum(0.9), rel=1e-12)
    assert phi_sum(RateFunction.geometric(0.9)) == pytest.approx(19.0)


def test_phi_sum_tail_included():
    phi = RateFunction.table({0: 1.0}, tail_scale=1.0, tail_ratio=0.5)
    assert phi_sum(phi) == pytest.approx(3.0)


def test_divergent_rates_rejected():
    with pytest.raises(DomainError):
        phi_sum(RateFunction.geometric(1.0))
    with pytest.raises(DomainError):
        phi_sum(RateFunction.table({0: 1.0}, tail_scale=1.0, tail_ratio=1.5))
    with pytest.raises(DomainError):
        RateFunction.table({0: -1.0})


def test_rate_dict_round_trip():
    phi = RateFunction.table({-2: 0.1, 0: 1.0, 3: 0.4}, tail_scale=0.2, tail_ratio=0.25)
    assert rate_from_dict(phi.to_dict()) == phi
    assert rate_from_dict({"form": "geometric", "lambda": 0.5}) == RateFunction.geometric(0.5)


def _doubling_segments(v, n=8):
    G = GeneratorSet.of(REAL_LINE, {"d": Affine(2.0)})
    ks = np.arange(-n, 0)
    left = Trajectory(G, -n, 2.0 ** ks, ("d",) * (n - 1))
    right = Trajectory(G, 0, v * 2.0 ** np.arange(n), ("d",) * (n - 1))
    return G, left, right


def test_expanding_glue_closed_form():
    G, left, right = _doubling_segments(1.1)
    phi = RateFunction.geometric(0.5)
    z, errors = glue_pair(GluingOracle(G), left, right, phi)
    k = np.arange(-8, 8)
    assert np.allclose(z.points, 1.1 * 2.0 ** k, rtol=0, atol=1e-15)
    expected = np.where(k < 0, 0.1 * 2.0 ** k, 0.0)
    assert np.allclose(errors, expected, rtol=1e-12, atol=1e-15)
    validate_trajectory(G, z.points, z.word, z.t_min)


def test_zero_gap_glue_is_concatenation():
    G, left, right = _doubling_segments(1.0)
    z, errors = glue_pair(GluingOracle(G), left, right, RateFunction.geometric(0.5))
    assert np.array_equal(z.points, np.concatenate([left.points, right.points]))
    assert not errors.any()


def test_glue_is_deterministic():
    G, left, right = _doubling_segments(1.3)
    oracle = GluingOracle(G)
    a = glue_pair(oracle, left, right, RateFunction.geometric(0.5))
    b = glue_pair(oracle, left, right, RateFunction.geometric(0.5))
    assert np.array_equal(a[0].points, b[0].points) and np.array_equal(a[1], b[1])


def test_contracting_glue_mirrors_expanding():
    G = GeneratorSet.of(REAL_LINE, {"h": Affine(0.5)})
    left = Trajectory(G, -4, [8.0, 4.0, 2.0, 1.0], ("h",) * 3)
    right = Trajectory(G, 0, [0.6, 0.3, 0.15, 0.075], ("h",) * 3)
    z, errors = glue_pair(GluingOracle(G, "contracting-pick-backward"), left, right,
                          RateFunction.geometric(0.5))
    assert np.allclose(errors, [0, 0, 0, 0, 0.1, 0.05, 0.025, 0.0125], atol=1e-15)


def test_expanding_strategy_fails_on_contracting_map():
    G = GeneratorSet.of(REAL_LINE, {"h": Affine(0.5)})
    left = Trajectory(G, -4, [8.0, 4.0, 2.0, 1.0], ("h",) * 3)
    right = Trajectory(G, 0, [0.6, 0.3, 0.15, 0.075], ("h",) * 3)
    with pytest.raises(OracleFailure) as exc:
        glue_pair(GluingOracle(G), left, right, RateFunction.geometric(0.5))
    assert exc.value.index is not None


def _split(y, G, t0):
    left = Trajectory(G, y.t_min, y.points[:t0 - y.t_min], y.word[:t0 - y.t_min - 1])
    right = Trajectory(G, t0, y.points[t0 - y.t_min:], y.word[t0 - y.t_min:])
    return left, right


def test_reroute_edits_at_most_three_points(cyclic_pair):
    y = join_pseudo(cyclic_pair, -6, 6, 0, 1, 1, "g", "g")
    left, right = _split(y, cyclic_pair, 0)
    phi = RateFunction.table({k: 1.0 for k in range(-3, 4)})
    z, errors = glue_pair(GluingOracle(cyclic_pair, "finite-cyclic-reroute", "weak"), left, right, phi)
    changed = np.flatnonzero(errors)
    assert 0 < len(changed) <= 3
    assert np.all(np.abs(z.times[changed]) <= 3)


def test_reroute_needs_the_inverse():
    from semishadow.core import finite_space
    from semishadow.maps import cyclic_g
    G = GeneratorSet.of(finite_space([1, 2, 3]), {"g": cyclic_g()})
    y = join_pseudo(G, -6, 6, 0, 1, 1, "g", "g")
    left, right = _split(y, G, 0)
    with pytest.raises(OracleFailure):
        glue_pair(GluingOracle(G, "finite-cyclic-reroute", "weak"), left, right,
                  RateFunction.table({k: 1.0 for k in range(-3, 4)}))


def test_custom_table_bridge():
    G = GeneratorSet.of(REAL_LINE, {"s": Affine(1.0, 1.0), "t": Affine(1.0, 2.0)})
    left = Trajectory(G, -2, [0.0, 1.0], ("s",))
    right = Trajectory(G, 0, [3.0, 4.0, 5.0], ("s", "s"))
    oracle = GluingOracle(G, "custom-table", "weak", bridges={(1.0, 3.0): ("t",)})
    z, errors = glue_pair(oracle, left, right, RateFunction.table({0: 1.0}))
    assert list(z.points) == [0.0, 1.0, 3.0, 4.0, 5.0]
    assert z.word == ("s", "t", "s", "s")


def test_verify_strong_approx_examples():
    G, left, right = _doubling_segments(1.1)
    phi = RateFunction.geometric(0.5)
    y = PseudoTrajectory(REAL_LINE, -8, np.concatenate([left.points, right.points]))
    assert verify_strong_approx(y, y, phi, 0, 0.1) == (True, 0.0)
    z, _ = glue_pair(GluingOracle(G), left, right, phi)
    ok, ratio = verify_strong_approx(z, y, phi, 0, 0.1)
    assert ok and ratio <= 1 + 1e-9
    shifted = PseudoTrajectory(REAL_LINE, -8, y.points + 1.0)
    ok, ratio = verify_strong_approx(shifted, y, phi, 0, 0.1)
    assert not ok and ratio > 1


def test_verify_zero_gap_with_distance_is_infinite():
    y = PseudoTrajectory(REAL_LINE, 0, [0.0, 1.0])
    x = PseudoTrajectory(REAL_LINE, 0, [0.0, 1.5])
    ok, ratio = verify_strong_approx(x, y, RateFunction.geometric(0.5), 0, 0.0)
    assert not ok and ratio == np.inf


@given(st.floats(1.01, 8), st.floats(-3, 3), st.floats(0.001, 1))
def test_expanding_backward_error_closed_form(a, u, gap):
    G = GeneratorSet.of(REAL_LINE, {"f": Affine(a)})
    n = 6
    left = Trajectory(G, -n, u * a ** np.arange(-n, 0, dtype=float), ("f",) * (n - 1))
    right = Trajectory(G, 0, (u + gap) * a ** np.arange(n, dtype=float), ("f",) * (n - 1))
    phi = RateFunction.geometric(1.0 / a)
    z, errors = glue_pair(GluingOracle(G), left, right, phi)
    k = np.arange(-n, 0)
    assert np.allclose(errors[:n], gap * a ** k.astype(float), rtol=1e-9, atol=1e-12)
