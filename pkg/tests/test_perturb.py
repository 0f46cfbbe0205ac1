import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from semishadow.core import REAL_LINE, DomainError, finite_space
from semishadow.maps import Affine, cyclic_g, psi
from semishadow.perturb import build_pseudo, displacements, expand_rle, is_expanding, join_pseudo
from semishadow.semigroup import GeneratorSet, gap_profile, step_gaps

R = REAL_LINE


def _doubling():
    return GeneratorSet.of(R, {"d": Affine(2.0)})


def test_no_displacement_gives_true_trajectory():
    G = _doubling()
    y = build_pseudo(G, -10, 20, {"type": "uniform", "eps": 0.0}, seed=3)
    assert len(gap_profile(G, y)) == 0


@given(st.integers(0, 2 ** 32 - 1), st.floats(1e-4, 0.1))
def test_uniform_gaps_bounded_by_eps(seed, eps):
    G = _doubling()
    y = build_pseudo(G, -20, 40, {"type": "uniform", "eps": eps}, seed=seed)
    gaps, _ = step_gaps(G, y)
    assert gaps.max() <= eps * (1 + 1e-6) + 1e-12


def test_gaussian_mean_and_clip():
    rng = np.random.default_rng(0)
    d = displacements({"type": "gaussian", "eps": 1e-3, "gamma_max": 0.1}, 200_000, 0, rng)
    assert np.abs(d).max() <= 0.1
    assert np.abs(d).mean() == pytest.approx(1e-3, rel=0.02)


def test_gaussian_needs_finite_clip():
    with pytest.raises(DomainError):
        displacements({"type": "gaussian", "eps": 1e-3}, 5, 0, np.random.default_rng(0))


def test_single_model_places_one_moment():
    G = _doubling()
    y = build_pseudo(G, -8, 17, {"type": "single", "t0": 2, "amplitude": 0.1}, anchor=1.0)
    prof = gap_profile(G, y)
    assert prof.times == [2]
    assert prof.amplitudes == pytest.approx([0.1])


def test_backward_build_stays_bounded():
    G = _doubling()
    y = build_pseudo(G, -128, 256, {"type": "uniform", "eps": 1e-3}, seed=0)
    assert np.abs(y.points).max() <= 2.0


def test_same_seed_same_pseudo():
    G = GeneratorSet.of(R, {"d": Affine(2.0), "h": Affine(0.5)})
    a = build_pseudo(G, 0, 30, {"type": "uniform", "eps": 1e-3}, seed=9, word="random")
    b = build_pseudo(G, 0, 30, {"type": "uniform", "eps": 1e-3}, seed=9, word="random")
    assert a.same_as(b) and a.word == b.word
    assert set(a.word) == {"d", "h"}


def test_expanding_detection():
    assert is_expanding(_doubling())
    assert is_expanding(GeneratorSet.of(R, {"p": psi(3.0, 2.0)}))
    assert not is_expanding(GeneratorSet.of(R, {"p": psi(0.5, 2.0)}))


def test_finite_single_jumps_outside_image():
    G = GeneratorSet.of(finite_space([1, 2, 3]), {"g": cyclic_g()})
    y = build_pseudo(G, 0, 8, {"type": "single", "t0": 3}, word="g")
    prof = gap_profile(G, y)
    assert prof.times == [3] and prof.amplitudes == [1.0]


def test_join_semantics():
    G = GeneratorSet.of(R, {"d": Affine(2.0), "h": Affine(0.5)})
    v = 1 + math.sqrt(2) * 1e-2
    y = join_pseudo(G, -6, 6, 0, 2.0, v, "h", "d")
    assert y.at(-1) == 2.0 and y.at(0) == v
    assert y.at(-6) == 2.0 * 2 ** 5
    assert y.at(6) == pytest.approx(v * 64)
    assert y.word == ("h",) * 6 + ("d",) * 6


def test_join_rejects_bad_split():
    G = _doubling()
    with pytest.raises(DomainError):
        join_pseudo(G, 0, 5, 0, 1.0, 1.0, "d", "d")


def test_expand_rle():
    assert expand_rle([["g", 2], ["gi", 1]]) == ["g", "g", "gi"]
