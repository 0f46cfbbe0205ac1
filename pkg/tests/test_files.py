import json
import math

import numpy as np

from semishadow.core import REAL_LINE, finite_space
from semishadow.files import jsonable, read_trajectory_csv, write_json, write_trajectory_csv
from semishadow.gluing import GluingOracle, RateFunction
from semishadow.maps import Affine, cyclic_g
from semishadow.parallel import shadow_construct
from semishadow.perturb import build_pseudo
from semishadow.semigroup import GeneratorSet


def test_real_round_trip_is_bit_exact(tmp_path):
    G = GeneratorSet.of(REAL_LINE, {"d": Affine(2.0)})
    y = build_pseudo(G, -16, 32, {"type": "uniform", "eps": 1e-3}, seed=1)
    z, _ = shadow_construct(y, G, GluingOracle(G), RateFunction.geometric(0.5))
    write_trajectory_csv(tmp_path / "y.csv", y, G)
    write_trajectory_csv(tmp_path / "z.csv", z)
    y2 = read_trajectory_csv(tmp_path / "y.csv", G)
    z2 = read_trajectory_csv(tmp_path / "z.csv", G, true=True)
    assert np.array_equal(y2.points, y.points) and y2.t_min == -16
    assert np.array_equal(z2.points, z.points) and z2.word == z.word


def test_finite_round_trip(tmp_path):
    G = GeneratorSet.of(finite_space([1, 2, 3]), {"g": cyclic_g()})
    y = build_pseudo(G, 0, 8, {"type": "single", "t0": 3}, word="g")
    write_trajectory_csv(tmp_path / "y.csv", y, G)
    y2 = read_trajectory_csv(tmp_path / "y.csv", G)
    assert list(y2.points) == list(y.points)


def test_csv_layout(tmp_path):
    G = GeneratorSet.of(REAL_LINE, {"d": Affine(2.0)})
    y = build_pseudo(G, 0, 3, {"type": "none"}, anchor=1.0, direction="forward")
    write_trajectory_csv(tmp_path / "y.csv", y, G)
    lines = (tmp_path / "y.csv").read_text().splitlines()
    assert lines == ["t,point,generator_id,gap", "0,1.0,d,0.0", "1,2.0,d,0.0", "2,4.0,,"]


def test_json_non_finite_and_sorted(tmp_path):
    write_json(tmp_path / "a.json", {"b": math.inf, "a": np.float64(0.5), "c": [np.int64(2), math.nan]})
    text = (tmp_path / "a.json").read_text()
    assert json.loads(text) == {"a": 0.5, "b": "inf", "c": [2, "nan"]}
    assert text.index('"a"') < text.index('"b"')
    assert jsonable((np.bool_(True),)) == [True]
