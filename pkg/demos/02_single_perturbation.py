"""
One kick, then nothing
======================

A single perturbation of the doubling map is absorbed by one glue.  The
distance to the glued orbit halves with every step away from the kick, so
the pseudo-trajectory is shadowed in the limit.
"""
import numpy as np

from semishadow import GeneratorSet, GluingOracle, RateFunction, build_pseudo, check_shadowing, shadow_construct
from semishadow.core import REAL_LINE
from semishadow.maps import Affine

G = GeneratorSet.of(REAL_LINE, {"d": Affine(2.0)})
y = build_pseudo(G, -10, 21, {"type": "single", "t0": 0, "amplitude": 0.1}, anchor=0.5)
z, cert = shadow_construct(y, G, GluingOracle(G), RateFunction.geometric(0.5))

for t, a, b in zip(z.times, y.points, z.points):
    print(f"{t:4d}  {a: .6f}  {b: .6f}  {abs(a - b):.2e}")

print(check_shadowing(z, y, "L").to_dict())

# time reversal: the same pair read backwards belongs to x -> x/2
from semishadow import invert_transfer

res = invert_transfer(G, y, z)
print("reversed window", res.y.t_min, res.y.t_max, "C_lower", res.lower)
