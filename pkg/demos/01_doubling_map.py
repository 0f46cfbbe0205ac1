"""
Shadowing a noisy orbit of the doubling map
===========================================

Build a pseudo-trajectory of x -> 2x with uniform noise, glue it into a true
orbit, and compare the distance with the certified bound.
"""
import math

import numpy as np

from semishadow import GeneratorSet, GluingOracle, RateFunction, build_pseudo, certify_bounds, shadow_construct
from semishadow.core import REAL_LINE
from semishadow.maps import Affine

G = GeneratorSet.of(REAL_LINE, {"d": Affine(2.0)})
eps = 1e-3
y = build_pseudo(G, -128, 256, {"type": "uniform", "eps": eps}, seed=0)

# errors behind a glue shrink like 2^-k, so lambda = 1/2 is the natural rate
phi = RateFunction.geometric(0.5)
z, cert = shadow_construct(y, G, GluingOracle(G), phi)

print("rounds:", len(cert.rounds))
for r in cert.rounds:
    print(f"  round {r.round}: {len(r.segments):4d} segments, sup gap {r.gap_sup:.3e}")

d = np.abs(z.points - y.points)
print(f"sup distance {d.max():.3e}, bound eps*Phi*e^Phi = {eps * 3 * math.exp(3):.3e}")

report = certify_bounds(cert, eps, "U")
for name, b in report.bounds.items():
    print(f"  {name:10s} {'ok' if b['pass'] else 'FAILED'}")
