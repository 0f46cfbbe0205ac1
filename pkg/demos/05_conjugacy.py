"""
Moving a shadowing pair through a conjugacy
===========================================

h(x) = 2x carries x -> x + 1 to x -> x + 2 and doubles every distance.
A signed power conjugates x -> 3x to x -> 2x but is not Lipschitz at 0,
so the transfer is refused there.
"""
import logging
import math

from semishadow import (ConjugacySpec, GeneratorSet, GluingOracle, RateFunction, SignedPower, build_pseudo,
                        conjugate_transfer, shadow_construct)
from semishadow.core import REAL_LINE
from semishadow.maps import Affine
from semishadow.transfer import TransferRefused

logging.basicConfig(level=logging.WARNING)

f = GeneratorSet.of(REAL_LINE, {"s": Affine(1.0, 1.0)})
g = GeneratorSet.of(REAL_LINE, {"s": Affine(1.0, 2.0)})
y = build_pseudo(f, -16, 32, {"type": "uniform", "eps": 0.05}, seed=0, anchor=0.0)
x, _ = shadow_construct(y, f, GluingOracle(f), RateFunction.table({k: 1.0 for k in range(-32, 33)}))

res = conjugate_transfer(ConjugacySpec(Affine(2.0), f, g), y, x, delta=0.1)
for kind in ("U", "A"):
    print(kind, res.before[kind]["statistic"], "->", res.after[kind]["statistic"])

two = GeneratorSet.of(REAL_LINE, {"m": Affine(2.0)})
three = GeneratorSet.of(REAL_LINE, {"m": Affine(3.0)})
spec = ConjugacySpec(SignedPower(math.log(2) / math.log(3)), two, three, direction="h.g=f.h")
print("intertwining residual", spec.intertwining_residual())
y = build_pseudo(three, -8, 17, {"type": "uniform", "eps": 1e-3}, seed=0, anchor=0.5)
x, _ = shadow_construct(y, three, GluingOracle(three), RateFunction.geometric(1 / 3))
try:
    conjugate_transfer(spec, y, x)
except TransferRefused as exc:
    for p in exc.estimate.probes:
        print("probe at", p["point"], "growth", round(p["growth"], 1))
