"""
Two shadowable maps, one non-shadowable semigroup
=================================================

x -> 2x and x -> x/2 each have the shadowing property, but the semigroup
they generate does not: glue the backward half-orbit of x/2 to the forward
half-orbit of 2x with a small mismatch and no true trajectory stays close.
"""
import math

from semishadow import GeneratorSet, falsify_shadowing, join_pseudo
from semishadow.core import REAL_LINE
from semishadow.maps import Affine

G = GeneratorSet.of(REAL_LINE, {"d": Affine(2.0), "h": Affine(0.5)})
v = 1 + math.sqrt(2) * 1e-2
y = join_pseudo(G, -6, 6, 0, 2.0, v, "h", "d")
print("pseudo:", [round(float(p), 4) for p in y.points])

w = falsify_shadowing(G, y, 1e-2, word_length=12, grid_step=1e-3)
print(f"best start {w.best_start:.6f}, word {''.join(w.best_word)}")
print(f"lower bound {w.lower_bound:.4f}, claim {w.claim}")

# a drift of 0.1 per step on x -> x + 1 cannot be followed either
from semishadow import build_pseudo, psi

S = GeneratorSet.of(REAL_LINE, {"f": psi(1.0, 1.0, 1.0)})
drift = build_pseudo(S, 0, 101, {"type": "constant", "amplitude": 0.1}, anchor=1.0, direction="forward")
print("drift lower bound", falsify_shadowing(S, drift, 1.0, radius=10.0).lower_bound)
