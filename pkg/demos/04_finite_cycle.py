"""
Rerouting on three points
=========================

The 3-cycle g on {1, 2, 3} together with its inverse can bridge any two
points in exactly n steps for n >= 3, so a jump is repaired by editing a
few generator choices.  A branch that must use g at every step cannot.
"""
from semishadow import GeneratorSet, NonAutoSystem, branch_vs_semigroup_report, cyclic_g, join_pseudo
from semishadow.core import finite_space
from semishadow.semigroup import exact_length_reachability

F = finite_space([1, 2, 3])
g = cyclic_g()
G = GeneratorSet.of(F, {"g": g, "gi": g.inverse()})

for n in range(3, 6):
    table = exact_length_reachability(G, n)
    print(n, {f"{u}->{v}": " ".join(w) for (u, v), w in table.items() if u == 1})

y = join_pseudo(G, -16, 15, 0, 1, 1, "g", "g")
branch = NonAutoSystem(G, -16, ("g",) * 31)
rep = branch_vs_semigroup_report(y, G, branch)
print("semigroup", rep.semigroup_statistic, rep.semigroup_pass)
print("branch   ", rep.branch_statistic, rep.branch_pass)
for c in rep.branch_candidates:
    print("  start", c["start"], "average distance", round(c["statistic"], 4))
