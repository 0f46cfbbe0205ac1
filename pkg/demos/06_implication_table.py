"""
Evidence for implications between shadowing classes
===================================================

Every registered system is tested class by class; a cell row -> column
collects systems that are in the row class and out of the column class.
Takes a few seconds per system.
"""
from semishadow.matrix import CLASSES, implication_matrix, registered_systems

res = implication_matrix(registered_systems(256))

print("system".ljust(22) + " ".join(c.ljust(7) for c in CLASSES))
for name, ev in res["evidence"].items():
    print(name.ljust(22) + " ".join(ev[c]["status"].ljust(7) for c in CLASSES))

short = {"consistent": "+", "counterexample-found": "-", "no-evidence": "."}
print()
print("     " + " ".join(c.ljust(3) for c in CLASSES))
for r in CLASSES:
    print(r.ljust(5) + " ".join(short[res["cells"][(r, c)]["value"]].ljust(3) for c in CLASSES))
