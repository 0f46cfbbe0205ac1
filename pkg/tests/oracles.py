"""Independent reference computations used to freeze expected values.

Nothing here imports semishadow: every value is produced by plain loops or a
closed form so that a bug in the library cannot leak into its own oracle.
"""
import itertools
import math


def set_distance(A, B):
    return min(abs(a - b) for a in A for b in B)


def one_sided(A, B):
    """sup over a in A of inf over b in B."""
    return max(min(abs(a - b) for b in B) for a in A)


def hausdorff(A, B):
    return max(one_sided(A, B), one_sided(B, A))


def psi(a, b, c, d, x):
    return a * x + c if x <= 0 else b * x + d


def geometric_phi_sum(lam):
    return (1 + lam) / (1 - lam)


def product_and_exp(b):
    p = 1.0
    for v in b:
        p *= 1 + v
    return p, math.exp(sum(b))


def affine_orbit(slope, intercept, x0, t_min, t_max):
    """Points of x -> slope*x + intercept with x(0) = x0, for t in [t_min, t_max]."""
    out = {0: x0}
    for t in range(1, t_max + 1):
        out[t] = slope * out[t - 1] + intercept
    for t in range(-1, t_min - 1, -1):
        out[t] = (out[t + 1] - intercept) / slope
    return [out[t] for t in range(t_min, t_max + 1)]


def cyclic_g(x):
    return {1: 3, 2: 1, 3: 2}[x]


def cyclic_g_inv(x):
    return {3: 1, 1: 2, 2: 3}[x]


def exact_words(n, u, v):
    """All words of exactly n letters over {g, gi} carrying u to v."""
    maps = {"g": cyclic_g, "gi": cyclic_g_inv}
    out = []
    for word in itertools.product(("g", "gi"), repeat=n):
        x = u
        for w in word:
            x = maps[w](x)
        if x == v:
            out.append(word)
    return out


def symmetric_averages(values, center, ks):
    return [sum(values[center - k:center + k + 1]) / (2 * k + 1) for k in ks]


def monotone_envelope_table(table):
    """table: dict k -> phi(k) on a finite range, zero outside."""
    keys = sorted(table)
    out = {}
    for k in keys:
        if k < 0:
            out[k] = max(table[i] for i in keys if i <= k)
        else:
            out[k] = max(table[i] for i in keys if i >= k)
    return out
