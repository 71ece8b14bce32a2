"""Sharp constants on a weighted half space.

Prints S, G/N and the log-Sobolev constant for a few domains, and checks
two classical special cases along the way.
"""
import math

from sharpineq import constants as C
from sharpineq.domain import WeightedDomain, half_space
from sharpineq.norms import LqNorm

# unweighted R^3, p = 2: the Aubin-Talenti value
s = C.sobolev_constant(WeightedDomain(3), 2).value
aubin = (1 / math.sqrt(3 * (3 - 2) * math.pi)) * (math.gamma(3) / math.gamma(1.5)) ** (1 / 3)
print(f"S(R^3, p=2)          = {s:.15f}   closed form {aubin:.15f}")

# Gaussian log-Sobolev constant 2/(pi e n)
print(f"L(R^2, p=2)          = {C.logsob_constant(WeightedDomain(2), 2).value:.15f}"
      f"   2/(2 pi e) = {2 / (2 * math.pi * math.e):.15f}")

print("\nweighted half space R x R_+, weight t^a, l^2 and l^4 norms")
print(f"{'a':>4} {'norm':>5} {'p':>4} {'S':>12} {'N(alpha=0.5)':>14} {'G(alpha=1.5)':>14}")
for a in (0.0, 1.0, 2.5):
    for q in (2.0, 4.0):
        dom = half_space(2, a, LqNorm(q, 2))
        p = 1.5
        row = [C.sobolev_constant(dom, p).value, C.gn_constant(dom, p, 0.5).value]
        top = dom.n_a / (dom.n_a - p)
        row.append(C.gn_constant(dom, p, 1.5).value if 1.5 <= top else float("nan"))
        print(f"{a:4g} {q:5g} {p:4g} " + " ".join(f"{v:14.8g}" for v in row))

print("\nEuclidean GN from one dimension up (n=2, a=0.5)")
for p in (1.5, 2.5):
    closed = C.euclidean_gn_constant(2, p, 0.5)
    built = C.assembled_gn_constant(2, p, 0.5)
    print(f"p={p}: branch {closed.branch}, alpha={closed.alpha:.6g}, "
          f"closed {closed.value:.15g}, assembled {built['value']:.15g}")
