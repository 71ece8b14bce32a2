"""Deficits of the Sobolev and GN inequalities near and far from equality."""
import numpy as np

from sharpineq import extremals as E
from sharpineq import verify as V
from sharpineq.domain import half_space

dom = half_space(2, 1.0)
p = 2.0
h = E.sobolev_extremal(dom, p)
print("extremal deficit:", V.sobolev_quotient(dom, p, h).deficit)

# a bump of growing amplitude: the deficit grows roughly quadratically
for amp in (1e-3, 1e-2, 1e-1):
    f = E.perturb(h, (1.0, 0.5, amp * h.f(1.0)))
    print(f"bump {amp:6.0e}: deficit {V.sobolev_quotient(dom, p, f).deficit:.3e}")

# the GN family on both sides of alpha = 1
for alpha in (0.5, 2.0):
    g = E.gn_extremal(dom, p, alpha)
    rep = V.gn_quotients(dom, p, alpha, g)
    print(f"alpha={alpha}: theta={rep.extras['theta']:.6f}, extremal deficit {rep.deficit:.1e}, "
          f"support radius {g.support_radius:.4g}")

rng = np.random.default_rng(0)
worst = min(V.sobolev_quotient(dom, p, E.random_spline(rng, tail_range=(3, 6))).deficit
            for _ in range(20))
print("smallest deficit over 20 random splines:", worst)
