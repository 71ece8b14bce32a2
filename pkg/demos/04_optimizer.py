"""Searching for the Sobolev extremal from a Gaussian start.

The spline family cannot represent the algebraic extremal exactly, so the
search stalls slightly above the sharp value; it must never go below it.
"""
from sharpineq import optimize as O
from sharpineq.domain import half_space

dom = half_space(2, 1.0)
run = O.minimize_quotient(dom, "sobolev", {"p": 2.0}, O.gaussian_init(), budget=1500,
                          restarts=2, seed=0)
print(f"sharp 1/S        {run.sharp_value:.10f}")
print(f"initial quotient {run.initial_value:.10f}")
print(f"best quotient    {run.best_value:.10f}  (gap {run.relative_gap:.2e}, "
      f"{run.evaluations} evaluations)")
print("tail exponent of the best spline:", run.best.params["tail"])
