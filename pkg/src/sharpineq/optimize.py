"""Derivative-free minimisation of Sobolev and GN quotients over spline profiles.

Candidates are ``spline_profile(knots, log_values, tail)`` on frozen,
log-spaced knots; only the knot values and the tail exponent move.  The
simplex works on successive differences of the knot values (a fixed linear
change of variables), which conditions the search much better than raw
values.  The quotients are invariant under scaling, and each candidate is
renormalised to max log-value 0 before it is scored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import constants as C
from . import extremals as E
from . import verify as V
from .domain import WeightedDomain
from .errors import ParameterError, SharpIneqError
from .extremals import RadialProfile
from .norms import format_norm

KINDS = ("sobolev", "gn")
LOG_FLOOR = 20.0     # knot values more than e^-20 below the peak are clipped
TAIL_CAP = 40.0


@dataclass
class OptimizationRun:
    kind: str
    params: dict
    initial: RadialProfile
    best: RadialProfile
    best_value: float
    sharp_value: float
    initial_value: float
    iterations: int
    evaluations: int
    converged: bool
    seed: int
    history: list = field(default_factory=list, repr=False)

    @property
    def relative_gap(self) -> float:
        """best / sharp - 1; never below -1e-6 for a sound run."""
        return self.best_value / self.sharp_value - 1.0

    def to_record(self) -> dict:
        return {"kind": self.kind, **self.params, "initial": self.initial.describe(),
                "initial_value": self.initial_value, "best_value": self.best_value,
                "sharp_value": self.sharp_value, "relative_gap": self.relative_gap,
                "iterations": self.iterations, "evaluations": self.evaluations,
                "converged": self.converged, "seed": self.seed,
                "best": self.best.to_json()["params"]}


def _objective(dom: WeightedDomain, kind: str, p: float, alpha, quad_tol: float):
    """Return (score(profile), sharp value, admissible(tail)).

    Sobolev: ||grad f||_p / ||f||_p*, bounded below by 1/S.
    GN: ||grad f||^theta ||f||^(1-theta) / ||f||, bounded below by 1/G or 1/N.
    """
    n_a = dom.n_a
    if kind == "sobolev":
        if not 1.0 < p < n_a:
            raise ParameterError(f"need 1 < p < n_a = {n_a:g}")
        sharp = C.sobolev_constant(dom, p)
        ps = n_a * p / (n_a - p)

        def score(f):
            return math.exp(V._lgrad(dom, f, p, quad_tol) - V._lnorm(dom, f, ps, quad_tol))

        exps = (ps,)
    elif kind == "gn":
        if alpha is None:
            raise ParameterError("the GN objective needs alpha")
        sharp = C.gn_constant(dom, p, alpha)
        theta = sharp.theta

        def score(f):
            return math.exp(-V.gn_ratio_log(dom, p, alpha, f, theta, quad_tol))

        exps = V._gn_exponents(p, alpha)
    else:
        raise ParameterError(f"unknown objective {kind!r}; choose from {KINDS}")

    def admissible(tail):
        # f^s r^(n_a-1) and |f'|^p r^(n_a-1) integrable at infinity
        return all(tail * s > n_a for s in exps) and (tail + 1.0) * p > n_a

    return score, 1.0 / sharp.value, admissible


def fit_spline(init: RadialProfile, knots, tail_floor: float) -> tuple[np.ndarray, float]:
    """Knot log-values and tail exponent approximating ``init``."""
    knots = np.asarray(knots, dtype=float)
    with np.errstate(divide="ignore"):
        lv = np.log(np.asarray(init.f(knots), dtype=float))
    top = np.max(lv[np.isfinite(lv)])
    lv = np.maximum(np.nan_to_num(lv, neginf=top - LOG_FLOOR), top - LOG_FLOOR) - top
    tail = init.tail_exponent
    if not math.isfinite(tail):
        # faster than any power: the clipped end knots already carry the decay,
        # and a steep tail would only pin the search against TAIL_CAP
        tail = tail_floor + 2.0
    tail = min(max(tail, tail_floor), TAIL_CAP)
    return lv, float(tail)


def _recenter(prof: RadialProfile, knots, tail: float) -> np.ndarray:
    """Dilate so the e^-1 point of the profile sits at r = 1, then resample the
    knot values.  The quotients ignore dilation; the frozen knots do not, and a
    knee drifting towards the end knots is badly resolved."""
    r = np.geomspace(knots[0] * 1e-2, knots[-1] * 1e2, 4001)
    lv = np.log(np.maximum(np.asarray(prof.f(r), dtype=float), 1e-300))
    below = np.nonzero(lv <= lv[0] - 1.0)[0]
    lam = r[below[0]] if below.size else 1.0
    new = np.log(np.maximum(np.asarray(prof.f(lam * knots), dtype=float), 1e-300))
    new = np.maximum(new - new.max(), -LOG_FLOOR)
    return np.append(np.diff(new, prepend=0.0), tail)


def minimize_quotient(dom: WeightedDomain, kind: str, params: dict, init: RadialProfile,
                      budget: int = 5000, restarts: int = 3, seed: int = 0,
                      knots=None, xatol: float = 1e-7, fatol: float = 1e-12,
                      quad_tol: float = 1e-10, simplex_edge=(0.3, 1.0),
                      round_budget: int | None = None,
                      recenter: bool = True) -> OptimizationRun:
    """Nelder-Mead over 12 knot values plus the tail exponent.

    ``budget`` caps objective evaluations across all restarts.  Each restart
    opens a fresh simplex around the best point so far, with seeded random
    edge lengths.  Running out of budget clears ``converged``; it is not an
    error.
    """
    p = C.as_real(params["p"])
    alpha = params.get("alpha")
    alpha = None if alpha is None else C.as_real(alpha)
    score, sharp_value, admissible = _objective(dom, kind, p, alpha, quad_tol)
    knots = E.default_knots() if knots is None else np.asarray(knots, dtype=float)
    tail_floor = 0.0
    while not admissible(tail_floor + 1e-3):
        tail_floor += 0.05
    tail_floor += 1e-3

    lv0, tail0 = fit_spline(init, knots, tail_floor)
    x0 = np.append(np.diff(lv0, prepend=0.0), tail0)
    history: list[float] = []
    count = [0]

    def build(x):
        lv = np.cumsum(x[:-1])
        return E.spline_profile(knots, lv - np.max(lv), float(x[-1]))

    def fun(x):
        count[0] += 1
        if not admissible(x[-1]) or x[-1] > TAIL_CAP or not np.all(np.isfinite(x)):
            return math.inf
        try:
            val = score(build(x))
        except (SharpIneqError, FloatingPointError, OverflowError, ZeroDivisionError):
            return math.inf
        if not math.isfinite(val):
            return math.inf
        history.append(val)
        return val

    init_value = score(init)
    best_x, best_f = x0, fun(x0)
    rng = np.random.default_rng(seed)
    rounds = max(1, restarts + 1)
    share = max((budget - 1) // rounds, x0.size + 2)
    if round_budget is not None:
        share, rounds = int(round_budget), budget
    iterations, converged = 0, False
    for k in range(rounds):
        left = min(share, budget - count[0])
        if left <= x0.size + 1:
            break
        if k and recenter:
            moved = _recenter(build(best_x), knots, best_x[-1])
            val = fun(moved)
            if val < best_f * (1.0 + 1e-3):
                best_x, best_f = moved, min(val, best_f)
        edge = rng.uniform(*simplex_edge, size=x0.size) * rng.choice([-1.0, 1.0], size=x0.size)
        simplex = np.vstack([best_x] + [best_x + np.eye(x0.size)[i] * edge[i]
                                        for i in range(x0.size)])
        res = minimize(fun, best_x, method="Nelder-Mead",
                       options={"maxfev": left, "initial_simplex": simplex,
                                "xatol": xatol, "fatol": fatol, "adaptive": True})
        iterations += int(res.nit)
        previous = best_f
        if res.fun < best_f:
            best_x, best_f = np.asarray(res.x), float(res.fun)
        # converged once a fresh simplex cannot improve the best value
        if bool(res.success) and previous - best_f <= 1e-10 * best_f:
            converged = True
            break

    if not math.isfinite(best_f):
        # the fitted spline itself was inadmissible and nothing better was found
        best_prof, best_f = init, init_value
    else:
        best_prof = build(best_x)
        if init_value < best_f:
            best_prof, best_f = init, init_value
    out_params = {"n": dom.n, "a": list(dom.a), "norm": format_norm(dom.norm), "p": p}
    if alpha is not None:
        out_params["alpha"] = alpha
    return OptimizationRun(kind, out_params, init, best_prof, best_f, sharp_value,
                           init_value, iterations, count[0], converged, seed, history)


def gaussian_init(scale: float = 1.0) -> RadialProfile:
    """exp(-(r/scale)^2), a generic non-extremal start."""
    return RadialProfile("LogSobExtremal", {"b": 1.0, "s": 1.0 / scale ** 2, "q": 2.0})


def smoothed_indicator(radius: float = 1.0, width: float = 0.3) -> RadialProfile:
    """Plateau of height 1 on [0, radius - width] with a smooth decay after it."""
    r0 = radius - width

    def f(r):
        r = np.asarray(r, dtype=float)
        u = np.clip((r - r0) / width, 0.0, 1.0)
        return np.where(u >= 1.0, 0.0, np.exp(1.0 - 1.0 / np.maximum(1.0 - u * u, 1e-300)))

    def df(r):
        r = np.asarray(r, dtype=float)
        u = np.clip((r - r0) / width, 0.0, 1.0)
        inside = (u > 0) & (u < 1)
        w = np.where(inside, 1.0 - u * u, 1.0)
        val = np.exp(1.0 - 1.0 / w) * (-2.0 * u / w ** 2) / width
        return np.where(inside, val, 0.0)

    return RadialProfile.custom(f, df, radius, (r0,), tail=math.inf,
                                kind="SmoothedIndicator", radius=radius, width=width)
