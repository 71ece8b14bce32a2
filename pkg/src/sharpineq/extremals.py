"""Radial profiles: the extremal families, splines, and perturbations.

A profile is a function of r = ||z||.  Every profile carries an amplitude
``c`` and a dilation ``lam``; the evaluated function is

    f(r) = c * (core(lam r) + sum_i amp_i * bump((lam r - center_i) / width_i))

so dilation and renormalisation never touch the family parameters.  The
optional ``constraint`` records which weighted norm was normalised to 1,
together with the data (n_a, log V_B) needed to redo it after a change.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import bisect

from .domain import WeightedDomain
from .errors import (DomainError, NegativityError, NormalizationError, ParameterError,
                     UnsupportedError)
from .norms import conjugate
from .special import lgamma

__all__ = [
    "RadialProfile", "sobolev_extremal", "gn_extremal", "logsob_extremal",
    "indicator", "euclidean_gn_extremal", "power_profile", "spline_profile",
    "random_spline", "perturb", "bump", "sigma_sobolev", "sigma_gn",
    "sigma_by_bisection", "KINDS",
]

KINDS = ("SobolevExtremal", "GNExtremal", "LogSobExtremal", "Indicator", "Spline",
         "Custom")
NORMALIZATION_TOL = 1e-9


def bump(u):
    """C^inf bump exp(1 - 1/(1 - u^2)) on (-1, 1), peak 1 at u = 0."""
    u = np.asarray(u, dtype=float)
    inside = np.abs(u) < 1.0
    w = np.where(inside, 1.0 - u * u, 1.0)
    return np.where(inside, np.exp(1.0 - 1.0 / w), 0.0)


def _dbump(u):
    u = np.asarray(u, dtype=float)
    inside = np.abs(u) < 1.0
    w = np.where(inside, 1.0 - u * u, 1.0)
    return np.where(inside, -2.0 * u / (w * w) * np.exp(1.0 - 1.0 / w), 0.0)


@dataclass
class _Core:
    f: Callable
    df: Callable
    support: float = math.inf
    breakpoints: tuple = ()
    jumps: tuple = ()          # (radius, size of the downward jump)
    tail: float = math.inf     # algebraic decay exponent; inf = faster


# -- family builders --------------------------------------------------------

def _power_core(p):
    """(sigma + coef r^q)_+^e, evaluated in logs to survive large q."""
    sigma, coef, q, e = (float(p[k]) for k in ("sigma", "coef", "q", "exponent"))
    if not sigma > 0 or not q > 0:
        raise DomainError("power profile needs sigma > 0 and q > 0")
    log_s = math.log(sigma)

    if coef >= 0:
        log_c = math.log(coef) if coef > 0 else -math.inf

        def logbase(r):
            with np.errstate(divide="ignore"):
                lr = np.log(np.asarray(r, dtype=float))
            return lr, np.logaddexp(log_s, log_c + q * lr)

        def f(r):
            return np.exp(e * logbase(r)[1])

        def df(r):
            lr, lb = logbase(r)
            with np.errstate(invalid="ignore"):
                w = np.exp(log_c + (q - 1.0) * lr - lb)
            return np.nan_to_num(e * q * w) * np.exp(e * lb)

        tail = -q * e if (coef > 0 and e < 0) else math.inf
        return _Core(f, df, math.inf, (), (), tail)

    radius = (sigma / -coef) ** (1.0 / q)

    def base(r):
        r = np.asarray(r, dtype=float)
        return np.maximum(sigma + coef * np.minimum(r, radius) ** q, 0.0), r

    def f(r):
        b, r = base(r)
        with np.errstate(divide="ignore"):
            out = np.where(b > 0, b, 1.0) ** e
        return np.where((b > 0) & (r < radius), out, 0.0)

    def df(r):
        b, r = base(r)
        live = (b > 0) & (r < radius)
        safe = np.where(live, b, 1.0)
        return np.where(live, e * coef * q * r ** (q - 1.0) * safe ** (e - 1.0), 0.0)

    return _Core(f, df, radius, (), (), math.inf)


def _logsob_core(p):
    b, s, q = float(p["b"]), float(p["s"]), float(p["q"])

    def f(r):
        r = np.asarray(r, dtype=float)
        return b * np.exp(-s * r ** q)

    def df(r):
        r = np.asarray(r, dtype=float)
        return -b * s * q * r ** (q - 1.0) * np.exp(-s * r ** q)

    return _Core(f, df)


def _indicator_core(p):
    b, R = float(p["b"]), float(p["R"])

    def f(r):
        return np.where(np.asarray(r, dtype=float) <= R, b, 0.0)

    def df(r):
        return np.zeros_like(np.asarray(r, dtype=float))

    return _Core(f, df, R, (), ((R, b),))


def _spline_core(p):
    """exp(P(log r)) with P monotone-cubic through the knots, flat below the
    first knot and r^(-tail) beyond the last; optional smooth cutoff."""
    lr = np.log(np.asarray(p["knots"], dtype=float))
    lv = np.asarray(p["log_values"], dtype=float)
    k = float(p["tail"])
    if lr.size < 2 or lr.size != lv.size or np.any(np.diff(lr) <= 0):
        raise DomainError("spline needs >= 2 increasing knots with one value each")
    interp = PchipInterpolator(lr, lv, extrapolate=False)
    dinterp = interp.derivative()
    r0, r1 = math.exp(lr[0]), math.exp(lr[-1])
    cut = p.get("cutoff")

    def logf(r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            x = np.log(np.clip(r, r0, None))
        inner = interp(np.clip(x, lr[0], lr[-1]))
        out = np.where(r <= r0, lv[0], inner)
        return np.where(r > r1, lv[-1] - k * (x - lr[-1]), out), r, x

    def dlogf(r, x):
        d = dinterp(np.clip(x, lr[0], lr[-1]))
        d = np.where(r > r1, -k, d)
        d = np.where(r <= r0, 0.0, d)
        return d / np.where(r > 0, r, 1.0)

    def cutoff(r):
        if cut is None:
            return 1.0, 0.0
        R, m = float(cut[0]), float(cut[1])
        u = np.clip(r / R, 0.0, 1.0)
        g = (1.0 - u * u) ** m
        dg = -2.0 * m * u * (1.0 - u * u) ** (m - 1.0) / R
        return g, dg

    def f(r):
        lf, r, _ = logf(r)
        return np.exp(lf) * cutoff(r)[0]

    def df(r):
        lf, r, x = logf(r)
        g, dg = cutoff(r)
        v = np.exp(lf)
        return v * dlogf(r, x) * g + v * dg

    support = float(cut[0]) if cut is not None else math.inf
    bps = tuple(float(x) for x in np.exp(lr) if x < support)
    return _Core(f, df, support, bps, (), math.inf if cut is not None else k)


_BUILDERS = {
    "SobolevExtremal": _power_core,
    "GNExtremal": _power_core,
    "LogSobExtremal": _logsob_core,
    "Indicator": _indicator_core,
    "Spline": _spline_core,
}


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """A nonnegative function of the norm, with exact derivative.

    ``params`` always holds ``c`` (amplitude) and ``lam`` (dilation) besides the
    family parameters; ``bumps`` lists (center, width, amplitude) triples and
    ``constraint`` the normalised weighted norm.
    """

    kind: str
    params: dict
    _custom: _Core | None = field(default=None, repr=False)

    def __post_init__(self):
        params = dict(self.params)
        params.setdefault("c", 1.0)
        params.setdefault("lam", 1.0)
        params.setdefault("bumps", [])
        object.__setattr__(self, "params", params)
        if self.kind == "Custom":
            if self._custom is None:
                raise UnsupportedError("Custom profiles are built with RadialProfile.custom")
            core = self._custom
        elif self.kind in _BUILDERS:
            core = _BUILDERS[self.kind](params)
        else:
            raise DomainError(f"unknown profile kind {self.kind!r}")
        if not (params["lam"] > 0) or not (params["c"] > 0):
            raise DomainError("amplitude and dilation must be positive")
        object.__setattr__(self, "_core", core)

    @classmethod
    def custom(cls, f, df, support_radius=math.inf, breakpoints=(), tail=math.inf,
               **params):
        core = _Core(f, df, float(support_radius), tuple(breakpoints), (), tail)
        return cls("Custom", params, core)

    # -- evaluation --------------------------------------------------------

    @property
    def c(self) -> float:
        return float(self.params["c"])

    @property
    def lam(self) -> float:
        return float(self.params["lam"])

    @property
    def constraint(self):
        return self.params.get("constraint")

    def _bumped(self, s, deriv):
        out = 0.0
        for center, width, amp in self.params["bumps"]:
            u = (s - center) / width
            out = out + amp * (_dbump(u) / width if deriv else bump(u))
        return out

    def f(self, r):
        s = self.lam * np.asarray(r, dtype=float)
        out = self.c * (self._core.f(s) + self._bumped(s, False))
        return float(out) if np.ndim(out) == 0 else out

    def df(self, r):
        s = self.lam * np.asarray(r, dtype=float)
        out = self.c * self.lam * (self._core.df(s) + self._bumped(s, True))
        return float(out) if np.ndim(out) == 0 else out

    __call__ = f

    @property
    def support_radius(self) -> float:
        sup = self._core.support
        for center, width, _ in self.params["bumps"]:
            sup = max(sup, center + width) if math.isfinite(sup) else sup
        return sup / self.lam

    @property
    def breakpoints(self) -> tuple:
        pts = list(self._core.breakpoints)
        for center, width, _ in self.params["bumps"]:
            pts += [center - width, center, center + width]
        return tuple(sorted(x / self.lam for x in pts if x > 0))

    @property
    def jumps(self) -> tuple:
        """(radius, downward jump of f) pairs for piecewise-constant profiles."""
        return tuple((R / self.lam, self.c * j) for R, j in self._core.jumps)

    @property
    def tail_exponent(self) -> float:
        return self._core.tail

    # -- modifications -----------------------------------------------------

    def _with(self, **changes) -> "RadialProfile":
        params = dict(self.params)
        params.update(changes)
        return RadialProfile(self.kind, params, self._custom)

    def scaled(self, factor: float) -> "RadialProfile":
        return self._with(c=self.c * factor)

    def dilate(self, lam: float, renormalize: bool = True) -> "RadialProfile":
        """r -> f(lam r), renormalised to the constraint if there is one."""
        out = self._with(lam=self.lam * lam)
        return out.normalized() if (renormalize and self.constraint) else out

    def with_constraint(self, dom: WeightedDomain, exponent: float) -> "RadialProfile":
        return self._with(constraint={"exponent": float(exponent), "n_a": dom.n_a,
                                      "log_ball": dom.log_ball_measure()})

    def constraint_integral(self, tol: float = 1e-11) -> float:
        cons = self.constraint
        if not cons:
            raise NormalizationError("profile has no designated constraint")
        return _radial(self, cons["n_a"], cons["log_ball"], cons["exponent"], tol)

    def normalized(self, tol: float = 1e-11) -> "RadialProfile":
        cons = self.constraint
        if not cons:
            raise NormalizationError("profile has no designated constraint")
        val = self.constraint_integral(tol)
        if not (val > 0 and math.isfinite(val)):
            raise NormalizationError(f"constraint integral is {val}")
        return self.scaled(val ** (-1.0 / cons["exponent"]))

    # -- serialisation -----------------------------------------------------

    def to_json(self, grid=None) -> dict:
        if self.kind == "Custom" and grid is None:
            raise UnsupportedError("Custom profiles serialise only as sampled grids")
        out = {"kind": self.kind, "params": _jsonable(self.params)}
        if grid is not None:
            r = np.asarray(grid, dtype=float)
            out["grid"] = {"r": r.tolist(), "f": np.atleast_1d(self.f(r)).tolist()}
        return out

    @classmethod
    def from_json(cls, data: dict) -> "RadialProfile":
        if data["kind"] == "Custom":
            raise UnsupportedError("Custom profiles cannot be rebuilt from JSON")
        params = dict(data["params"])
        params["bumps"] = [tuple(b) for b in params.get("bumps", [])]
        return cls(data["kind"], params)

    def describe(self) -> str:
        keys = [k for k in self.params if k not in ("bumps", "constraint", "knots",
                                                    "log_values")]
        inner = ", ".join(f"{k}={self.params[k]:.6g}" for k in keys
                          if isinstance(self.params[k], (int, float)))
        extra = f", {len(self.params['bumps'])} bumps" if self.params["bumps"] else ""
        return f"{self.kind}({inner}{extra})"


def _radial(profile, n_a, log_ball, exponent, tol):
    """n_a V int f^exponent r^(n_a - 1) dr for a profile (support-aware)."""
    from .quadrature import integrate_halfline, integrate_interval

    scale = n_a * math.exp(log_ball)

    def integrand(r):
        v = profile.f(r)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(v > 0, np.abs(v) ** exponent, 0.0)
        return out * np.asarray(r, dtype=float) ** (n_a - 1.0)

    sup = profile.support_radius
    if math.isfinite(sup):
        res = integrate_interval(integrand, 0.0, sup, tol, breakpoints=profile.breakpoints)
    else:
        res = integrate_halfline(integrand, tol, breakpoints=profile.breakpoints)
    return res.value * scale


# -- parameter validation -----------------------------------------------------

def _sobolev_range(dom, p):
    if not (1.0 < p < dom.n_a):
        raise ParameterError(f"need 1 < p < n_a = {dom.n_a:g}, got p = {p:g}")


def _gn_range(dom, p, alpha):
    _sobolev_range(dom, p)
    top = dom.n_a / (dom.n_a - p)
    if alpha == 1.0:
        raise ParameterError("alpha = 1 is excluded")
    if not (0.0 < alpha <= top * (1.0 + 1e-14)):
        raise ParameterError(f"need 0 < alpha <= n_a/(n_a-p) = {top:g}, got {alpha:g}")


# -- normalising constants ------------------------------------------------------

def sigma_sobolev(dom: WeightedDomain, p: float) -> float:
    """sigma with int (sigma + r^q)^(-n_a) = 1 over (Sigma, sigma-weight)."""
    _sobolev_range(dom, p)
    n_a, q = dom.n_a, conjugate(p)
    lv = dom.log_ball_measure()
    return math.exp(p / n_a * (lgamma(n_a / p) + lgamma(n_a / q + 1.0)
                               - lgamma(n_a) + lv))


def sigma_gn(dom: WeightedDomain, p: float, alpha: float) -> float:
    """sigma with int h^(alpha p) = 1 for h = (sigma + (alpha-1) r^q)_+^(1/(1-alpha))."""
    _gn_range(dom, p, alpha)
    n_a, q = dom.n_a, conjugate(p)
    lv = dom.log_ball_measure()
    if alpha > 1:
        e = alpha * p / (alpha - 1.0)
        # int = V sigma^(n_a/q - e) (alpha-1)^(-n_a/q) Gamma(n_a/q+1) Gamma(e-n_a/q)/Gamma(e)
        lk = (lv - n_a / q * math.log(alpha - 1.0) + lgamma(n_a / q + 1.0)
              + lgamma(e - n_a / q) - lgamma(e))
        return math.exp(lk / (e - n_a / q))
    e = alpha * p / (1.0 - alpha)
    # int = V sigma^(e + n_a/q) (1-alpha)^(-n_a/q) Gamma(n_a/q+1) Gamma(e+1)/Gamma(e+1+n_a/q)
    lk = (lv - n_a / q * math.log(1.0 - alpha) + lgamma(n_a / q + 1.0)
          + lgamma(e + 1.0) - lgamma(e + 1.0 + n_a / q))
    return math.exp(-lk / (e + n_a / q))


def sigma_by_bisection(dom: WeightedDomain, family: str, p: float, alpha=None,
                       tol: float = 1e-12) -> float:
    """Independent root-solve of the normalisation by bisection on log sigma.

    ``family`` is "sobolev" or "gn"; only quadrature of the un-normalised
    profile is used, none of the Gamma formulas.
    """
    q = conjugate(p)
    if family == "sobolev":
        _sobolev_range(dom, p)
        coef, e, s = 1.0, -(dom.n_a - p) / p, dom.n_a * p / (dom.n_a - p)
    elif family == "gn":
        _gn_range(dom, p, alpha)
        coef, e, s = alpha - 1.0, 1.0 / (1.0 - alpha), alpha * p
    else:
        raise DomainError(f"unknown family {family!r}")
    lv = dom.log_ball_measure()

    def resid(log_sigma):
        prof = power_profile(math.exp(log_sigma), coef, q, e)
        return math.log(_radial(prof, dom.n_a, lv, s, 1e-13))

    lo, hi = -5.0, 5.0
    while resid(lo) * resid(hi) > 0:
        lo, hi = lo - 10.0, hi + 10.0
        if hi > 200:
            raise NormalizationError("could not bracket the normalising sigma")
    return math.exp(bisect(resid, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps,
                           maxiter=400))


def _check_normalization(prof, sigma_formula, dom, family, p, alpha, crosscheck):
    val = prof.constraint_integral()
    if abs(val - 1.0) > NORMALIZATION_TOL:
        raise NormalizationError(
            f"{prof.kind}: normalisation integral {val!r} differs from 1 by "
            f"{abs(val - 1.0):.3e} (sigma = {sigma_formula!r})")
    if crosscheck:
        sb = sigma_by_bisection(dom, family, p, alpha)
        if abs(sb / sigma_formula - 1.0) > 1e-8:
            raise NormalizationError(
                f"{prof.kind}: sigma formula {sigma_formula!r} disagrees with the "
                f"bisection root {sb!r}")
    return prof


# -- constructors ------------------------------------------------------------------

def power_profile(sigma, coef, q, exponent, kind="GNExtremal", **extra) -> RadialProfile:
    """(sigma + coef r^q)_+^exponent."""
    params = {"sigma": float(sigma), "coef": float(coef), "q": float(q),
              "exponent": float(exponent)}
    params.update(extra)
    return RadialProfile(kind, params)


def sobolev_extremal(dom: WeightedDomain, p: float, crosscheck: bool = False) -> RadialProfile:
    """(sigma + r^q)^(-(n_a-p)/p) with int h^(p*) = 1."""
    p = float(p)
    sigma = sigma_sobolev(dom, p)
    q = conjugate(p)
    prof = power_profile(sigma, 1.0, q, -(dom.n_a - p) / p, kind="SobolevExtremal",
                         p=p)
    prof = prof.with_constraint(dom, dom.n_a * p / (dom.n_a - p))
    return _check_normalization(prof, sigma, dom, "sobolev", p, None, crosscheck)


def gn_extremal(dom: WeightedDomain, p: float, alpha: float,
                crosscheck: bool = False) -> RadialProfile:
    """(sigma + (alpha-1) r^q)_+^(1/(1-alpha)) with int h^(alpha p) = 1."""
    p, alpha = float(p), float(alpha)
    sigma = sigma_gn(dom, p, alpha)
    q = conjugate(p)
    prof = power_profile(sigma, alpha - 1.0, q, 1.0 / (1.0 - alpha), p=p, alpha=alpha)
    prof = prof.with_constraint(dom, alpha * p)
    return _check_normalization(prof, sigma, dom, "gn", p, alpha, crosscheck)


def euclidean_gn_extremal(n: int, p: float, alpha: float, norm=None) -> RadialProfile:
    """(1 + ||x||^q)^(-1/(alpha-1)) on R^n, un-normalised."""
    q = conjugate(float(p))
    return power_profile(1.0, 1.0, q, -1.0 / (alpha - 1.0), p=float(p),
                         alpha=float(alpha))


def logsob_extremal(dom: WeightedDomain, p: float, scale: float = 1.0) -> RadialProfile:
    """b exp(-scale r^q) (p > 1) or the ball indicator b 1[r <= 1/scale]
    (p = 1), normalised so that int f^p = 1."""
    p, scale = float(p), float(scale)
    if not scale > 0:
        raise DomainError("scale must be positive")
    if p < 1:
        raise ParameterError(f"need p >= 1, got {p:g}")
    n_a, lv = dom.n_a, dom.log_ball_measure()
    if p == 1.0:
        b = math.exp(n_a * math.log(scale) - lv)
        return indicator(dom, 1.0 / scale, b)
    q = conjugate(p)
    lb = -(lv + lgamma(n_a / q + 1.0) - n_a / q * math.log(p * scale)) / p
    prof = RadialProfile("LogSobExtremal", {"b": math.exp(lb), "s": scale, "q": q,
                                            "p": p})
    prof = prof.with_constraint(dom, p)
    val = prof.constraint_integral()
    if abs(val - 1.0) > NORMALIZATION_TOL:
        raise NormalizationError(f"log-Sobolev normalisation integral is {val!r}")
    return prof


def indicator(dom: WeightedDomain, radius: float = 1.0, height: float = 1.0) -> RadialProfile:
    prof = RadialProfile("Indicator", {"b": float(height), "R": float(radius)})
    return prof.with_constraint(dom, 1.0)


def spline_profile(knots, log_values, tail: float, cutoff=None) -> RadialProfile:
    params = {"knots": [float(x) for x in knots],
              "log_values": [float(x) for x in log_values], "tail": float(tail)}
    if cutoff is not None:
        params["cutoff"] = [float(cutoff[0]), float(cutoff[1])]
    return RadialProfile("Spline", params)


def default_knots(count: int = 12, r_min: float = 0.05, r_max: float = 20.0):
    return np.geomspace(r_min, r_max, count)


def random_spline(rng: np.random.Generator, tail_range=(1.0, 6.0), knots=None,
                  spread: float = 3.0, cutoff=None) -> RadialProfile:
    """Spline through log-uniform knot values, mostly decreasing.

    Values are a decreasing trend with log-uniform noise; ``tail_range`` must
    be chosen by the caller so the norms of interest are finite.
    """
    knots = default_knots() if knots is None else np.asarray(knots, dtype=float)
    trend = -np.linspace(0.0, spread, knots.size) * rng.uniform(0.3, 1.5)
    noise = rng.uniform(-0.5, 0.5, knots.size)
    tail = rng.uniform(*tail_range)
    return spline_profile(knots, trend + noise, tail, cutoff)


def perturb(profile: RadialProfile, bump_spec, renormalize: bool = True) -> RadialProfile:
    """Add amplitude * bump((r - center)/width) and renormalise.

    ``bump_spec`` is (center, width, amplitude) in the profile's own radius
    units (after dilation and amplitude).
    """
    center, width, amp = (float(x) for x in bump_spec)
    if not width > 0:
        raise DomainError("bump width must be positive")
    if amp == 0.0:
        return profile
    lam, c = profile.lam, profile.c
    new = (center * lam, width * lam, amp / c)
    out = profile._with(bumps=list(profile.params["bumps"]) + [new])
    if amp < 0:
        r = np.linspace(max(center - width, 0.0), center + width, 2001)
        if np.min(out.f(r)) < 0:
            raise NegativityError(
                f"bump {bump_spec} makes the profile negative (min {np.min(out.f(r)):.3e})")
    if renormalize and out.constraint:
        out = out.normalized()
    return out
