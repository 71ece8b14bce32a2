"""Numeric evaluation of the inequalities against their sharp constants.

Every check returns a :class:`QuotientReport`.  Sign convention: ``deficit``
is always "right side minus left side" of the inequality in the direction it
holds, so ``deficit >= -tolerance`` is the inequality itself:

* quotient inequalities (Sobolev, GN):  deficit = rhs / lhs - 1  (relative)
* additive inequalities (log-Sobolev, duality, transport):  deficit = rhs - lhs

For a radial f the dual norm of the gradient is |f'(r)| whatever the norm,
because the norm gradient has unit dual norm.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import constants as C
from .domain import WeightedDomain
from .errors import NormalizationError, ParameterError
from .extremals import RadialProfile, euclidean_gn_extremal
from .norms import LqNorm, conjugate, format_norm
from .quadrature import DEFAULT_TOL, integrate_interval, integrate_tensor

__all__ = [
    "QuotientReport", "norm_integral", "gradient_integral", "sobolev_quotient",
    "gn_quotients", "euclidean_gn_quotient", "logsob_deficit", "duality_gap_sobolev",
    "duality_gap_gn", "dimension_reduction_check", "tensorization_limit",
    "theta_solve", "gn_ratio_log", "sobolev_quotient_tensor",
]

EQUALITY_TOL = 1e-7


@dataclass
class QuotientReport:
    inequality_kind: str
    profile: str
    lhs: float
    rhs: float
    sharp_value: float
    deficit: float
    tolerance: float = 1e-8
    passed: bool = field(init=False)
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        self.passed = bool(self.deficit >= -self.tolerance)

    @property
    def quotient(self):
        return self.extras.get("quotient")

    def to_record(self) -> dict:
        out = asdict(self)
        out["pass"] = out.pop("passed")
        return out


# -- radial integrals --------------------------------------------------------------

def _radial(dom: WeightedDomain, func, f: RadialProfile, shift=0.0, tol=DEFAULT_TOL,
            atol=0.0):
    return dom.radial_integral(func, moment_shift=shift, tol=tol, atol=atol,
                               support=f.support_radius, breakpoints=f.breakpoints)


def norm_integral(dom: WeightedDomain, f: RadialProfile, s: float, shift: float = 0.0,
                  tol: float = DEFAULT_TOL) -> float:
    """int f^s ||z||^shift sigma over the support of f (s may be negative)."""

    def g(r):
        v = np.asarray(f.f(r), dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(v > 0, np.abs(v) ** s, 0.0)

    return _radial(dom, g, f, shift, tol)


def gradient_integral(dom: WeightedDomain, f: RadialProfile, p: float,
                      tol: float = DEFAULT_TOL) -> float:
    """int ||grad f||_*^p sigma; for p = 1 jumps add their weighted perimeter."""

    def g(r):
        return np.abs(np.asarray(f.df(r), dtype=float)) ** p

    total = _radial(dom, g, f, 0.0, tol)
    if f.jumps:
        if p != 1:
            raise ParameterError("a profile with jumps has infinite p-energy for p > 1")
        per = dom.ball_perimeter()
        total += sum(abs(j) * per * R ** (dom.n_a - 1.0) for R, j in f.jumps)
    return total


def _lnorm(dom, f, s, tol):
    return math.log(norm_integral(dom, f, s, tol=tol)) / s


def _lgrad(dom, f, p, tol):
    return math.log(gradient_integral(dom, f, p, tol)) / p


# -- Sobolev ------------------------------------------------------------------------

def sobolev_quotient(dom: WeightedDomain, p: float, f: RadialProfile,
                     tol: float = 1e-8, quad_tol: float = DEFAULT_TOL) -> QuotientReport:
    """||f||_{p*} <= S ||grad f||_p; p = 1 uses the isoperimetric constant."""
    p = C.as_real(p)
    if p == 1.0:
        sharp = C.sobolev_l1_constant(dom)
        ps = dom.n_a / (dom.n_a - 1.0)
    else:
        sharp = C.sobolev_constant(dom, p)
        ps = dom.n_a * p / (dom.n_a - p)
    ln_f = _lnorm(dom, f, ps, quad_tol)
    ln_g = _lgrad(dom, f, p, quad_tol)
    lq = ln_g - ln_f
    deficit = math.expm1(lq + sharp.log_value)
    return QuotientReport("sobolev", f.describe(), math.exp(ln_f),
                          math.exp(sharp.log_value + ln_g), 1.0 / sharp.value, deficit,
                          tol, extras={"quotient": math.exp(lq), "p": p, "p_star": ps})


def sobolev_quotient_tensor(dom: WeightedDomain, p: float, f: RadialProfile, shift,
                            tol: float = 1e-9, **quad) -> float:
    """Sobolev quotient of z -> f(||z - shift||) restricted to Sigma, by tensor
    quadrature (n <= 3).  The shift may move any coordinate."""
    from .norms import norm as _norm

    shift = np.asarray(shift, dtype=float)
    ps = dom.n_a * p / (dom.n_a - p)

    def rad(z):
        return np.maximum(_norm(dom.norm, z - shift), 1e-300)

    def grad_p(z):
        # |f'(r)| ||grad ||z - shift|| ||_* = |f'(r)| at smooth points
        return np.abs(f.df(rad(z))) ** p

    top = integrate_tensor(dom, lambda z: f.f(rad(z)) ** ps, tol=tol, **quad).value
    bottom = integrate_tensor(dom, grad_p, tol=tol, **quad).value
    return bottom ** (1.0 / p) / top ** (1.0 / ps)


# -- Gagliardo-Nirenberg -------------------------------------------------------

def _gn_exponents(p, alpha):
    return alpha * p, alpha * p - alpha + 1.0


def gn_ratio_log(dom, p, alpha, f, theta, quad_tol=DEFAULT_TOL):
    """log of lhs-norm / (||grad f||^theta * other-norm^(1-theta))."""
    ap, pa = _gn_exponents(p, alpha)
    lg = _lgrad(dom, f, p, quad_tol)
    if alpha > 1:
        return _lnorm(dom, f, ap, quad_tol) - theta * lg - (1 - theta) * _lnorm(dom, f, pa, quad_tol)
    return _lnorm(dom, f, pa, quad_tol) - theta * lg - (1 - theta) * _lnorm(dom, f, ap, quad_tol)


def gn_quotients(dom: WeightedDomain, p: float, alpha: float, f: RadialProfile,
                 tol: float = 1e-8, theta: float | None = None,
                 quad_tol: float = DEFAULT_TOL) -> QuotientReport:
    """alpha > 1: ||f||_{alpha p} <= G ||grad f||^theta ||f||_{p_alpha}^(1-theta);
    alpha < 1: ||f||_{p_alpha} <= N ||grad f||^theta ||f||_{alpha p}^(1-theta)."""
    p, alpha = C.as_real(p), C.as_real(alpha)
    sharp = C.gn_constant(dom, p, alpha)
    th = sharp.theta if theta is None else theta
    ap, pa = _gn_exponents(p, alpha)
    n_ap, n_pa = _lnorm(dom, f, ap, quad_tol), _lnorm(dom, f, pa, quad_tol)
    lg = _lgrad(dom, f, p, quad_tol)
    if alpha > 1:
        lhs, rhs = n_ap, sharp.log_value + th * lg + (1 - th) * n_pa
    else:
        lhs, rhs = n_pa, sharp.log_value + th * lg + (1 - th) * n_ap
    return QuotientReport(sharp.kind, f.describe(), math.exp(lhs), math.exp(rhs),
                          sharp.value, math.expm1(rhs - lhs), tol,
                          extras={"theta": th, "ratio": math.exp(lhs - rhs + sharp.log_value),
                                  "log_grad": lg, "log_norm_ap": n_ap, "log_norm_pa": n_pa})


def euclidean_gn_quotient(n: int, p: float, a: float, f: RadialProfile, norm=None,
                          tol: float = 1e-8, quad_tol: float = DEFAULT_TOL) -> QuotientReport:
    """Euclidean GN inequality on R^n with the reduction exponents.

    Branch (ii) has alpha p < 0 and p_alpha < 0; the "norms" are then
    (int f^r)^(1/r) with r < 0.
    """
    norm = LqNorm(2.0, n) if norm is None else norm
    sharp = C.euclidean_gn_constant(n, p, a, norm)
    dom = WeightedDomain(n, (), norm)
    ap, pa = _gn_exponents(sharp.params["p"], sharp.alpha)
    n_ap, n_pa = _lnorm(dom, f, ap, quad_tol), _lnorm(dom, f, pa, quad_tol)
    lg = _lgrad(dom, f, sharp.params["p"], quad_tol)
    th = sharp.theta
    if sharp.branch == "i":
        lhs, rhs = n_ap, sharp.log_value + th * lg + (1 - th) * n_pa
    else:
        lhs, rhs = n_pa, sharp.log_value + th * lg + (1 - th) * n_ap
    return QuotientReport(sharp.kind, f.describe(), math.exp(lhs), math.exp(rhs),
                          sharp.value, math.expm1(rhs - lhs), tol,
                          extras={"theta": th, "alpha": sharp.alpha, "branch": sharp.branch})


def theta_solve(dom: WeightedDomain, p: float, alpha: float, f: RadialProfile,
                lams=(0.5, 1.0, 2.0), quad_tol: float = 1e-13) -> dict:
    """Find the theta that makes the GN ratio dilation invariant.

    Evaluates the three log-norms of f(lam r) by quadrature for each lam and
    solves the linear slope condition by least squares.
    """
    ap, pa = _gn_exponents(p, alpha)
    top, other = (ap, pa) if alpha > 1 else (pa, ap)
    rows = []
    for lam in lams:
        g = f.dilate(lam, renormalize=False)
        rows.append((math.log(lam), _lnorm(dom, g, top, quad_tol),
                     _lgrad(dom, g, p, quad_tol), _lnorm(dom, g, other, quad_tol)))
    x, A, G, B = (np.array(c) for c in zip(*rows))
    # A - B = theta (G - B) + const
    X = np.column_stack([G - B, np.ones_like(x)])
    sol, *_ = np.linalg.lstsq(X, A - B, rcond=None)
    theta = float(sol[0])
    formula = C.gn_theta(dom.n_a, p, alpha)
    resid = A - B - X @ sol
    return {"theta": theta, "theta_formula": formula, "abs_diff": abs(theta - formula),
            "residual": float(np.max(np.abs(resid))), "lams": list(lams)}


# -- log-Sobolev ---------------------------------------------------------------------

def logsob_deficit(dom: WeightedDomain, p: float, f: RadialProfile,
                   tol: float = 1e-8, quad_tol: float = DEFAULT_TOL) -> QuotientReport:
    """int f^p ln f^p <= (n_a/p) ln(L int ||grad f||_*^p), after scaling to
    int f^p = 1."""
    p = C.as_real(p)
    sharp = C.logsob_constant(dom, p)
    mass = norm_integral(dom, f, p, tol=quad_tol)
    if not (mass > 0 and math.isfinite(mass)):
        raise NormalizationError("int f^p is not positive and finite")
    f = f.scaled(mass ** (-1.0 / p))

    def ent(r):
        v = np.asarray(f.f(r), dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(v > 0, p * v ** p * np.log(np.where(v > 0, v, 1.0)), 0.0)

    # the entropy integrand changes sign; measure its error against int f^p = 1
    lhs = _radial(dom, ent, f, 0.0, quad_tol, atol=10.0 * quad_tol)
    rhs = dom.n_a / p * (sharp.log_value + math.log(gradient_integral(dom, f, p, quad_tol)))
    return QuotientReport("logsob", f.describe(), lhs, rhs, sharp.value, rhs - lhs, tol,
                          extras={"mass": mass})


# -- duality principles ---------------------------------------------------------------

def _check_unit(dom, f, s, what, tol=1e-8):
    val = norm_integral(dom, f, s)
    if abs(val - 1.0) > tol:
        raise NormalizationError(f"{what}: int f^{s:g} = {val!r}, expected 1")


def duality_gap_sobolev(dom: WeightedDomain, p: float, f: RadialProfile,
                        g: RadialProfile, tol: float = 1e-8) -> QuotientReport:
    """int g^(p*(1-1/n_a)) / (int ||y||^q g^p*)^(1/q)
    <= p(n_a-1)/(n_a(n_a-p)) ||grad f||_p  for ||f||_p* = ||g||_p* = 1."""
    p = C.as_real(p)
    n_a, q = dom.n_a, conjugate(p)
    if not 1.0 < p < n_a:
        raise ParameterError(f"need 1 < p < n_a, got {p:g}")
    ps = n_a * p / (n_a - p)
    _check_unit(dom, f, ps, "f")
    _check_unit(dom, g, ps, "g")
    num = norm_integral(dom, g, ps * (1.0 - 1.0 / n_a))
    mom = norm_integral(dom, g, ps, shift=q)
    lhs = num / mom ** (1.0 / q)
    rhs = p * (n_a - 1.0) / (n_a * (n_a - p)) * gradient_integral(dom, f, p) ** (1.0 / p)
    return QuotientReport("duality-sobolev", f"{f.describe()} | {g.describe()}", lhs, rhs,
                          1.0 / C.sobolev_constant(dom, p).value, rhs - lhs, tol)


def duality_gap_gn(dom: WeightedDomain, p: float, alpha: float, f: RadialProfile,
                   g: RadialProfile, mu: float | None = None,
                   tol: float = 1e-8) -> QuotientReport:
    """Non-homogeneous GN duality inequality for ||f||_{alpha p} = ||g||_{alpha p} = 1:

    alpha p/((alpha-1) p_a) int g^p_a - (mu^q/q) int g^(alpha p) ||y||^q
      <= (alpha p - n_a(alpha-1))/((alpha-1) p_a) int f^p_a + 1/(p mu^p) int ||grad f||^p,

    with equality on the extremal pair at mu = q^(1/q) (the default).
    """
    p, alpha = C.as_real(p), C.as_real(alpha)
    C.gn_constant(dom, p, alpha)  # range check
    n_a, q = dom.n_a, conjugate(p)
    mu = q ** (1.0 / q) if mu is None else float(mu)
    if not mu > 0:
        raise ParameterError("mu must be positive")
    ap, pa = _gn_exponents(p, alpha)
    _check_unit(dom, f, ap, "f")
    _check_unit(dom, g, ap, "g")
    k = (alpha - 1.0) * pa
    lhs = alpha * p / k * norm_integral(dom, g, pa) \
        - mu ** q / q * norm_integral(dom, g, ap, shift=q)
    rhs = (alpha * p - n_a * (alpha - 1.0)) / k * norm_integral(dom, f, pa) \
        + gradient_integral(dom, f, p) / (p * mu ** p)
    return QuotientReport("duality-gn", f"{f.describe()} | {g.describe()}", lhs, rhs,
                          math.nan, rhs - lhs, tol, extras={"mu": mu})


# -- dimension reduction --------------------------------------------------------------

def dimension_reduction_check(n: int, p: float, a: float, norm=None,
                              tol_assembly: float = 1e-10,
                              tol_equality: float = 1e-8) -> dict:
    """Closed-form Euclidean GN constant vs its assembly from the Sobolev
    constant one dimension up, plus the extremal quotient on R^n."""
    norm = LqNorm(2.0, n) if norm is None else norm
    p, a = C.as_real(p), C.as_real(a)
    closed = C.euclidean_gn_constant(n, p, a, norm)
    built = C.assembled_gn_constant(n, p, a, norm)
    q = conjugate(p)
    N = n + 1.0 + a
    s1 = integrate_interval(lambda t: t ** a * (1 + t ** q) ** (-N), 0, 1, 1e-13).value \
        + integrate_interval(lambda u: u ** (-a - 2) * (1 + u ** -q) ** (-N), 0, 1, 1e-13).value
    s3 = integrate_interval(lambda t: t ** (q + a) * (1 + t ** q) ** (-N), 0, 1, 1e-13).value \
        + integrate_interval(lambda u: u ** (-q - a - 2) * (1 + u ** -q) ** (-N), 0, 1, 1e-13).value
    f = euclidean_gn_extremal(n, p, closed.alpha)
    rep = euclidean_gn_quotient(n, p, a, f, norm)
    rel_asm = abs(built["log_value"] - closed.log_value)
    out = {
        "n": n, "p": p, "a": a, "norm": format_norm(norm), "branch": closed.branch,
        "alpha": closed.alpha, "theta": closed.theta, "closed_form": closed.value,
        "assembled": built["value"], "assembly_log_diff": rel_asm,
        "theta_assembled": built["theta"],
        "S1": closed.extras["S1"], "S2": closed.extras["S2"], "S3": closed.extras["S3"],
        "S1_quadrature": s1, "S3_quadrature": s3,
        "extremal_deficit": rep.deficit,
        "pass_assembly": rel_asm <= tol_assembly,
        "pass_equality": abs(rep.deficit) <= tol_equality,
    }
    out["pass"] = out["pass_assembly"] and out["pass_equality"]
    return out


# -- tensorisation -----------------------------------------------------------------------

def tensorization_limit(n: int, a: float, p: float, k_max: int, norm=None, ks=None) -> dict:
    """c_k = k^(1/p) S(nk, k a, p) on the k-fold product against its limit."""
    norm = LqNorm(2.0, n) if norm is None else norm
    dom = WeightedDomain(n, (a,) if a is not None else (), norm)
    p = C.as_real(p)
    ks = list(range(1, k_max + 1)) if ks is None else list(ks)
    ll = C.logsob_limit_log(dom.n_a, dom.log_ball_measure(), p)
    rows = []
    for k in ks:
        if k * dom.n_a <= p:
            continue
        lc = C.tensor_sobolev_log(dom, k, p)
        rows.append({"k": k, "c_k": math.exp(lc), "limit": math.exp(ll),
                     "rel_gap": abs(math.expm1(lc - ll))})
    gaps = [r["rel_gap"] for r in rows if r["k"] >= 2]
    monotone = all(x >= y for x, y in zip(gaps, gaps[1:]))
    return {"n": n, "a": a, "p": p, "limit": math.exp(ll), "rows": rows,
            "monotone_from_2": monotone}
