"""Sharp constants of the weighted Sobolev, Gagliardo-Nirenberg, isoperimetric
and L^p log-Sobolev inequalities, assembled in the log domain.

Notation: n_a is the fractional dimension, V = V_B the weighted measure of the
unit ball, q = p/(p-1), p* = n_a p/(n_a - p) and p_alpha = alpha p - alpha + 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .domain import WeightedDomain
from .errors import DomainError, ParameterError
from .norms import LqNorm, ProductNorm, conjugate
from .special import lbeta, lgamma

__all__ = [
    "SharpConstant", "as_real", "sobolev_constant", "sobolev_l1_constant",
    "gn_constant", "gn_theta", "logsob_constant", "euclidean_gn_alpha",
    "euclidean_gn_constant", "euclidean_gn_critical_p", "assembled_gn_constant",
    "log_sobolev_from_data", "tensor_log_ball", "tensor_log_ball_closed",
    "tensor_sobolev_log", "logsob_limit_log",
]

GN_KINDS = ("GNsuper", "GNsub", "EuclideanGN", "EuclideanGNneg")


def as_real(x) -> float:
    """Accept floats, ints, Fractions and strings like "3/2" (converted once)."""
    if isinstance(x, str):
        x = Fraction(x.strip())
    return float(x)


@dataclass(frozen=True)
class SharpConstant:
    kind: str
    params: dict
    log_value: float
    theta: float | None = None
    alpha: float | None = None
    branch: str | None = None
    approximate: bool = False
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if not math.isfinite(self.log_value):
            raise ParameterError(f"{self.kind}: constant is not finite")
        if (self.theta is not None) != (self.kind in GN_KINDS):
            raise ValueError("theta is present exactly for GN kinds")
        if self.theta is not None and not (0.0 < self.theta <= 1.0 + 1e-12):
            raise ParameterError(f"{self.kind}: theta = {self.theta} outside (0, 1]")

    @property
    def value(self) -> float:
        return math.exp(self.log_value)

    def to_record(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params), "value": self.value,
                "log_value": self.log_value, "theta": self.theta, "alpha": self.alpha,
                "branch": self.branch, "approximate": self.approximate}


def _dom_params(dom: WeightedDomain, **extra):
    out = dom.describe()
    out.update(extra)
    return out


# -- Sobolev ------------------------------------------------------------------

def log_sobolev_from_data(n_a: float, log_v: float, p: float) -> float:
    """log S for fractional dimension n_a and ball measure exp(log_v)."""
    return ((p - 1.0) * math.log(p - 1.0) - math.log(n_a)
            - (p - 1.0) * math.log(n_a - p)) / p \
        - (lgamma(n_a / p) + lgamma(n_a * (p - 1.0) / p + 1.0)
           - lgamma(n_a) + log_v) / n_a


def sobolev_constant(dom: WeightedDomain, p) -> SharpConstant:
    """Best S in ||f||_{p*} <= S ||grad f||_p on (Sigma, sigma), 1 < p < n_a."""
    p = as_real(p)
    if not (1.0 < p < dom.n_a):
        raise ParameterError(f"need 1 < p < n_a = {dom.n_a:g}, got p = {p:g}")
    lv = log_sobolev_from_data(dom.n_a, dom.log_ball_measure(), p)
    return SharpConstant("SobolevP", _dom_params(dom, p=p), lv)


def sobolev_l1_constant(dom: WeightedDomain) -> SharpConstant:
    """S(n, a, 1) = n_a^(-1) V^(-1/n_a): the isoperimetric constant."""
    if not dom.n_a > 1.0:
        raise ParameterError(f"need n_a > 1, got {dom.n_a:g}")
    lv = -math.log(dom.n_a) - dom.log_ball_measure() / dom.n_a
    return SharpConstant("SobolevL1", _dom_params(dom, p=1.0), lv)


# -- Gagliardo-Nirenberg ----------------------------------------------------------

def gn_theta(n_a: float, p: float, alpha: float) -> float:
    """Interpolation exponent fixed by scaling.

    Written without p* so that p >= n_a (used by the Euclidean reduction) works.
    """
    pa = alpha * p - alpha + 1.0
    if alpha > 1:
        return n_a * (alpha - 1.0) / (alpha * (n_a * p - (n_a - p) * pa))
    return n_a * (1.0 - alpha) / (pa * (n_a - alpha * (n_a - p)))


def _log_gn(n_a, log_v, p, alpha):
    q = conjugate(p)
    theta = gn_theta(n_a, p, alpha)
    if alpha > 1:
        y = (alpha * (p - 1.0) + 1.0) / (alpha - 1.0)
        lg = (theta / p * (math.log(y) + p * math.log(alpha - 1.0)
                           - (p - 1.0) * math.log(q) - math.log(n_a))
              + (math.log(q * y - n_a) - math.log(q * y)) / (alpha * p)
              + theta / n_a * (lgamma(y) - lgamma(y - n_a / q)
                               - lgamma(n_a / q + 1.0) - log_v))
        return lg, theta
    z = (alpha * p - alpha + 1.0) / (1.0 - alpha)
    lg = (theta / p * (math.log(z) + p * math.log(1.0 - alpha)
                       - (p - 1.0) * math.log(q) - math.log(n_a))
          + (1.0 - theta) / (alpha * p) * (math.log(q * z) - math.log(q * z + n_a))
          + theta / n_a * (lgamma(z + 1.0 + n_a / q) - lgamma(z + 1.0)
                           - lgamma(n_a / q + 1.0) - log_v))
    return lg, theta


def gn_constant(dom: WeightedDomain, p, alpha) -> SharpConstant:
    """Sharp GN constant.

    alpha > 1:  ||f||_{alpha p} <= G ||grad f||_p^theta ||f||_{p_alpha}^(1-theta)
    alpha < 1:  ||f||_{p_alpha} <= N ||grad f||_p^theta ||f||_{alpha p}^(1-theta)
    """
    p, alpha = as_real(p), as_real(alpha)
    n_a = dom.n_a
    if not (1.0 < p < n_a):
        raise ParameterError(f"need 1 < p < n_a = {n_a:g}, got p = {p:g}")
    if alpha == 1.0:
        raise ParameterError("alpha = 1 is excluded")
    top = n_a / (n_a - p)
    if not (0.0 < alpha <= top * (1.0 + 1e-14)):
        raise ParameterError(f"need 0 < alpha <= n_a/(n_a-p) = {top:g}, got {alpha:g}")
    lg, theta = _log_gn(n_a, dom.log_ball_measure(), p, alpha)
    kind = "GNsuper" if alpha > 1 else "GNsub"
    return SharpConstant(kind, _dom_params(dom, p=p, alpha=alpha), lg,
                         theta=min(theta, 1.0), alpha=alpha,
                         branch="super" if alpha > 1 else "sub")


# -- log-Sobolev ------------------------------------------------------------------

def logsob_limit_log(n_a: float, log_v: float, p: float) -> float:
    """log of [(p/n_a)((p-1)/e)^(p-1)]^(1/p) (Gamma(n_a/q+1) V)^(-1/n_a)."""
    q = conjugate(p)
    return ((math.log(p / n_a) + (p - 1.0) * (math.log(p - 1.0) - 1.0)) / p
            - (lgamma(n_a / q + 1.0) + log_v) / n_a)


def logsob_constant(dom: WeightedDomain, p) -> SharpConstant:
    """L in int f^p ln f^p <= (n_a/p) ln(L int ||grad f||_*^p), int f^p = 1."""
    p = as_real(p)
    if not p >= 1.0:
        raise ParameterError(f"need p >= 1, got {p:g}")
    n_a, lv = dom.n_a, dom.log_ball_measure()
    if p == 1.0:
        val = -math.log(n_a) - lv / n_a
    else:
        val = p * logsob_limit_log(n_a, lv, p)
    return SharpConstant("LogSob", _dom_params(dom, p=p), val)


# -- Euclidean GN by dimension reduction -----------------------------------------

def euclidean_gn_critical_p(n: int, a: float) -> float:
    return 0.5 * (n + math.sqrt(n * n + 4.0 * (1.0 + a)))


def euclidean_gn_alpha(n: int, p: float, a: float) -> float:
    den = n * p + a + 1.0 - p * p
    if den == 0.0:
        raise ParameterError("alpha is undefined on the branch boundary")
    return (n * p + a + 1.0) / den


def _euclid_checks(n, p, a):
    N = n + 1.0 + a
    pc = euclidean_gn_critical_p(n, a)
    if not (p > 1.0 and p < N):
        raise ParameterError(f"need 1 < p < n + 1 + a = {N:g}, got p = {p:g}")
    if p == pc or abs(p - pc) <= 1e-12 * pc:
        raise ParameterError(f"p = {p:g} is the branch boundary")
    return "i" if p < pc else "ii"


def euclidean_gn_factors(n: int, p: float, a: float) -> dict:
    """One-dimensional t-integrals of the reduction, closed form.

    S1 = int_0^inf t^a (1+t^q)^(-N) dt,  S3 = int_0^inf t^(q+a) (1+t^q)^(-N) dt,
    S2 = S1 / |beta|^p, with N = n + 1 + a and beta = 1 - n/p - (a+1)/p^2 the
    power linking h = 1 + ||x||^q to f = h^beta.
    """
    q = conjugate(p)
    N = n + 1.0 + a
    beta = 1.0 - n / p - (a + 1.0) / (p * p)
    ls1 = lbeta((a + 1.0) / q, N - (a + 1.0) / q) - math.log(q)
    ls3 = lbeta((q + a + 1.0) / q, N - (q + a + 1.0) / q) - math.log(q)
    return {"S1": math.exp(ls1), "S2": math.exp(ls1 - p * math.log(abs(beta))),
            "S3": math.exp(ls3), "beta": beta, "log_S1": ls1, "log_S3": ls3}


def euclidean_gn_constant(n: int, p, a, norm=None) -> SharpConstant:
    """Sharp Euclidean GN constant on R^n obtained by dimension reduction.

    alpha = (np + a + 1)/(np + a + 1 - p^2).  Branch (i), alpha > 1:
    ||f||_{alpha p} <= GN ||grad f||_p^theta ||f||_{p_alpha}^(1-theta).
    Branch (ii), alpha < 0, with r-"norms" for negative r:
    ||f||_{p_alpha} <= GN ||grad f||_p^theta ||f||_{alpha p}^(1-theta).
    """
    p, a = as_real(p), as_real(a)
    norm = LqNorm(2.0, n) if norm is None else norm
    branch = _euclid_checks(n, p, a)
    alpha = euclidean_gn_alpha(n, p, a)
    q = conjugate(p)
    dom = WeightedDomain(n, (), norm)
    lk = dom.log_ball_measure()
    pa = alpha * p - alpha + 1.0
    if branch == "i":
        lg, theta = _log_gn(float(n), lk, p, alpha)
        kind = "EuclideanGN"
    else:
        z = -alpha * p / (1.0 - alpha) - 1.0
        theta = n * (1.0 - alpha) / (pa * (n - alpha * (n - p)))
        lg = (theta / p * (math.log(z) + p * math.log(1.0 - alpha)
                           - (p - 1.0) * math.log(q) - math.log(n))
              + (1.0 - theta) / (alpha * p) * (math.log(q * z) - math.log(q * z - n))
              + theta / n * (lgamma(z) - lk - lgamma(n / q + 1.0) - lgamma(z - n / q)))
        kind = "EuclideanGNneg"
    from .norms import format_norm
    extras = euclidean_gn_factors(n, p, a)
    extras["p_alpha"] = pa
    return SharpConstant(kind, {"n": n, "p": p, "a": a, "norm": format_norm(norm)}, lg,
                         theta=theta, alpha=alpha, branch=branch, extras=extras)


def assembled_gn_constant(n: int, p, a, norm=None) -> dict:
    """Euclidean GN constant rebuilt from the Sobolev constant one dimension up.

    For f on R^n put u(x, t) = (h(x) + |t|^q)^(-(N-p)/p) on R^n x R_+ with
    weight t^a, h = f^(1/beta).  The Sobolev inequality for u, after
    integrating out t (factors S1, S2, S3), becomes the non-homogeneous
    inequality X^kappa <= A G + B P with X = int f^(alpha p),
    G = int ||grad f||^p, P = int f^(p_alpha).  Optimising over f -> c f(. )
    dilations turns it into the GN inequality; the constant is returned.
    """
    p, a = as_real(p), as_real(a)
    norm = LqNorm(2.0, n) if norm is None else norm
    branch = _euclid_checks(n, p, a)
    q = conjugate(p)
    N = n + 1.0 + a
    alpha = euclidean_gn_alpha(n, p, a)
    pa = alpha * p - alpha + 1.0
    fac = euclidean_gn_factors(n, p, a)
    beta = fac["beta"]
    up = WeightedDomain(n + 1, (a,), ProductNorm.with_line(norm, q))
    lS = log_sobolev_from_data(N, up.log_ball_measure(), p)
    kappa = (N - p) / N
    lcommon = p * lS + p * math.log((N - p) / p)
    # X^kappa <= A G + B P, coefficients:
    lA = lcommon - p * math.log(abs(beta)) + (1.0 - kappa) * fac["log_S1"]
    lB = lcommon + p * math.log(q) + fac["log_S3"] - kappa * fac["log_S1"]
    lg, theta = _optimise_dilation(n, N, p, alpha, kappa, lA, lB, branch)
    return {"log_value": lg, "value": math.exp(lg), "theta": theta, "log_A": lA,
            "log_B": lB, "alpha": alpha, "branch": branch, "log_S_up": lS, **fac}


def _optimise_dilation(n, N, p, alpha, kappa, lA, lB, branch):
    """Turn X^kappa <= A G + B P into the multiplicative GN inequality.

    Under f -> f(lam x) the inequality becomes
    X^kappa <= A lam^s G + B lam^(-t) P with s = p(1+a)/N, t = n p/N, and
    min_lam (u lam^s + v lam^-t) = ((s+t)/t) (t/s)^(s/(s+t)) u^w1 v^w2,
    w1 = t/(s+t), w2 = s/(s+t).  Amplitude scaling is then automatically
    balanced, which leaves X^kappa <= C G^w1 P^w2.
    """
    pa = alpha * p - alpha + 1.0
    s = p - n + n * kappa
    t = n - n * kappa
    w1, w2 = t / (s + t), s / (s + t)
    lC = math.log((s + t) / t) + w2 * math.log(t / s) + w1 * lA + w2 * lB
    if branch == "i":
        # ||f||_{alpha p}^(alpha p kappa) <= C ||grad f||^(p w1) ||f||_pa^(pa w2)
        return lC / (alpha * p * kappa), p * w1 / (alpha * p * kappa)
    # alpha p < 0 and pa < 0: move the X and P factors across
    # ||f||_pa^(-pa w2) <= C ||grad f||^(p w1) ||f||_{alpha p}^(-alpha p kappa)
    return lC / (-pa * w2), p * w1 / (-pa * w2)


# -- tensorisation --------------------------------------------------------------------

def tensor_log_ball(dom: WeightedDomain, k: int, q: float) -> float:
    """log measure of the unit ball of the k-fold l^q product of dom's norm,
    weighted by the product weight; via the block Dirichlet recursion."""
    from .domain import log_ball_measure

    spec = ProductNorm.power(dom.norm, k, q)
    return log_ball_measure(spec, list(dom.exponents) * k, list(dom.restricted) * k)


def tensor_log_ball_closed(dom: WeightedDomain, k: int, q: float) -> float:
    """(q/(k n_a)) ((n_a/q) V)^k Gamma(n_a/q)^k / Gamma(k n_a/q), in logs."""
    n_a, lv = dom.n_a, dom.log_ball_measure()
    return (math.log(q / (k * n_a)) + k * (math.log(n_a / q) + lv + lgamma(n_a / q))
            - lgamma(k * n_a / q))


def tensor_sobolev_log(dom: WeightedDomain, k: int, p: float) -> float:
    """log of k^(1/p) S(nk, k a, p) on the k-fold product with the l^q product norm."""
    q = conjugate(p)
    n_k = k * dom.n_a
    if not n_k > p:
        raise ParameterError(f"need k n_a > p (k = {k})")
    return math.log(k) / p + log_sobolev_from_data(n_k, tensor_log_ball_closed(dom, k, q), p)
