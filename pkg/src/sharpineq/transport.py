"""Radial monotone transport between norm-radial densities on (Sigma, sigma),
and a numerical trace of the transport inequality

    1/(1-g) int G^g  <=  (1 - n_a(1-g))/(1-g) int F^g  -  int grad F^g . grad phi

for the Brenier map grad phi(x) = psi(r) x / r pushing F sigma to G sigma.

For the Euclidean norm and radial data the monotone rearrangement
psi = M_G^{-1} o M_F of the radial cumulative masses is the Brenier map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .domain import WeightedDomain
from .errors import (DomainError, NormalizationError, ParameterError, UnsupportedError)
from .extremals import RadialProfile
from .norms import LqNorm
from .quadrature import _gk15, _split_radius, integrate_interval

__all__ = ["TransportMap1D", "radial_brenier", "transport_inequality_check", "amgm_slack",
           "amgm_rearranged", "power_of", "TABLE_NODES"]

TABLE_NODES = 16384
MASS_TOL = 1e-8


def power_of(profile: RadialProfile, s: float) -> RadialProfile:
    """r -> f(r)^s as a profile (density of f when s is the norm exponent)."""
    s = float(s)

    def f(r):
        v = np.asarray(profile.f(r), dtype=float)
        return np.where(v > 0, np.abs(v) ** s, 0.0)

    def df(r):
        v = np.asarray(profile.f(r), dtype=float)
        safe = np.where(v > 0, v, 1.0)
        return np.where(v > 0, s * safe ** (s - 1.0) * profile.df(r), 0.0)

    return RadialProfile.custom(f, df, profile.support_radius, profile.breakpoints,
                                tail=profile.tail_exponent * s,
                                source=profile.describe(), power=s)


class _Cumulative:
    """M(r) = n_a V int_0^r H(s) s^(n_a-1) ds on a log grid, with cubic Hermite
    interpolation (exact end derivatives) and a power-law tail."""

    def __init__(self, dom: WeightedDomain, H: RadialProfile, nodes: int):
        self.n_a = dom.n_a
        self.scale = dom.n_a * dom.ball_measure()
        self.H = H
        sup = H.support_radius
        R = _split_radius(self.density)
        self.r_lo = R * 1e-7
        self.r_hi = sup if math.isfinite(sup) else R * 1e7
        if math.isfinite(sup):
            self.r_lo = min(self.r_lo, sup * 1e-7)
        r = np.geomspace(self.r_lo, self.r_hi, nodes)
        self.r = r
        cells, _ = _gk15(self.density, r[:-1], r[1:])
        head = integrate_interval(self.density, 0.0, r[0], 1e-13).value
        self.M = np.concatenate([[head], head + np.cumsum(cells)])
        self.dM = self.density(r)
        if math.isfinite(sup):
            self.tail_mass, self.k = 0.0, math.inf
        else:
            k = H.tail_exponent - self.n_a
            self.k = k
            if math.isfinite(k):
                if k <= 0:
                    raise DomainError("density is not integrable at infinity")
                # int_{r_hi}^inf c s^(-tail) s^(n_a-1) ds from the last node
                self.tail_mass = float(self.dM[-1]) * self.r_hi / k
            else:
                tail = integrate_interval(
                    lambda u: self.density(self.r_hi / u) * self.r_hi / u ** 2,
                    0.0, 1.0, 1e-12, strict=False)
                self.tail_mass = tail.value
        self.total = float(self.M[-1]) + self.tail_mass
        self.Q = self.tail_mass + np.concatenate([np.cumsum(cells[::-1])[::-1], [0.0]])

    def density(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(over="ignore", invalid="ignore"):
            v = np.asarray(self.H.f(r), dtype=float)
            out = self.scale * v * r ** (self.n_a - 1.0)
        return np.where(v == 0.0, 0.0, out)

    def _hermite(self, r, i, vals=None, sign=1.0):
        vals = self.M if vals is None else vals
        r0, r1 = self.r[i], self.r[i + 1]
        h = r1 - r0
        t = (r - r0) / h
        h00 = (1 + 2 * t) * (1 - t) ** 2
        h10 = t * (1 - t) ** 2
        h01 = t * t * (3 - 2 * t)
        h11 = t * t * (t - 1)
        return (h00 * vals[i] + sign * h10 * h * self.dM[i] + h01 * vals[i + 1]
                + sign * h11 * h * self.dM[i + 1])

    def _cells(self, r):
        return np.clip(np.searchsorted(self.r, r) - 1, 0, self.r.size - 2)

    def __call__(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.empty_like(r)
        low = r <= self.r_lo
        high = r >= self.r_hi
        mid = ~(low | high)
        if np.any(low):
            out[low] = self.M[0] * (np.maximum(r[low], 0.0) / self.r_lo) ** self.n_a
        if np.any(mid):
            out[mid] = self._hermite(r[mid], self._cells(r[mid]))
        if np.any(high):
            out[high] = self.total - self.upper(r[high])
        return out

    def upper(self, r):
        """Q(r) = total - M(r), evaluated without cancellation in the tail."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.empty_like(r)
        low = r <= self.r_lo
        high = r >= self.r_hi
        mid = ~(low | high)
        if np.any(low):
            out[low] = self.total - self(r[low])
        if np.any(mid):
            out[mid] = self._hermite(r[mid], self._cells(r[mid]), self.Q, -1.0)
        if np.any(high):
            if math.isfinite(self.k) and self.tail_mass > 0:
                out[high] = self.tail_mass * (r[high] / self.r_hi) ** -self.k
            else:
                out[high] = 0.0
        return out

    def _bisect(self, target, i, vals, sign, iters):
        lo, hi = self.r[i].copy(), self.r[i + 1].copy()
        for _ in range(iters):
            c = 0.5 * (lo + hi)
            below = sign * self._hermite(c, i, vals, sign) < sign * target
            lo = np.where(below, c, lo)
            hi = np.where(below, hi, c)
            if np.all(hi - lo <= 2e-16 * hi):
                break
        return 0.5 * (lo + hi)

    def inverse(self, m, iters: int = 200):
        """Smallest r with M(r) = m (vectorised bisection inside table cells)."""
        m = np.atleast_1d(np.asarray(m, dtype=float))
        out = np.empty_like(m)
        low = m <= self.M[0]
        high = m >= self.M[-1]
        mid = ~(low | high)
        if np.any(low):
            out[low] = self.r_lo * (np.maximum(m[low], 0.0) / self.M[0]) ** (1.0 / self.n_a)
        if np.any(high):
            out[high] = self.inverse_upper(self.total - m[high], iters)
        if np.any(mid):
            mm = m[mid]
            i = np.clip(np.searchsorted(self.M, mm, side="right") - 1, 0, self.r.size - 2)
            out[mid] = self._bisect(mm, i, self.M, 1.0, iters)
        return out

    def inverse_upper(self, q, iters: int = 200):
        """r with Q(r) = q, accurate for small tail masses."""
        q = np.atleast_1d(np.asarray(q, dtype=float))
        out = np.empty_like(q)
        tail = q <= self.Q[-1]
        head = q >= self.Q[0]
        mid = ~(tail | head)
        if np.any(tail):
            if math.isfinite(self.k) and self.tail_mass > 0:
                rest = np.maximum(q[tail], 1e-300)
                out[tail] = self.r_hi * (rest / self.tail_mass) ** (-1.0 / self.k)
            else:
                out[tail] = self.r_hi
        if np.any(head):
            out[head] = self.inverse(self.total - q[head], iters)
        if np.any(mid):
            qq = q[mid]
            # Q is decreasing; search on the reversed table
            j = np.searchsorted(self.Q[::-1], qq, side="left")
            i = np.clip(self.Q.size - 1 - j, 0, self.r.size - 2)
            out[mid] = self._bisect(qq, i, self.Q, -1.0, iters)
        return out


@dataclass
class TransportMap1D:
    """psi = M_G^{-1} o M_F with the cumulative tables of source and target."""

    dom: WeightedDomain
    source: RadialProfile
    target: RadialProfile
    nodes: int = TABLE_NODES
    MF: _Cumulative = field(init=False, repr=False)
    MG: _Cumulative = field(init=False, repr=False)

    def __post_init__(self):
        self.MF = _Cumulative(self.dom, self.source, self.nodes)
        self.MG = _Cumulative(self.dom, self.target, self.nodes)

    @property
    def mass_mismatch(self) -> float:
        return abs(self.MF.total - self.MG.total)

    def psi(self, r):
        r = np.asarray(r, dtype=float)
        rr = np.atleast_1d(r)
        # match lower masses below the median and upper masses above it
        m = self.MF(rr)
        upper = m > 0.5 * self.MF.total
        out = np.empty_like(rr)
        if np.any(~upper):
            out[~upper] = self.MG.inverse(m[~upper] * (self.MG.total / self.MF.total))
        if np.any(upper):
            q = self.MF.upper(rr[upper]) * (self.MG.total / self.MF.total)
            out[upper] = self.MG.inverse_upper(q)
        # beyond the source support psi is constant at the target support edge
        sup = self.source.support_radius
        if math.isfinite(sup):
            edge = min(self.target.support_radius, float(self.MG.inverse(self.MF.total)[0]))
            out = np.where(np.atleast_1d(r) >= sup, edge, out)
        return out if r.ndim else float(out[0])

    __call__ = psi

    def dpsi(self, r):
        """psi' = F(r) r^(n_a-1) / (G(psi) psi^(n_a-1)) from mass balance."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        s = self.psi(r)
        num = self.MF.density(r)
        den = self.MG.density(s)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(num > 0, num / den, 0.0)

    def mass_balance_residual(self) -> float:
        r = self.MF.r
        return float(np.max(np.abs(self.MF(r) - self.MG(self.psi(r)))))

    def quantiles(self, count: int = 20):
        """Source and target radii at equally spaced mass levels."""
        levels = (np.arange(count) + 0.5) / count * self.MF.total
        rf = self.MF.inverse(levels)
        return levels, rf, self.MG.inverse(levels), self.psi(rf)

    def pushforward_moment(self, b, tol: float = 1e-10):
        """(int b(psi(r)) dM_F, int b(r) dM_G)."""
        left = _integrate_profile(lambda r: b(self.psi(r)) * self.MF.density(r),
                                  self.source, tol)
        right = _integrate_profile(lambda r: b(r) * self.MG.density(r), self.target, tol)
        return left, right


def _integrate_profile(g, prof, tol, atol=0.0):
    from .quadrature import integrate_halfline

    sup = prof.support_radius
    if math.isfinite(sup):
        return integrate_interval(g, 0.0, sup, tol, atol=atol,
                                  breakpoints=prof.breakpoints).value
    return integrate_halfline(g, tol, atol=atol, breakpoints=prof.breakpoints).value


def radial_brenier(dom: WeightedDomain, F: RadialProfile, G: RadialProfile,
                   nodes: int = TABLE_NODES) -> TransportMap1D:
    """Monotone radial map pushing F sigma to G sigma (Euclidean norm only)."""
    if not (isinstance(dom.norm, LqNorm) and dom.norm.q == 2):
        raise UnsupportedError("the radial map is the Brenier map only for the Euclidean norm")
    tm = TransportMap1D(dom, F, G, nodes)
    if tm.mass_mismatch > MASS_TOL:
        raise NormalizationError(
            f"source and target masses differ: {tm.MF.total!r} vs {tm.MG.total!r}")
    return tm


# -- pointwise inequality --------------------------------------------------------

def _jump_terms(F, gamma, tm, n_a):
    """Point masses of (F^gamma)' against psi r^(n_a-1): each jump of F and,
    for gamma = 0, the support edge where F^0 drops from 1 to 0."""
    def pw(x):
        return x ** gamma if x > 0 else 0.0

    total = 0.0
    for R, j in F.jumps:
        left = float(F.f(R * (1.0 - 1e-13)))
        total += (pw(left - j) - pw(left)) * tm.psi(R) * R ** (n_a - 1.0)
    sup = F.support_radius
    if gamma == 0.0 and math.isfinite(sup) and not any(R == sup for R, _ in F.jumps):
        total -= tm.psi(sup) * sup ** (n_a - 1.0)
    return total


def _check_gamma(gamma, n_a):
    if gamma == 1.0:
        raise ParameterError("gamma = 1 is excluded")
    if gamma < 1.0 - 1.0 / n_a - 1e-15:
        raise ParameterError(f"need gamma >= 1 - 1/n_a = {1 - 1 / n_a:g}, got {gamma:g}")


def amgm_slack(A: float, M_diag, gamma: float, a: float = 0.0):
    """Both sides of
        1/(1-g) A^(a(1-g)) det(M)^(1-g) <= (1 - n_a(1-g))/(1-g) + a A + Tr M
    for diagonal M (n = len(M_diag), n_a = n + a).  Returns (lhs, rhs)."""
    M = np.asarray(M_diag, dtype=float)
    if not A > 0 or np.any(M < 0):
        raise ParameterError("need A > 0 and nonnegative diagonal entries")
    n_a = M.size + a
    _check_gamma(gamma, n_a)
    e = 1.0 - gamma
    with np.errstate(divide="ignore", over="ignore"):
        x = np.exp(e * (a * math.log(A) + np.sum(np.log(M))))
    lhs = x / e
    rhs = (1.0 - n_a * e) / e + a * A + M.sum()
    return float(lhs), float(rhs)


def amgm_rearranged(A: float, M_diag, gamma: float, a: float = 0.0) -> float:
    """For gamma > 1 the same inequality divided through; the value is >= 1."""
    M = np.asarray(M_diag, dtype=float)
    n_a = M.size + a
    if not gamma > 1:
        raise ParameterError("the rearranged form is for gamma > 1")
    d = 1.0 + n_a * (gamma - 1.0)
    x = math.exp((1.0 - gamma) * (a * math.log(A) + float(np.sum(np.log(M)))))
    return x / d + a * (gamma - 1.0) / d * A + (gamma - 1.0) / d * float(M.sum())


# -- the integrated inequality ------------------------------------------------------

def transport_inequality_check(dom: WeightedDomain, gamma: float, F: RadialProfile, G: RadialProfile,
                  tmap: TransportMap1D | None = None, tol: float = 1e-10) -> dict:
    """Evaluate both sides of the transport inequality for radial F, G.

    Also integrates the pointwise AM-GM slack against F^gamma; the
    difference gap - slack integral is the boundary term of the integration
    by parts (zero for radial maps with F^gamma r^(n_a-1) psi -> 0).
    """
    n_a = dom.n_a
    _check_gamma(gamma, n_a)
    tm = tmap if tmap is not None else radial_brenier(dom, F, G)
    e = 1.0 - gamma
    scale = n_a * dom.ball_measure()

    def pw(prof, s):
        def g(r):
            v = np.asarray(prof.f(r), dtype=float)
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                out = np.where(v > 0, np.abs(v) ** s, 0.0) * np.asarray(r) ** (n_a - 1.0)
            return np.where(v > 0, out, 0.0)
        return g

    IG = scale * _integrate_profile(pw(G, gamma), G, tol)
    IF = scale * _integrate_profile(pw(F, gamma), F, tol)

    def cross(r):
        r = np.asarray(r, dtype=float)
        v = np.asarray(F.f(r), dtype=float)
        live = v > 0
        safe = np.where(live, v, 1.0)
        dFg = np.where(live, gamma * safe ** (gamma - 1.0) * F.df(r), 0.0)
        return dFg * tm.psi(r) * r ** (n_a - 1.0)

    IC = scale * (_integrate_profile(cross, F, tol) + _jump_terms(F, gamma, tm, n_a))
    lhs = IG / e
    rhs = (1.0 - n_a * e) / e * IF - IC

    n, a_tot = dom.n, n_a - dom.n

    def slack(r):
        # pointwise slack times F^gamma, with A = psi/r, M = diag(psi', A, ..., A);
        # F^gamma (A^a det M)^(1-gamma) is rewritten as F G(psi)^(gamma-1) through
        # the radial Monge-Ampere identity A^a det M = F / G(psi), which stays
        # bounded where psi' degenerates
        r = np.asarray(r, dtype=float)
        v = np.asarray(F.f(r), dtype=float)
        s = tm.psi(r)
        gv = np.asarray(G.f(s), dtype=float)
        live = (v > 0) & (gv > 0) & (r > 0)
        rr = np.where(live, r, 1.0)
        A = np.where(live, s / rr, 1.0)
        d = np.where(live, tm.dpsi(rr), 1.0)
        vs = np.where(live, v, 1.0)
        gs = np.where(live, gv, 1.0)
        val = (((1.0 - n_a * e) / e + a_tot * A + d + (n - 1) * A) * vs ** gamma
               - vs * gs ** (gamma - 1.0) / e)
        return np.where(live, val * rr ** (n_a - 1.0), 0.0)

    # the slack vanishes identically when F = G, so an absolute floor is needed
    IS = scale * _integrate_profile(slack, F, tol, atol=tol * (abs(IF) + abs(IG)) / scale)
    gap = rhs - lhs
    return {"gamma": gamma, "lhs": lhs, "rhs": rhs, "gap": gap, "slack_integral": IS,
            "boundary_term": gap - IS, "int_F_gamma": IF, "int_G_gamma": IG,
            "cross_term": IC, "mass_residual": tm.mass_balance_residual()}
