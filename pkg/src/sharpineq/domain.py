"""The weighted orthant (Sigma, sigma) and its radial geometry.

Sigma = R^(n-m) x R_+^m carries the monomial weight
sigma(x, t) = t_1^a_1 ... t_m^a_m; the weighted coordinates are the last m.
Because both the weight and any norm are homogeneous, a norm-radial
integrand reduces to a one-dimensional moment integral:

    int_Sigma g(||z||) sigma(z) dz = n_a V_B int_0^inf g(r) r^(n_a - 1) dr,

with n_a = n + sum(a) and V_B the weighted measure of the unit ball.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import norms as _norms
from .errors import DimensionMismatchError, DomainError, UnsupportedError
from .norms import LqNorm, NormSpec, ProductNorm
from .special import lgamma

__all__ = ["WeightedDomain", "half_space", "parse_domain", "log_ball_measure"]


def _combine(blocks, q):
    """Weighted measure of the l^q-combined unit ball from block data.

    Each block is (log V_i, n_i): its own weighted unit-ball measure and its
    fractional dimension.  The Dirichlet integral over {sum r_i^q <= 1} gives
    V = prod(n_i V_i Gamma(n_i/q) / q) / Gamma(N/q + 1),  N = sum n_i.
    """
    ntot = sum(nb for _, nb in blocks)
    if math.isinf(q):
        return sum(lv for lv, _ in blocks), ntot
    lv = sum(math.log(nb) + lvb + lgamma(nb / q) - math.log(q) for lvb, nb in blocks)
    return lv - lgamma(ntot / q + 1.0), ntot


def _coord_block(restricted, a):
    if restricted:
        return -math.log1p(a), 1.0 + a
    return math.log(2.0), 1.0


def _ball(spec, coords):
    if isinstance(spec, LqNorm):
        return _combine([_coord_block(*c) for c in coords], spec.q)
    out, start = [], 0
    for b in spec.blocks:
        out.append(_ball(b, coords[start:start + b.dim]))
        start += b.dim
    return _combine(out, spec.q)


def log_ball_measure(spec: NormSpec, exponents, restricted=None) -> float:
    """log of int_{B cap Sigma} sigma for a per-coordinate weight description.

    ``exponents[i]`` is the weight exponent of coordinate i and
    ``restricted[i]`` says whether it ranges over R_+ (default: exponent given
    means restricted).  Closed form for every l^q / product norm.
    """
    exponents = list(exponents)
    if restricted is None:
        restricted = [True] * len(exponents)
    if len(exponents) != spec.dim:
        raise DimensionMismatchError("one exponent per coordinate expected")
    return _ball(spec, list(zip(restricted, exponents)))[0]


@dataclass(frozen=True)
class WeightedDomain:
    """Orthant R^(n-m) x R_+^m with monomial weight and a norm on R^n."""

    n: int
    a: tuple = ()
    norm: NormSpec = None
    n_a: float = field(init=False)

    def __post_init__(self):
        a = tuple(float(x) for x in self.a)
        object.__setattr__(self, "a", a)
        if self.n < 1:
            raise DomainError("ambient dimension must be >= 1")
        if len(a) > self.n:
            raise DomainError("more weighted coordinates than dimensions")
        if any(not (x >= 0) or not math.isfinite(x) for x in a):
            raise DomainError(f"weight exponents must be finite and >= 0: {a}")
        if self.norm is None:
            object.__setattr__(self, "norm", LqNorm(2.0, self.n))
        if self.norm.dim != self.n:
            raise DimensionMismatchError(
                f"norm has dimension {self.norm.dim}, domain has {self.n}")
        object.__setattr__(self, "n_a", self.n + sum(a))

    @property
    def m(self) -> int:
        return len(self.a)

    @property
    def exponents(self) -> tuple:
        """Per-coordinate weight exponents (0 for free coordinates)."""
        return (0.0,) * (self.n - self.m) + self.a

    @property
    def restricted(self) -> tuple:
        return (False,) * (self.n - self.m) + (True,) * self.m

    def log_ball_measure(self) -> float:
        return log_ball_measure(self.norm, self.exponents, self.restricted)

    def ball_measure(self) -> float:
        """V_B = int_{B cap Sigma} sigma."""
        return math.exp(self.log_ball_measure())

    def ball_perimeter(self) -> float:
        """Weighted perimeter of the unit ball relative to Sigma: n_a V_B."""
        return self.n_a * self.ball_measure()

    def isoperimetric_ratio(self) -> float:
        """P(B) / V_B^((n_a-1)/n_a) = n_a V_B^(1/n_a)."""
        return self.n_a * math.exp(self.log_ball_measure() / self.n_a)

    def weight(self, z):
        """sigma evaluated on points ``z`` of shape (..., n); zero off Sigma."""
        z = np.asarray(z, dtype=float)
        out = np.ones(z.shape[:-1])
        for i, ai in enumerate(self.a):
            t = z[..., self.n - self.m + i]
            out = out * np.where(t > 0, np.abs(t) ** ai, 0.0)
        return out

    def contains(self, z):
        z = np.asarray(z, dtype=float)
        if self.m == 0:
            return np.ones(z.shape[:-1], dtype=bool)
        return np.all(z[..., self.n - self.m:] > 0, axis=-1)

    def with_norm(self, norm: NormSpec) -> "WeightedDomain":
        return WeightedDomain(self.n, self.a, norm)

    def to_text(self) -> str:
        a = ";".join(_norms._fmt_num(x) for x in self.a)
        nrm = _norms.format_norm(self.norm)
        return f"domain:n={self.n},m={self.m},a={a},norm={nrm}"

    def describe(self) -> dict:
        return {"n": self.n, "m": self.m, "a": list(self.a),
                "norm": _norms.format_norm(self.norm), "n_a": self.n_a}

    # -- radial reduction -------------------------------------------------

    def radial_integral(self, g, moment_shift: float = 0.0, tol: float = 1e-11,
                        full_output: bool = False, *, support=None, breakpoints=None,
                        atol: float = 0.0):
        """int_Sigma g(||z||) ||z||^shift sigma(z) dz via the 1-D reduction.

        ``g`` is a vectorised callable of r or a RadialProfile (whose support
        radius, if finite, bounds the integration range).  ``atol`` is an
        absolute floor in the units of the result, for sign-changing integrands.
        """
        from .quadrature import integrate_halfline, integrate_interval

        if moment_shift < 0:
            raise DomainError("moment_shift must be >= 0")
        power = self.n_a + moment_shift - 1.0
        scale = self.n_a * self.ball_measure()
        func = getattr(g, "f", g)

        def integrand(r):
            v = np.asarray(func(r), dtype=float)
            with np.errstate(over="ignore", invalid="ignore"):
                out = v * np.asarray(r, dtype=float) ** power
            # far in the tail an underflowed value times r^power is 0 * inf
            return np.where(v == 0.0, 0.0, out)

        if support is None:
            support = getattr(g, "support_radius", math.inf)
        if breakpoints is None:
            breakpoints = getattr(g, "breakpoints", ())
        if math.isfinite(support):
            res = integrate_interval(integrand, 0.0, support, tol=tol, atol=atol / scale,
                                     breakpoints=breakpoints)
        else:
            res = integrate_halfline(integrand, tol=tol, atol=atol / scale,
                                     breakpoints=breakpoints)
        res = res.scaled(scale)
        return res if full_output else res.value

    def surface_perimeter_quadrature(self, tol: float = 1e-12) -> float:
        """Perimeter of B relative to Sigma by direct surface quadrature.

        Integrates ||normal||_* sigma over the open hemisphere, parametrised in
        polar (n = 2) or spherical (n = 3) coordinates.  Euclidean norm and a
        single weighted coordinate only.
        """
        from .quadrature import integrate_interval

        if not (isinstance(self.norm, LqNorm) and self.norm.q == 2):
            raise UnsupportedError("surface quadrature needs the Euclidean norm")
        if self.n not in (2, 3) or self.m != 1:
            raise UnsupportedError("surface quadrature supports n in {2, 3}, m = 1")

        def density(points):
            # outward unit normal of the round sphere is the point itself
            return _norms.dual_norm(self.norm, points) * self.weight(points)

        if self.n == 2:
            def integrand(phi):
                pts = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
                return density(pts)
            return integrate_interval(integrand, 0.0, math.pi, tol=tol).value

        nphi = 64  # trapezoid rule is spectrally exact in the periodic angle

        def integrand(theta):
            theta = np.asarray(theta, dtype=float)
            phis = 2.0 * math.pi * np.arange(nphi) / nphi
            st, ct = np.sin(theta)[:, None], np.cos(theta)[:, None]
            pts = np.stack([st * np.cos(phis), st * np.sin(phis),
                            np.broadcast_to(ct, (theta.size, nphi))], axis=-1)
            vals = density(pts.reshape(-1, 3)).reshape(theta.size, nphi)
            return vals.mean(axis=1) * 2.0 * math.pi * np.sin(theta)

        return integrate_interval(integrand, 0.0, math.pi / 2, tol=tol).value


def half_space(n: int, a: float = 0.0, norm: NormSpec | None = None) -> WeightedDomain:
    """R^(n-1) x R_+ with weight x_n^a."""
    return WeightedDomain(n, (a,), norm)


def parse_domain(text: str) -> WeightedDomain:
    """Parse ``domain:n=3,m=1,a=2.5,norm=lq:2`` (multiple a's separated by ';')."""
    s = text.strip()
    if s.startswith("domain:"):
        s = s[len("domain:"):]
    norm_text = None
    if "norm=" in s:
        s, norm_text = s.split("norm=", 1)
        s = s.rstrip(",")
    kv = dict(part.split("=", 1) for part in s.split(",") if part)
    n = int(kv["n"])
    a_txt = kv.get("a", "")
    a = tuple(float(x) for x in a_txt.split(";") if x != "")
    m = int(kv.get("m", len(a)))
    if len(a) == 1 and m > 1:
        a = a * m
    if len(a) != m:
        raise DomainError(f"m={m} but {len(a)} exponents given")
    norm = _norms.parse_norm(norm_text, n) if norm_text else LqNorm(2.0, n)
    return WeightedDomain(n, a, norm)
