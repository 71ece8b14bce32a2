"""Numerical integration: adaptive Gauss-Kronrod on intervals and on the
half-line, tensor Gauss rules on Sigma for n <= 3, and a seeded Monte Carlo
oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .errors import DivergenceError, DomainError, QuadratureError, UnsupportedError
from .special import lbeta, lgamma

__all__ = [
    "QuadratureResult", "integrate_interval", "integrate_halfline",
    "integrate_tensor", "monte_carlo_sigma", "DEFAULT_SEED", "DEFAULT_TOL",
]

DEFAULT_TOL = 1e-11
DEFAULT_SEED = 0x5EED
MAX_SUBDIVISIONS = 4000

# 15-point Kronrod extension of the 7-point Gauss rule (nodes in [0, 1)).
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])          # 15 nodes ascending
KRONROD_W = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_W = np.zeros(15)
GAUSS_W[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error_estimate: float
    subdivisions: int
    converged: bool = True

    def scaled(self, c: float) -> "QuadratureResult":
        return replace(self, value=self.value * c,
                       abs_error_estimate=self.abs_error_estimate * abs(c))

    def __float__(self):
        return float(self.value)


def _gk15(f, lo, hi):
    c = 0.5 * (lo + hi)
    h = 0.5 * (hi - lo)
    x = c[:, None] + h[:, None] * NODES[None, :]
    fx = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    if not np.all(np.isfinite(fx)):
        raise DomainError("integrand returned a non-finite value")
    k = h * (fx @ KRONROD_W)
    g = h * (fx @ GAUSS_W)
    resabs = np.abs(h) * (np.abs(fx) @ KRONROD_W)
    err = np.maximum(np.abs(k - g), 50.0 * np.finfo(float).eps * resabs)
    return k, err


def _adaptive(f, edges, rtol, atol, max_intervals):
    """Global adaptive bisection; every interval stays live.

    Each pass bisects the smallest set of worst intervals whose combined
    error estimate exceeds the excess over the target.
    """
    lo = np.asarray(edges[:-1], dtype=float)
    hi = np.asarray(edges[1:], dtype=float)
    val, err = _gk15(f, lo, hi)
    while True:
        total = val.sum()
        toterr = err.sum()
        target = max(atol, rtol * abs(total))
        if toterr <= target:
            return QuadratureResult(float(total), float(toterr), lo.size, True)
        if lo.size >= max_intervals:
            return QuadratureResult(float(total), float(toterr), lo.size, False)
        order = np.argsort(-err)
        nsel = int(np.searchsorted(np.cumsum(err[order]), toterr - target)) + 1
        sel = order[:min(nsel, lo.size, max_intervals - lo.size)]
        mid = 0.5 * (lo[sel] + hi[sel])
        if np.any((mid <= lo[sel]) | (mid >= hi[sel])):
            # an interval is down to machine resolution; nothing left to gain
            return QuadratureResult(float(total), float(toterr), lo.size, False)
        nlo = np.concatenate([lo[sel], mid])
        nhi = np.concatenate([mid, hi[sel]])
        nval, nerr = _gk15(f, nlo, nhi)
        keep = np.ones(lo.size, dtype=bool)
        keep[sel] = False
        lo = np.concatenate([lo[keep], nlo])
        hi = np.concatenate([hi[keep], nhi])
        val = np.concatenate([val[keep], nval])
        err = np.concatenate([err[keep], nerr])


def _finish(res, strict, what):
    if strict and not res.converged:
        raise QuadratureError(
            f"{what}: error estimate {res.abs_error_estimate:.3e} above tolerance "
            f"after {res.subdivisions} subdivisions (value {res.value:.16g})", res)
    return res


def integrate_interval(f, a: float, b: float, tol: float = DEFAULT_TOL, *,
                       atol: float = 0.0, breakpoints=(), endpoint_exponent=None,
                       max_subdivisions: int = MAX_SUBDIVISIONS,
                       strict: bool = True) -> QuadratureResult:
    """Adaptive G7-K15 quadrature of a vectorised ``f`` over [a, b].

    ``endpoint_exponent`` beta in (-1, 0) announces an integrable
    (b - r)^beta singularity at the right end; the substitution
    r = b - (b - a) u^(1/(1+beta)) then removes it.
    """
    if not (b > a):
        if b == a:
            return QuadratureResult(0.0, 0.0, 0)
        raise DomainError("integrate_interval needs a < b")
    if endpoint_exponent is not None and -1.0 < endpoint_exponent < 0.0:
        k = 1.0 / (1.0 + endpoint_exponent)
        width = b - a

        def g(u):
            return f(b - width * u ** k) * width * k * u ** (k - 1.0)

        return _finish(_adaptive(g, [0.0, 1.0], tol, atol, max_subdivisions),
                       strict, "integrate_interval")
    pts = sorted({float(x) for x in breakpoints if a < x < b})
    edges = [a] + pts + [b]
    return _finish(_adaptive(f, edges, tol, atol, max_subdivisions),
                   strict, "integrate_interval")


_SCAN = np.geomspace(1e-4, 1e8, 97)


def _split_radius(f, scale=1.0):
    r = _SCAN * scale
    v = np.abs(np.asarray(f(r), dtype=float))
    if not np.all(np.isfinite(v)) or v.max() == 0:
        return scale
    i = int(np.argmax(v))
    below = np.nonzero(v[i:] < 1e-3 * v[i])[0]
    return float(r[i + below[0]]) if below.size else float(r[-1])


def _tail_test(f, r0):
    """Reject non-decaying integrands; return the algebraic decay exponent
    gamma of |f| ~ r^-gamma far out (inf when f underflows to 0)."""
    rs = r0 * np.array([1e6, 1e9, 1e12])
    with np.errstate(all="ignore"):
        fv = np.abs(np.asarray(f(rs), dtype=float))
        vals = fv * rs
    if not np.all(np.isfinite(vals)):
        raise DivergenceError("integrand is not finite far out on the half-line")
    # r f(r) must decay for the tail to be integrable
    if vals[-1] > 0 and vals[-1] >= 0.5 * vals[0]:
        raise DivergenceError("integrand does not decay faster than 1/r")
    if fv[1] == 0.0 or fv[2] == 0.0:
        return math.inf
    return -math.log(fv[2] / fv[1]) / math.log(1e3)


def integrate_halfline(f, tol: float = DEFAULT_TOL, *, atol: float = 0.0,
                       r_split: float | None = None, breakpoints=(),
                       max_subdivisions: int = MAX_SUBDIVISIONS,
                       strict: bool = True) -> QuadratureResult:
    """int_0^inf f(r) dr.

    Adaptive G7-K15 on [0, R_split], then a map of the tail onto (0, 1).
    R_split is where |f| first drops below 1e-3 of its maximum on a coarse log
    grid, unless given.  A tail decaying like r^-gamma with 1 < gamma < 20 is
    mapped by r = R_split u^(-1/(gamma-1)), which makes the transformed
    integrand nearly constant; faster tails use r = R_split + s/(1 - s).
    """
    if r_split is None:
        r_split = _split_radius(f)
    gamma = _tail_test(f, max(r_split, 1.0))
    # head and tail share the absolute budget
    head = integrate_interval(f, 0.0, r_split, tol, atol=0.5 * atol,
                              breakpoints=breakpoints,
                              max_subdivisions=max_subdivisions, strict=False)
    far = [x for x in breakpoints if x > r_split]
    if 1.0 < gamma < 20.0:
        k = 1.0 / (gamma - 1.0)
        tail_bps = [(x / r_split) ** (-1.0 / k) for x in far]

        def g(u):
            u = np.asarray(u, dtype=float)
            with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
                r = r_split * u ** -k
                v = np.asarray(f(r), dtype=float)
                out = v * k * r / u
            return np.where(v == 0.0, 0.0, out)
    else:
        tail_bps = [(x - r_split) / (1.0 + x - r_split) for x in far]

        def g(s):
            one_minus = np.maximum(1.0 - s, 1e-300)
            with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
                r = r_split + s / one_minus
                v = np.asarray(f(r), dtype=float)
                return np.where(v == 0.0, 0.0, v / (one_minus * one_minus))

    tail_atol = max(0.5 * atol, 0.5 * tol * abs(head.value))
    tail = integrate_interval(g, 0.0, 1.0, tol, atol=tail_atol, breakpoints=tail_bps,
                              max_subdivisions=max_subdivisions, strict=False)
    total = head.value + tail.value
    err = head.abs_error_estimate + tail.abs_error_estimate
    ok = err <= max(atol, tol * abs(total)) * 1.5
    res = QuadratureResult(float(total), float(err),
                           head.subdivisions + tail.subdivisions, bool(ok))
    return _finish(res, strict, "integrate_halfline")


# --- tensor rules on Sigma (n <= 3) -------------------------------------

def _panel_rule(lo, hi, npts, panels, jacobi_a=None):
    """Composite Gauss rule on [lo, hi] (arrays of per-point bounds).

    With ``jacobi_a`` the weight t^a is folded into the weights; when lo == 0
    the first panel uses Gauss-Jacobi nodes for it.
    """
    x, w = roots_legendre(npts)
    edges = lo[:, None] + (hi - lo)[:, None] * np.linspace(0, 1, panels + 1)[None, :]
    nodes, weights = [], []
    for j in range(panels):
        a0, b0 = edges[:, j], edges[:, j + 1]
        h = 0.5 * (b0 - a0)
        if jacobi_a is not None and j == 0 and jacobi_a > 0 and np.all(lo == 0):
            xj, wj = roots_jacobi(npts, 0.0, jacobi_a)
            t = a0[:, None] + h[:, None] * (1 + xj[None, :])
            nodes.append(t)
            weights.append(h[:, None] ** (1 + jacobi_a) * wj[None, :])
            continue
        t = (a0 + h)[:, None] + h[:, None] * x[None, :]
        ww = h[:, None] * w[None, :]
        if jacobi_a is not None and jacobi_a > 0:
            ww = ww * t ** jacobi_a
        nodes.append(t)
        weights.append(ww)
    return np.concatenate(nodes, axis=1), np.concatenate(weights, axis=1)


def _coord_rule(lo, hi, npts, panels, jacobi_a, scale):
    """Per-point 1-D rule; infinite ends are split at +-scale and mapped."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)):
        return _panel_rule(lo, hi, npts, panels, jacobi_a)
    if lo.size != 1 or hi.size != 1:
        raise UnsupportedError("variable bounds must be finite")
    lo0, hi0 = float(lo[0]), float(hi[0])
    parts = []
    mid_lo = lo0 if math.isfinite(lo0) else -scale
    mid_hi = hi0 if math.isfinite(hi0) else max(scale, mid_lo + scale)
    parts.append(_panel_rule(np.array([mid_lo]), np.array([mid_hi]), npts, panels, jacobi_a))
    u, wu = _panel_rule(np.array([0.0]), np.array([1.0]), npts, max(panels // 2, 2))
    u = u[0]
    wu = wu[0]
    if not math.isfinite(hi0):
        t = mid_hi / u
        ww = wu * mid_hi / u ** 2
        if jacobi_a:
            ww = ww * t ** jacobi_a
        parts.append((t[None, :], ww[None, :]))
    if not math.isfinite(lo0):
        t = mid_lo / u
        ww = wu * abs(mid_lo) / u ** 2
        parts.append((t[None, :], ww[None, :]))
    return (np.concatenate([p[0] for p in parts], axis=1),
            np.concatenate([p[1] for p in parts], axis=1))


def _tensor_once(dom, f, box, npts, panels, scale):
    exps = dom.exponents
    restricted = dom.restricted
    pts = np.zeros((1, 0))
    wts = np.ones(1)
    for i in range(dom.n):
        lo, hi = box[i]
        lo = lo(pts) if callable(lo) else np.full(pts.shape[0], lo, dtype=float)
        hi = hi(pts) if callable(hi) else np.full(pts.shape[0], hi, dtype=float)
        if np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)):
            x, w = _coord_rule(lo, hi, npts, panels, exps[i] if restricted[i] else None, scale)
        else:
            x1, w1 = _coord_rule(lo[:1], hi[:1], npts, panels,
                                 exps[i] if restricted[i] else None, scale)
            x = np.broadcast_to(x1, (pts.shape[0], x1.shape[1]))
            w = np.broadcast_to(w1, (pts.shape[0], w1.shape[1]))
        k = x.shape[1]
        pts = np.concatenate([np.repeat(pts, k, axis=0), x.reshape(-1, 1)], axis=1)
        wts = (wts[:, None] * w).reshape(-1)
    vals = np.asarray(f(pts), dtype=float)
    return float(np.dot(wts, vals)), pts.shape[0]


def integrate_tensor(dom, f, box=None, tol: float = 1e-8, *, panels: int = 4,
                     scale: float = 4.0, start: int = 8, max_points: int = 4_000_000,
                     strict: bool = True) -> QuadratureResult:
    """Tensor Gauss quadrature of ``f(z) sigma(z)`` over a box in Sigma.

    ``box`` lists (lo, hi) per coordinate; bounds may be infinite or callables
    of the outer coordinates (array of shape (K, i)), e.g. to integrate over
    B cap Sigma.  Weighted coordinates starting at 0 use Gauss-Jacobi nodes
    for t^a.  The node count per panel doubles until two successive estimates
    agree to ``tol`` (relative).
    """
    if dom.n > 3:
        raise UnsupportedError("tensor quadrature is limited to n <= 3")
    if box is None:
        box = [(-math.inf, math.inf)] * (dom.n - dom.m) + [(0.0, math.inf)] * dom.m
    if len(box) != dom.n:
        raise DomainError("box needs one (lo, hi) pair per coordinate")
    npts = start
    prev, _ = _tensor_once(dom, f, box, npts, panels, scale)
    while True:
        npts *= 2
        cur, count = _tensor_once(dom, f, box, npts, panels, scale)
        err = abs(cur - prev)
        if err <= tol * abs(cur) or count * 2 ** dom.n > max_points:
            res = QuadratureResult(cur, err, npts, err <= tol * abs(cur))
            return _finish(res, strict, "integrate_tensor")
        prev = cur


# --- Monte Carlo oracle ---------------------------------------------------

def _student_t_logpdf(x, nu):
    return (lgamma((nu + 1) / 2) - lgamma(nu / 2) - 0.5 * math.log(nu * math.pi)
            - 0.5 * (nu + 1) * np.log1p(x * x / nu))


def monte_carlo_sigma(dom, f, samples: int = 1_000_000, seed: int = DEFAULT_SEED, *,
                      scale: float = 1.0, free_dof: float = 3.0, tail: float = 2.0,
                      batch: int = 1 << 17):
    """Importance-sampling estimate of int_Sigma f(z) sigma(z) dz.

    Free coordinates are drawn from a Student-t law, weighted coordinates from
    a beta-prime law with density proportional to t^a (1 + t)^(-(a+1+tail)),
    which absorbs the weight near 0 and keeps a polynomial tail.  Batches use
    child seeds spawned from ``seed``, so the estimate is deterministic.
    Returns ``(estimate, std_error)``.
    """
    if samples < 1000:
        raise DomainError("monte_carlo_sigma needs at least 1000 samples")
    nb = -(-samples // batch)
    children = np.random.SeedSequence(seed).spawn(nb)
    total = 0.0
    total_sq = 0.0
    done = 0
    nfree = dom.n - dom.m
    for child in children:
        k = min(batch, samples - done)
        rng = np.random.default_rng(child)
        z = np.empty((k, dom.n))
        logq = np.zeros(k)
        for i in range(nfree):
            x = rng.standard_t(free_dof, size=k)
            z[:, i] = scale * x
            logq += _student_t_logpdf(x, free_dof) - math.log(scale)
        logw = np.zeros(k)
        for j, a in enumerate(dom.a):
            b = rng.beta(a + 1.0, tail, size=k)
            u = b / (1.0 - b)
            z[:, nfree + j] = scale * u
            # sigma / proposal for this coordinate, in closed form
            logw += (float(lbeta(a + 1.0, tail)) + (a + 1.0 + tail) * np.log1p(u)
                     + (a + 1.0) * math.log(scale))
        vals = np.asarray(f(z), dtype=float) * np.exp(logw - logq)
        total += vals.sum()
        total_sq += np.dot(vals, vals)
        done += k
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0)
    return mean, math.sqrt(var / (samples - 1))
