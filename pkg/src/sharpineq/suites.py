"""Default verification grids shared by the CLI and the test-suite.

Every suite returns a list of flat records; each record has a ``pass`` flag
and the numbers it was judged on.  ``quick`` shrinks the random samples and
grids so ``verify all --quick`` stays well inside a couple of minutes.
"""

from __future__ import annotations

import math

import numpy as np

from . import constants as C
from . import extremals as E
from . import transport as T
from . import verify as V
from .domain import WeightedDomain, half_space
from .errors import NegativityError, ParameterError
from .norms import LqNorm, format_norm
from .quadrature import DEFAULT_SEED, monte_carlo_sigma

SUITES = ("sobolev", "gn", "logsob", "duality", "dimred", "tensor", "transport", "mc")

N_VALUES = (1, 2, 3)
A_VALUES = (0.0, 0.5, 1.0, 2.5)
P_VALUES = (1.5, 2.0, 3.0)
NORM_Q = (2.0, 4.0)
GN_ALPHAS = (0.5, 0.9, 2.0)            # plus the critical n_a/(n_a - p)

SOBOLEV_TOL = 1e-8
GN_TOL = 1e-7
LOGSOB_TOL = 1e-7
SOUND_TOL = 1e-8
DUAL_TOL = 1e-7
MU_SEPARATION = 1e-4
ISOPERIMETRY_TOL = 1e-6

DIMRED_POINTS = ((1, 2.0, 0.0), (2, 1.5, 1.0), (3, 2.0, 0.0), (1, 2.5, 0.0),
                 (1, 1.5, 0.0), (1, 1.8, 0.0), (1, 2.5, 1.0))


def grid_domains(quick: bool = False):
    """(domain, p) over the standard grid, valid p < n_a only."""
    norms = NORM_Q[:1] if quick else NORM_Q
    for q in norms:
        for n in N_VALUES:
            for a in A_VALUES:
                dom = half_space(n, a, LqNorm(q, n))
                for p in P_VALUES:
                    if p < dom.n_a:
                        yield dom, p


def _case(dom: WeightedDomain, **extra) -> dict:
    out = {"n": dom.n, "a": dom.a[0] if dom.a else 0.0, "norm": format_norm(dom.norm)}
    out.update(extra)
    return out


def admissible_tail(dom: WeightedDomain, exponents, p: float | None = None,
                    shift: float = 0.0, margin: float = 0.25) -> float:
    """Smallest spline tail keeping int f^s r^(n_a-1+shift) and the p-energy finite."""
    n_a = dom.n_a
    need = max((n_a + shift) / s for s in exponents)
    if p is not None:
        need = max(need, n_a / p - 1.0)
    return need + margin


def random_profile(dom: WeightedDomain, rng: np.random.Generator, exponent: float,
                   tail_min: float, compact: bool = False) -> E.RadialProfile:
    """Seeded random spline, normalised so int f^exponent = 1."""
    cutoff = (rng.uniform(2.0, 8.0), 3.0) if compact else None
    prof = E.random_spline(rng, (tail_min, tail_min + 4.0), cutoff=cutoff)
    return prof.with_constraint(dom, exponent).normalized()


def random_bump(prof: E.RadialProfile, rng: np.random.Generator, scale: float = 1.0):
    """A perturbation keeping the profile positive; retries on negativity."""
    for _ in range(50):
        center = rng.uniform(0.0, 3.0 * scale)
        width = rng.uniform(0.1, 1.0) * scale
        amp = rng.uniform(-0.5, 0.5) * float(prof.f(center))
        try:
            return E.perturb(prof, (center, width, amp))
        except NegativityError:
            continue
    raise NegativityError("no admissible perturbation found")


# -- suites -------------------------------------------------------------------------

def sobolev_suite(quick: bool = False, seed: int = 0, perturbations: int | None = None):
    perturbations = (5 if quick else 20) if perturbations is None else perturbations
    rows = []
    for dom, p in grid_domains(quick):
        h = E.sobolev_extremal(dom, p)
        rep = V.sobolev_quotient(dom, p, h)
        rng = np.random.default_rng([seed, dom.n, int(dom.a[0] * 10), int(p * 10),
                                     int(dom.norm.q)])
        worst = math.inf
        for _ in range(perturbations):
            worst = min(worst, V.sobolev_quotient(dom, p, random_bump(h, rng)).deficit)
        ok = abs(rep.deficit) <= SOBOLEV_TOL and worst >= -SOUND_TOL
        rows.append(_case(dom, p=p, check="extremal", deficit=rep.deficit,
                          min_perturbed_deficit=worst, perturbations=perturbations, **{"pass": ok}))
    for n, a in ((2, 0.0), (2, 1.0), (3, 2.0)):
        dom = half_space(n, a)
        rows.append(isoperimetry_record(dom))
    return rows


def isoperimetry_record(dom: WeightedDomain, tol: float = ISOPERIMETRY_TOL) -> dict:
    exact = dom.ball_perimeter()
    surf = dom.surface_perimeter_quadrature()
    rep = V.sobolev_quotient(dom, 1.0, E.indicator(dom, 1.0))
    ok = abs(surf / exact - 1.0) <= tol and abs(rep.deficit) <= SOBOLEV_TOL
    return _case(dom, p=1.0, check="isoperimetry", perimeter=exact, surface_quadrature=surf,
                 deficit=rep.deficit, **{"pass": ok})


def gn_alphas(dom: WeightedDomain, p: float):
    crit = dom.n_a / (dom.n_a - p)
    return [al for al in GN_ALPHAS if al < crit] + [crit]


def gn_suite(quick: bool = False, seed: int = 0, perturbations: int | None = None):
    perturbations = (3 if quick else 10) if perturbations is None else perturbations
    rows = []
    for dom, p in grid_domains(quick):
        sob = C.sobolev_constant(dom, p)
        for alpha in gn_alphas(dom, p):
            h = E.gn_extremal(dom, p, alpha)
            rep = V.gn_quotients(dom, p, alpha, h)
            rng = np.random.default_rng([seed, dom.n, int(dom.a[0] * 10), int(p * 10),
                                         int(alpha * 1000)])
            worst = math.inf
            for _ in range(perturbations):
                worst = min(worst, V.gn_quotients(dom, p, alpha, random_bump(h, rng)).deficit)
            crit = alpha == dom.n_a / (dom.n_a - p)
            ok = abs(rep.deficit) <= GN_TOL and worst >= -SOUND_TOL
            rec = _case(dom, p=p, alpha=alpha, check="extremal", deficit=rep.deficit,
                        theta=rep.extras["theta"], min_perturbed_deficit=worst)
            if crit:
                gn = C.gn_constant(dom, p, alpha)
                rec["sobolev_match"] = abs(math.expm1(gn.log_value - sob.log_value))
                ok = ok and rec["sobolev_match"] <= 1e-10
            rec["pass"] = ok
            rows.append(rec)
    return rows


def logsob_suite(quick: bool = False, seed: int = 0, samples: int | None = None):
    samples = (5 if quick else 50) if samples is None else samples
    rows = []
    for n, a in ((1, 0.0), (2, 1.0)):
        dom = WeightedDomain(n, (a,) if a else ())
        for p in (1.5, 2.0, 3.0):
            h = E.logsob_extremal(dom, p)
            rep = V.logsob_deficit(dom, p, h)
            rng = np.random.default_rng([seed, n, int(a), int(p * 10)])
            tail = admissible_tail(dom, (p,), p) + 0.5
            # random splines probe far from equality, bumped extremals close to it
            worst = min(min(V.logsob_deficit(dom, p, random_profile(dom, rng, p, tail)).deficit,
                            V.logsob_deficit(dom, p, random_bump(h, rng)).deficit)
                        for _ in range(samples))
            rows.append(_case(dom, p=p, check="extremal", deficit=rep.deficit,
                              min_random_deficit=worst, samples=samples,
                              **{"pass": abs(rep.deficit) <= LOGSOB_TOL and worst >= -SOUND_TOL}))
        rep = V.logsob_deficit(dom, 1.0, E.logsob_extremal(dom, 1.0))
        rows.append(_case(dom, p=1.0, check="indicator", deficit=rep.deficit,
                          **{"pass": abs(rep.deficit) <= LOGSOB_TOL}))
    return rows


DUALITY_CASES = ((2, 1.0, 2.0), (3, 0.0, 2.0), (1, 2.5, 1.5), (3, 0.5, 3.0))


def duality_suite(quick: bool = False, seed: int = 0, samples: int | None = None):
    samples = (5 if quick else 50) if samples is None else samples
    cases = DUALITY_CASES[:2] if quick else DUALITY_CASES
    rows = []
    for n, a, p in cases:
        dom = half_space(n, a)
        ps = dom.n_a * p / (dom.n_a - p)
        q = p / (p - 1.0)
        h = E.sobolev_extremal(dom, p)
        ext = V.duality_gap_sobolev(dom, p, h, h)
        rng = np.random.default_rng([seed, n, int(a * 10), int(p * 10)])
        tail = admissible_tail(dom, (ps, ps * (1 - 1 / dom.n_a)), p, shift=q)
        worst = math.inf
        for _ in range(samples):
            f = random_profile(dom, rng, ps, tail)
            g = random_profile(dom, rng, ps, tail)
            worst = min(worst, V.duality_gap_sobolev(dom, p, f, g).deficit)
        rows.append(_case(dom, p=p, check="sobolev-duality", extremal_gap=ext.deficit,
                          min_random_gap=worst,
                          **{"pass": abs(ext.deficit) <= DUAL_TOL and worst >= -SOUND_TOL}))
        for alpha in (0.5, 2.0):
            if alpha >= dom.n_a / (dom.n_a - p):
                continue
            h = E.gn_extremal(dom, p, alpha).with_constraint(dom, alpha * p).normalized()
            ext = V.duality_gap_gn(dom, p, alpha, h, h)
            off = min(V.duality_gap_gn(dom, p, alpha, h, h, mu=mu).deficit
                      for mu in (0.5 * q ** (1 / q), 2.0 * q ** (1 / q)))
            ap, pa = alpha * p, alpha * p - alpha + 1
            tail = admissible_tail(dom, (ap, pa), p, shift=q)
            worst = math.inf
            for _ in range(samples):
                f = random_profile(dom, rng, ap, tail)
                g = random_profile(dom, rng, ap, tail)
                worst = min(worst, V.duality_gap_gn(dom, p, alpha, f, g).deficit)
            ok = abs(ext.deficit) <= DUAL_TOL and worst >= -SOUND_TOL and off > MU_SEPARATION
            rows.append(_case(dom, p=p, alpha=alpha, check="gn-duality",
                              extremal_gap=ext.deficit, off_mu_gap=off, min_random_gap=worst,
                              **{"pass": ok}))
    return rows


def dimred_suite(quick: bool = False, seed: int = 0):
    rows = []
    for n, p, a in DIMRED_POINTS:
        rec = {"n": n, "p": p, "a": a, "check": "dimension-reduction"}
        try:
            out = V.dimension_reduction_check(n, p, a)
        except ParameterError as exc:
            rec.update(status="parameter-error", message=str(exc), **{"pass": False})
            rows.append(rec)
            continue
        rec.update({k: out[k] for k in ("branch", "alpha", "theta", "closed_form", "assembled",
                                        "assembly_log_diff", "extremal_deficit", "pass")})
        if (n, p, a) == (3, 2.0, 0.0):
            upper = (n * p + 1) / (n * p + 1 - p * p)
            rec["alpha_in_range"] = 1.0 < out["alpha"] <= upper
            rec["pass"] = rec["pass"] and rec["alpha_in_range"]
        rows.append(rec)
    return rows


def tensor_suite(quick: bool = False, seed: int = 0):
    rows = []
    for n, a, p in ((1, 0.0, 2.0), (2, 1.0, 2.0), (1, 0.5, 1.5), (2, 0.0, 3.0)):
        out = V.tensorization_limit(n, a, p, 0, ks=(200, 1000))
        gaps = {r["k"]: r["rel_gap"] for r in out["rows"]}
        ok = gaps[200] <= 0.01 and gaps[1000] <= 0.002
        rows.append({"n": n, "a": a, "p": p, "check": "tensorization", "limit": out["limit"],
                     "rel_gap_200": gaps[200], "rel_gap_1000": gaps[1000], "pass": ok})
    return rows


def transport_suite(quick: bool = False, seed: int = 0, pairs: int | None = None):
    pairs = (3 if quick else 50) if pairs is None else pairs
    rows = []
    dom = half_space(2, 1.0)
    rng = np.random.default_rng([seed, 21])
    gammas = (1.0 - 1.0 / dom.n_a, 1.2, 2.0)
    worst, worst_resid = math.inf, 0.0
    for _ in range(pairs):
        F = random_profile(dom, rng, 1.0, 0.0, compact=True)
        G = random_profile(dom, rng, 1.0, 0.0, compact=True)
        tm = T.radial_brenier(dom, F, G)
        for g in gammas:
            out = T.transport_inequality_check(dom, g, F, G, tmap=tm)
            worst = min(worst, out["gap"])
            worst_resid = max(worst_resid, abs(out["boundary_term"]))
    rows.append({"n": dom.n, "a": dom.a[0], "check": "transport-random-pairs", "pairs": pairs,
                 "min_gap": worst, "max_decomposition_residual": worst_resid,
                 "pass": worst >= -SOUND_TOL and worst_resid <= 1e-6})
    F = random_profile(dom, rng, 1.0, 0.0, compact=True)
    same = T.transport_inequality_check(dom, gammas[0], F, F)
    rows.append({"n": dom.n, "a": dom.a[0], "check": "transport-identity", "gap": same["gap"],
                 "pass": abs(same["gap"]) <= 1e-7})
    return rows


MC_CASES = ((2, 1.0, 2.0, 3.0), (3, 0.5, 2.0, 3.0), (1, 2.5, 2.0, 4.0), (2, 0.0, 4.0, 3.0),
            (3, 2.0, 2.0, 5.0), (2, 1.0, 3.0, 2.5), (1, 0.0, 2.0, 2.0), (3, 1.0, 4.0, 3.5),
            (2, 2.5, 2.0, 4.5), (1, 1.0, 2.0, 3.0))


def mc_record(n, a, q, decay, samples, seed) -> dict:
    """radial_integral of (1 + r^2)^(-decay) against an importance-sampled estimate.

    2 decay must clear n_a comfortably, or the estimator has infinite variance
    and its standard error means nothing."""
    dom = half_space(n, a, LqNorm(q, n))
    from .norms import norm as _norm

    def g(r):
        return (1.0 + np.asarray(r) ** 2) ** (-decay)

    exact = dom.radial_integral(g)
    est, se = monte_carlo_sigma(dom, lambda z: g(_norm(dom.norm, z)), samples, seed)
    est, se = float(est), float(se)
    z = (est - exact) / se
    return _case(dom, check="monte-carlo", decay=decay, radial=exact, mc=est, std_error=se,
                 z_score=z, samples=samples, **{"pass": bool(abs(z) <= 3.0)})


def mc_suite(quick: bool = False, seed: int = DEFAULT_SEED, samples: int | None = None):
    samples = (100_000 if quick else 1_000_000) if samples is None else samples
    cases = MC_CASES[:3] if quick else MC_CASES
    return [mc_record(n, a, q, dec, samples, seed + i) for i, (n, a, q, dec) in enumerate(cases)]


RUNNERS = {
    "sobolev": sobolev_suite, "gn": gn_suite, "logsob": logsob_suite,
    "duality": duality_suite, "dimred": dimred_suite, "tensor": tensor_suite,
    "transport": transport_suite, "mc": mc_suite,
}


def run_suite(name: str, quick: bool = False, seed: int = 0, mc_samples: int | None = None):
    if name not in RUNNERS:
        raise ParameterError(f"unknown suite {name!r}; choose from {SUITES}")
    if name == "mc":
        rows = mc_suite(quick, seed, mc_samples)
    else:
        rows = RUNNERS[name](quick=quick, seed=seed)
    for r in rows:
        r.setdefault("status", "ok")
        r["suite"] = name
    return rows
