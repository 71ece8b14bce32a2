import math

import numpy as np
import pytest
from scipy import integrate
from scipy.special import gamma as G, gammaln

from sharpineq import constants as C
from sharpineq import extremals as E
from sharpineq import verify as V
from sharpineq.domain import WeightedDomain, half_space
from sharpineq.errors import ParameterError
from sharpineq.norms import LqNorm


# -- independent oracles -------------------------------------------------------

def ball_measure_gaussian(n, a_list, q=2.0):
    """V from int e^{-||z||_q^q} = V Gamma(n_a/q + 1), coordinatewise."""
    m = len(a_list)
    full = (2 * G(1 / q + 1)) ** (n - m)
    half = np.prod([G((a + 1) / q) / q for a in a_list]) if m else 1.0
    n_a = n + sum(a_list)
    return full * half / G(n_a / q + 1)


def radial_quad(n_a, vol, g):
    val, _ = integrate.quad(lambda r: g(r) * r ** (n_a - 1), 0, np.inf,
                            epsabs=0, epsrel=1e-13, limit=400)
    return n_a * vol * val


def aubin_talenti(n, p):
    return (math.pi ** -0.5 * n ** (-1 / p) * ((p - 1) / (n - p)) ** (1 - 1 / p)
            * (G(1 + n / 2) * G(n) / (G(n / p) * G(1 + n - n / p))) ** (1 / n))


def del_pino_dolbeault(n, alpha):
    theta = n * (alpha - 1) / (alpha * (n + 2 - (n - 2) * alpha))
    y = (alpha + 1) / (alpha - 1)
    return ((y * (alpha - 1) ** 2 / (2 * math.pi * n)) ** (theta / 2)
            * ((2 * y - n) / (2 * y)) ** (1 / (2 * alpha))
            * (G(y) / G(y - n / 2)) ** (theta / n)), theta


# -- ball measure used by every constant -------------------------------------------

@pytest.mark.parametrize("n,a,q", [(2, [], 2.0), (3, [1.0], 2.0), (3, [0.5, 2.5], 2.0),
                                   (2, [1.5], 4.0), (3, [], 1.5)])
def test_ball_measure_vs_gaussian_identity(n, a, q):
    dom = WeightedDomain(n, tuple(a), LqNorm(q, n))
    assert dom.ball_measure() == pytest.approx(ball_measure_gaussian(n, a, q), rel=1e-13)


# -- Sobolev -----------------------------------------------------------------------

@pytest.mark.parametrize("n,p", [(3, 2.0), (3, 1.5), (4, 2.0), (5, 3.0), (10, 2.5)])
def test_sobolev_matches_aubin_talenti(n, p):
    assert C.sobolev_constant(WeightedDomain(n), p).value == pytest.approx(
        aubin_talenti(n, p), rel=1e-13)


@pytest.mark.parametrize("n,a,p,q", [(2, [1.0], 2.0, 2.0), (3, [0.5], 1.7, 2.0),
                                     (2, [2.5], 3.0, 4.0), (3, [0.5, 1.0], 2.2, 2.0)])
def test_sobolev_equals_extremal_quotient(n, a, p, q):
    dom = WeightedDomain(n, tuple(a), LqNorm(q, n))
    n_a, vol = dom.n_a, ball_measure_gaussian(n, a, q)
    qq = p / (p - 1)
    ps = n_a * p / (n_a - p)
    e = -(n_a - p) / p
    f = lambda r: (1 + r ** qq) ** e
    df = lambda r: abs(e) * qq * r ** (qq - 1) * (1 + r ** qq) ** (e - 1)
    quot = radial_quad(n_a, vol, lambda r: df(r) ** p) ** (1 / p) / \
        radial_quad(n_a, vol, lambda r: f(r) ** ps) ** (1 / ps)
    assert C.sobolev_constant(dom, p).value == pytest.approx(1 / quot, rel=1e-10)


def test_sobolev_l1_is_isoperimetric():
    for dom in (half_space(2, 1.0), WeightedDomain(3), half_space(3, 2.5, LqNorm(3.0, 3))):
        s1 = C.sobolev_l1_constant(dom).value
        # P(B)/V(B)^(1-1/n_a) = n_a V^(1/n_a)
        assert 1 / s1 == pytest.approx(dom.ball_perimeter() / dom.ball_measure()
                                       ** (1 - 1 / dom.n_a), rel=1e-14)


def test_sobolev_range():
    dom = half_space(2, 0.5)
    for p in (1.0, 2.5, 3.0):
        with pytest.raises(ParameterError):
            C.sobolev_constant(dom, p)


def test_fraction_input():
    dom = half_space(3, 0.5)
    assert C.sobolev_constant(dom, "3/2").value == C.sobolev_constant(dom, 1.5).value


# -- Gagliardo-Nirenberg -------------------------------------------------------------

@pytest.mark.parametrize("n,alpha", [(3, 1.5), (3, 3.0), (4, 1.2), (4, 2.0), (5, 5 / 3)])
def test_gn_matches_del_pino_dolbeault(n, alpha):
    sharp = C.gn_constant(WeightedDomain(n), 2.0, alpha)
    ref, theta = del_pino_dolbeault(n, alpha)
    assert sharp.value == pytest.approx(ref, rel=1e-12)
    assert sharp.theta == pytest.approx(theta, rel=1e-14)


@pytest.mark.parametrize("n,a,p,alpha", [(2, [1.0], 2.0, 0.5), (3, [0.5], 1.5, 0.7),
                                         (2, [1.0], 2.0, 1.8), (3, [2.0], 2.5, 1.4),
                                         (3, [0.5], 3.0, 0.3)])
def test_gn_equals_extremal_quotient(n, a, p, alpha):
    dom = half_space(n, a[0])
    n_a, vol = dom.n_a, ball_measure_gaussian(n, a)
    qq = p / (p - 1)
    e = 1 / (1 - alpha)
    c = alpha - 1
    if alpha > 1:
        f = lambda r: (1 + c * r ** qq) ** e
        df = lambda r: abs(e * c * qq) * r ** (qq - 1) * (1 + c * r ** qq) ** (e - 1)
        hi = np.inf
    else:
        hi = (1 / -c) ** (1 / qq)
        f = lambda r: max(1 + c * r ** qq, 0.0) ** e
        df = lambda r: abs(e * c * qq) * r ** (qq - 1) * max(1 + c * r ** qq, 0.0) ** (e - 1)

    def integral(g):
        val, _ = integrate.quad(lambda r: g(r) * r ** (n_a - 1), 0, hi, epsabs=0,
                                epsrel=1e-13, limit=400)
        return n_a * vol * val

    ap, pa = alpha * p, alpha * p - alpha + 1
    lp = lambda s: integral(lambda r: f(r) ** s) ** (1 / s)
    grad = integral(lambda r: df(r) ** p) ** (1 / p)
    sharp = C.gn_constant(dom, p, alpha)
    th = sharp.theta
    if alpha > 1:
        ratio = lp(ap) / (grad ** th * lp(pa) ** (1 - th))
    else:
        ratio = lp(pa) / (grad ** th * lp(ap) ** (1 - th))
    assert sharp.value == pytest.approx(ratio, rel=1e-9)


@pytest.mark.parametrize("n,a,p,alpha", [(2, 1.0, 2.0, 0.5), (2, 1.0, 2.0, 2.0),
                                         (3, 0.5, 1.5, 0.8), (3, 2.5, 3.0, 1.5)])
def test_theta_from_dilation_invariance(n, a, p, alpha):
    dom = half_space(n, a)
    f = E.random_spline(np.random.default_rng(5), tail_range=(8.0, 10.0))
    out = V.theta_solve(dom, p, alpha, f)
    assert out["theta"] == pytest.approx(C.gn_theta(dom.n_a, p, alpha), abs=1e-9)
    assert out["residual"] < 1e-9


def test_gn_endpoint_is_sobolev():
    # alpha = n_a/(n_a - p): theta = 1 and G = S
    dom = half_space(3, 1.0)
    p = 2.0
    top = dom.n_a / (dom.n_a - p)
    g = C.gn_constant(dom, p, top)
    assert g.theta == pytest.approx(1.0, abs=1e-12)
    assert g.value == pytest.approx(C.sobolev_constant(dom, p).value, rel=1e-12)


def test_gn_range():
    dom = half_space(2, 1.0)
    with pytest.raises(ParameterError):
        C.gn_constant(dom, 2.0, 1.0)
    with pytest.raises(ParameterError):
        C.gn_constant(dom, 2.0, 3.5)
    with pytest.raises(ParameterError):
        C.gn_constant(dom, 2.0, 0.0)


# -- log-Sobolev -------------------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 3, 7])
def test_gaussian_log_sobolev(n):
    assert C.logsob_constant(WeightedDomain(n), 2).value == pytest.approx(
        2 / (math.pi * math.e * n), rel=1e-13)


@pytest.mark.parametrize("n,a,p", [(2, 1.0, 2.0), (3, 0.5, 1.5), (2, 2.0, 3.0)])
def test_log_sobolev_equality_on_gaussian_type(n, a, p):
    dom = half_space(n, a)
    rep = V.logsob_deficit(dom, p, E.logsob_extremal(dom, p, scale=0.7))
    assert abs(rep.deficit) < 1e-9


def test_log_sobolev_p1_uses_isoperimetry():
    dom = half_space(2, 1.5)
    assert C.logsob_constant(dom, 1).value == pytest.approx(
        C.sobolev_l1_constant(dom).value, rel=1e-14)


# -- dimension reduction ------------------------------------------------------------------

@pytest.mark.parametrize("n,p,a", [(3, 2.0, 0.0), (2, 2.0, 1.0), (2, 1.5, 0.5),
                                   (1, 1.5, 0.5), (2, 3.0, 0.5), (3, 3.5, 1.0)])
def test_dimension_reduction_assembly(n, p, a):
    closed = C.euclidean_gn_constant(n, p, a)
    built = C.assembled_gn_constant(n, p, a)
    assert built["log_value"] == pytest.approx(closed.log_value, abs=1e-10)
    assert built["theta"] == pytest.approx(closed.theta, rel=1e-12)


@pytest.mark.parametrize("n,p,a", [(3, 2.0, 0.0), (2, 1.5, 0.5), (2, 3.0, 0.5)])
def test_reduction_factors_vs_quadrature(n, p, a):
    fac = C.euclidean_gn_factors(n, p, a)
    q = p / (p - 1)
    N = n + 1 + a
    s1, _ = integrate.quad(lambda t: t ** a * (1 + t ** q) ** -N, 0, np.inf, epsrel=1e-13)
    s3, _ = integrate.quad(lambda t: t ** (q + a) * (1 + t ** q) ** -N, 0, np.inf, epsrel=1e-13)
    assert fac["S1"] == pytest.approx(s1, rel=1e-10)
    assert fac["S3"] == pytest.approx(s3, rel=1e-10)


def test_euclidean_gn_with_a0_p2_is_del_pino_dolbeault():
    sharp = C.euclidean_gn_constant(3, 2.0, 0.0)
    assert sharp.alpha == pytest.approx(7 / 3)
    ref, theta = del_pino_dolbeault(3, 7 / 3)
    assert sharp.value == pytest.approx(ref, rel=1e-12)
    assert sharp.theta == pytest.approx(theta, rel=1e-12)


def test_euclidean_gn_branches():
    n, a = 2, 0.5
    pc = C.euclidean_gn_critical_p(n, a)
    assert C.euclidean_gn_constant(n, pc - 0.2, a).branch == "i"
    assert C.euclidean_gn_constant(n, pc + 0.2, a).alpha < 0
    with pytest.raises(ParameterError):
        C.euclidean_gn_constant(n, pc, a)


# -- tensorisation --------------------------------------------------------------------------

@pytest.mark.parametrize("k", [1, 2, 3, 5])
def test_tensor_ball_recursion_vs_closed_form(k):
    dom = half_space(2, 1.0)
    q = 2.0
    assert C.tensor_log_ball(dom, k, q) == pytest.approx(C.tensor_log_ball_closed(dom, k, q),
                                                         rel=1e-12, abs=1e-12)


def test_tensorization_limit_converges():
    out = V.tensorization_limit(2, 1.0, 2.0, 60, ks=[2, 8, 32, 128, 512])
    gaps = [r["rel_gap"] for r in out["rows"]]
    assert out["monotone_from_2"]
    assert gaps[-1] < gaps[0] / 50
    # the limit is the log-Sobolev constant written with L^(1/p)
    dom = half_space(2, 1.0)
    assert out["limit"] ** 2 == pytest.approx(C.logsob_constant(dom, 2).value, rel=1e-13)
