import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from sharpineq.domain import WeightedDomain, half_space, log_ball_measure, parse_domain
from sharpineq.errors import DimensionMismatchError, DomainError, UnsupportedError
from sharpineq.norms import LqNorm, ProductNorm, norm


def test_rejects_bad_domains():
    with pytest.raises(DomainError):
        WeightedDomain(0)
    with pytest.raises(DomainError):
        WeightedDomain(2, (1.0, 1.0, 1.0))
    with pytest.raises(DomainError):
        WeightedDomain(2, (-0.5,))
    with pytest.raises(DimensionMismatchError):
        WeightedDomain(2, (), LqNorm(2.0, 3))


def test_fractional_dimension():
    assert WeightedDomain(3, (0.5, 2.0)).n_a == 5.5
    assert half_space(2, 1.0).n_a == 3.0


def test_half_space_ball_is_half_the_ball():
    for n in (1, 2, 3, 4):
        full = WeightedDomain(n).ball_measure()
        assert half_space(n, 0.0).ball_measure() == pytest.approx(full / 2, rel=1e-14)


def test_weighted_ball_measure_against_cartesian_quadrature():
    # int_{B cap {t > 0}} t^a over the Euclidean disc in R^2
    a = 1.7
    dom = half_space(2, a)
    val, _ = integrate.dblquad(lambda t, x: t ** a, -1, 1, 0, lambda x: math.sqrt(1 - x * x),
                               epsabs=1e-13, epsrel=1e-13)
    assert dom.ball_measure() == pytest.approx(val, rel=1e-10)


def test_weighted_ball_measure_l4_two_weights():
    dom = WeightedDomain(2, (0.5, 1.5), LqNorm(4.0, 2))

    def inner(x):
        return (1 - x ** 4) ** 0.25

    val, _ = integrate.dblquad(lambda y, x: x ** 0.5 * y ** 1.5, 0, 1, 0, inner,
                               epsabs=1e-13, epsrel=1e-12)
    assert dom.ball_measure() == pytest.approx(val, rel=1e-9)


def test_product_norm_ball_closed_form_matches_recursion():
    # ||(x, t)|| = (|x|_2^3 + |t|^3)^(1/3) on R^2 x R_+, weight t^a
    a = 0.8
    spec = ProductNorm.with_line(LqNorm(2.0, 2), 3.0)
    dom = WeightedDomain(3, (a,), spec)
    # polar in x: 2 pi int_0^1 rho int_0^{(1-rho^3)^(1/3)} t^a dt d rho
    val, _ = integrate.quad(lambda r: 2 * math.pi * r * (1 - r ** 3) ** ((a + 1) / 3) / (a + 1),
                            0, 1, epsabs=1e-14, epsrel=1e-13)
    assert dom.ball_measure() == pytest.approx(val, rel=1e-11)


def test_log_ball_measure_free_function():
    spec = LqNorm(2.0, 3)
    assert log_ball_measure(spec, [0, 0, 0], [False] * 3) == pytest.approx(math.log(4 * math.pi / 3))


@given(st.floats(0.0, 3.0), st.sampled_from([1.5, 2.0, 4.0]), st.sampled_from([1, 2, 3]))
def test_radial_reduction_of_gaussian_moment(a, q, n):
    # int_Sigma exp(-||z||^q) sigma = V Gamma(n_a/q + 1)
    dom = half_space(n, a, LqNorm(q, n))
    val = dom.radial_integral(lambda r: np.exp(-np.asarray(r) ** q))
    assert val == pytest.approx(dom.ball_measure() * math.gamma(dom.n_a / q + 1), rel=1e-10)


def test_radial_integral_vs_cartesian_oracle():
    dom = half_space(2, 1.0, LqNorm(3.0, 2))

    def f(y, x):
        r = norm(dom.norm, np.array([x, y]))
        return y * (1 + r * r) ** -3

    val, _ = integrate.dblquad(f, -np.inf, np.inf, 0, np.inf, epsabs=1e-13, epsrel=1e-10)
    rad = dom.radial_integral(lambda r: (1 + np.asarray(r) ** 2) ** -3)
    assert rad == pytest.approx(val, rel=1e-8)


def test_radial_integral_moment_shift():
    dom = half_space(3, 0.5)
    g = lambda r: np.exp(-np.asarray(r))
    shifted = dom.radial_integral(g, moment_shift=2.0)
    direct = dom.radial_integral(lambda r: np.asarray(r) ** 2 * g(r))
    assert shifted == pytest.approx(direct, rel=1e-12)
    with pytest.raises(DomainError):
        dom.radial_integral(g, moment_shift=-1.0)


@pytest.mark.parametrize("n,a", [(2, 0.0), (2, 1.0), (3, 2.0), (3, 0.5)])
def test_perimeter_surface_quadrature(n, a):
    dom = half_space(n, a)
    assert dom.surface_perimeter_quadrature() == pytest.approx(dom.ball_perimeter(), rel=1e-9)


def test_perimeter_quadrature_limits():
    with pytest.raises(UnsupportedError):
        half_space(2, 1.0, LqNorm(4.0, 2)).surface_perimeter_quadrature()


def test_weight_vanishes_off_cone():
    dom = half_space(2, 1.5)
    w = dom.weight(np.array([[0.3, 2.0], [0.3, -1.0]]))
    assert w[0] == pytest.approx(2.0 ** 1.5) and w[1] == 0.0


def test_parse_domain():
    dom = parse_domain("domain:n=3,m=1,a=2.5,norm=lq:4")
    assert dom == WeightedDomain(3, (2.5,), LqNorm(4.0, 3))
    assert parse_domain("n=3,m=2,a=1").a == (1.0, 1.0)
    with pytest.raises(DomainError):
        parse_domain("n=3,m=2,a=1;2;3")
