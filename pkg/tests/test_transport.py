import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sharpineq import extremals as E
from sharpineq import transport as T
from sharpineq.domain import half_space
from sharpineq.errors import NormalizationError, ParameterError, UnsupportedError
from sharpineq.norms import LqNorm
from sharpineq.suites import random_profile

DOM = half_space(2, 1.0)


def density(prof, s):
    return T.power_of(prof, s)


@pytest.fixture(scope="module")
def gaussians():
    f = E.logsob_extremal(DOM, 2.0, 1.0)
    g = E.logsob_extremal(DOM, 2.0, 1.0).dilate(2.0)
    return density(f, 2.0), density(g, 2.0)


def test_identity_map():
    F = density(E.sobolev_extremal(DOM, 2.0), DOM.n_a * 2 / (DOM.n_a - 2))
    tm = T.radial_brenier(DOM, F, F)
    r = np.array([0.05, 0.3, 1.0, 4.0, 30.0])
    np.testing.assert_allclose(tm.psi(r), r, rtol=1e-9)


def test_dilation_map(gaussians):
    F, G = gaussians
    tm = T.radial_brenier(DOM, F, G)
    r = np.array([0.1, 0.5, 1.0, 2.0, 4.0])
    np.testing.assert_allclose(tm.psi(r), r / 2.0, rtol=1e-8)
    np.testing.assert_allclose(tm.dpsi(r), 0.5, rtol=1e-6)


def test_pushforward_moments(gaussians):
    F, G = gaussians
    tm = T.radial_brenier(DOM, F, G)
    for b in (lambda r: r ** 2, lambda r: np.exp(-r), lambda r: 1 / (1 + r)):
        left, right = tm.pushforward_moment(b)
        assert left == pytest.approx(right, rel=1e-8)
    assert tm.mass_balance_residual() < 1e-8


def test_heavy_tailed_target_quantiles():
    ps = DOM.n_a * 2 / (DOM.n_a - 2)
    F = density(E.logsob_extremal(DOM, 2.0, 1.0), 2.0)
    G = density(E.sobolev_extremal(DOM, 2.0), ps)
    tm = T.radial_brenier(DOM, F, G)
    levels, rf, rg, psi = tm.quantiles(40)
    np.testing.assert_allclose(psi, rg, rtol=1e-7)
    assert np.all(np.diff(psi) > 0)


def test_composition():
    rng = np.random.default_rng(4)
    A, B, C = (random_profile(DOM, rng, 1.0, 0.0, compact=True) for _ in range(3))
    ab, bc, ac = T.radial_brenier(DOM, A, B), T.radial_brenier(DOM, B, C), T.radial_brenier(DOM, A, C)
    r = np.linspace(0.1, 0.9 * A.support_radius, 15)
    np.testing.assert_allclose(bc.psi(ab.psi(r)), ac.psi(r), rtol=1e-6)


def test_monotone_and_mass_checks():
    rng = np.random.default_rng(8)
    F = random_profile(DOM, rng, 1.0, 0.0, compact=True)
    G = random_profile(DOM, rng, 1.0, 0.0, compact=True)
    tm = T.radial_brenier(DOM, F, G)
    r = np.linspace(0.0, F.support_radius, 400)
    assert np.all(np.diff(tm.psi(r)) >= 0)
    with pytest.raises(NormalizationError):
        T.radial_brenier(DOM, F, G.scaled(1.5))


def test_non_euclidean_norm_unsupported():
    dom = half_space(2, 1.0, LqNorm(4.0, 2))
    F = density(E.logsob_extremal(dom, 2.0), 2.0)
    with pytest.raises(UnsupportedError):
        T.radial_brenier(dom, F, F)


@pytest.mark.parametrize("gamma", [1 - 1 / 3, 0.9, 1.2, 2.0])
def test_transport_inequality_on_random_pair(gamma):
    rng = np.random.default_rng(11)
    F = random_profile(DOM, rng, 1.0, 0.0, compact=True)
    G = random_profile(DOM, rng, 1.0, 0.0, compact=True)
    out = T.transport_inequality_check(DOM, gamma, F, G)
    assert out["gap"] >= -1e-9
    assert abs(out["boundary_term"]) < 1e-6


def test_transport_inequality_equality_for_identity():
    rng = np.random.default_rng(3)
    F = random_profile(DOM, rng, 1.0, 0.0, compact=True)
    out = T.transport_inequality_check(DOM, 0.8, F, F)
    assert abs(out["gap"]) < 1e-7


def test_transport_inequality_gamma_zero_in_dimension_one():
    dom = half_space(1, 0.0)
    F = E.indicator(dom, 1.0, 0.5)
    G = E.indicator(dom, 2.0, 0.25)
    out = T.transport_inequality_check(dom, 0.0, F, G)
    assert out["gap"] >= -1e-12
    assert abs(out["boundary_term"]) < 1e-8


def test_gamma_range():
    with pytest.raises(ParameterError):
        T.transport_inequality_check(DOM, 1.0, None, None)
    with pytest.raises(ParameterError):
        T.transport_inequality_check(DOM, 0.5, None, None)


@settings(max_examples=60)
@given(st.floats(0.05, 20), st.lists(st.floats(0.0, 20), min_size=1, max_size=4),
       st.sampled_from([0.0, 0.5, 2.0]), st.floats(-0.3, 3.0))
def test_amgm_pointwise(A, M, a, shift):
    n_a = len(M) + a
    gamma = 1 - 1 / n_a + shift if abs(1 - 1 / n_a + shift - 1) > 1e-3 else 1.5
    if gamma < 1 - 1 / n_a:
        gamma = 1 - 1 / n_a
    lhs, rhs = T.amgm_slack(A, M, gamma, a)
    e = 1 - gamma
    # divide by 1/|e| to compare in a scale-free way
    assert (rhs - lhs) * abs(e) >= -1e-9 * (1 + abs(lhs * e) + abs(rhs * e))


def test_amgm_equality_at_identity():
    lhs, rhs = T.amgm_slack(1.0, [1.0, 1.0], 0.7, 1.0)
    assert lhs == pytest.approx(rhs, rel=1e-14)
    assert T.amgm_rearranged(1.0, [1.0, 1.0], 1.5, 1.0) == pytest.approx(1.0, rel=1e-14)
    assert T.amgm_rearranged(2.0, [0.5, 3.0], 1.5, 1.0) > 1.0
