import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra import numpy as hnp

from sharpineq.errors import DimensionMismatchError, DomainError, NonDifferentiableError
from sharpineq.norms import (LqNorm, ProductNorm, conjugate, dual_norm, dual_spec,
                             format_norm, norm, norm_gradient, parse_norm, unit_ball_volume)

Q_VALUES = [1.0, 1.5, 2.0, 3.0, 4.0, math.inf]


def test_conjugate_pairs():
    assert conjugate(2.0) == 2.0
    assert conjugate(1.0) == math.inf and conjugate(math.inf) == 1.0
    assert conjugate(3.0) == pytest.approx(1.5)
    with pytest.raises(DomainError):
        conjugate(0.5)


@pytest.mark.parametrize("q", Q_VALUES)
def test_dual_norm_is_sup_over_unit_ball(q, rng):
    spec = LqNorm(q, 3)
    v = rng.normal(size=3)
    # brute force sup of v.y over sampled boundary points
    y = rng.normal(size=(200000, 3))
    y /= np.asarray(norm(spec, y))[:, None]
    assert np.max(y @ v) <= dual_norm(spec, v) * (1 + 1e-12)
    assert np.max(y @ v) == pytest.approx(dual_norm(spec, v), rel=2e-2)


@given(hnp.arrays(float, 4, elements=st.floats(-10, 10)).filter(lambda v: np.all(np.abs(v) > 1e-3)),
       st.sampled_from([1.5, 2.0, 3.0, 4.0]))
def test_norm_gradient_defining_properties(v, q):
    spec = LqNorm(q, 4)
    g = norm_gradient(spec, v)
    assert dual_norm(spec, g) == pytest.approx(1.0, rel=1e-12)
    assert float(g @ v) == pytest.approx(norm(spec, v), rel=1e-12)


def test_norm_gradient_product(rng):
    spec = ProductNorm.with_line(LqNorm(3.0, 2), 2.5)
    v = rng.normal(size=3)
    g = norm_gradient(spec, v)
    assert dual_norm(spec, g) == pytest.approx(1.0, rel=1e-12)
    assert float(g @ v) == pytest.approx(norm(spec, v), rel=1e-12)


def test_norm_gradient_nonsmooth_points():
    with pytest.raises(NonDifferentiableError):
        norm_gradient(LqNorm(1.0, 2), np.array([1.0, 0.0]))
    with pytest.raises(NonDifferentiableError):
        norm_gradient(LqNorm(math.inf, 2), np.array([1.0, -1.0]))
    with pytest.raises(DomainError):
        norm_gradient(LqNorm(2.0, 2), np.zeros(2))


def test_dimension_checks():
    with pytest.raises(DimensionMismatchError):
        norm(LqNorm(2.0, 3), np.ones(2))


@pytest.mark.parametrize("q,n,expected", [
    (2.0, 2, math.pi),
    (2.0, 3, 4 * math.pi / 3),
    (1.0, 3, 8 / 6),
    (math.inf, 4, 16.0),
    (4.0, 1, 2.0),
])
def test_unit_ball_volume_closed_forms(q, n, expected):
    assert unit_ball_volume(LqNorm(q, n)) == pytest.approx(expected, rel=1e-13)


def test_lq_ball_volume_general_formula():
    # (2 Gamma(1 + 1/q))^n / Gamma(1 + n/q)
    for q in (1.5, 3.0, 7.0):
        for n in (1, 2, 5):
            expected = (2 * math.gamma(1 + 1 / q)) ** n / math.gamma(1 + n / q)
            assert unit_ball_volume(LqNorm(q, n)) == pytest.approx(expected, rel=1e-12)


def test_product_norm_volume_monte_carlo(rng):
    spec = ProductNorm.with_line(LqNorm(2.0, 2), 3.0)
    x = rng.uniform(-1, 1, size=(400000, 3))
    frac = np.mean(np.asarray(norm(spec, x)) <= 1.0)
    assert unit_ball_volume(spec) == pytest.approx(8 * frac, rel=1e-2)


@pytest.mark.parametrize("spec", [
    LqNorm(2.0, 3), LqNorm(math.inf, 2), LqNorm(1.5, 4),
    ProductNorm.with_line(LqNorm(4.0, 2), 2.0),
    ProductNorm.power(LqNorm(2.0, 1), 3, 3.0),
    ProductNorm((LqNorm(2.0, 2), LqNorm(1.0, 1)), 2.5),
])
def test_format_parse_roundtrip(spec):
    assert parse_norm(format_norm(spec)) == spec


def test_parse_fills_dimension_and_rejects_junk():
    assert parse_norm("lq:4", dim=3) == LqNorm(4.0, 3)
    with pytest.raises(DomainError):
        parse_norm("lq:4")
    with pytest.raises(DomainError):
        parse_norm("banana")


def test_dual_of_dual():
    spec = ProductNorm.with_line(LqNorm(3.0, 2), 4.0)
    back = dual_spec(dual_spec(spec))
    assert back.blocks[0].q == pytest.approx(3.0, rel=1e-14)
    assert back.q == pytest.approx(4.0, rel=1e-14)
