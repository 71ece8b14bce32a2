import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special as sp

from sharpineq.errors import DomainError
from sharpineq.special import lbeta, lgamma


@given(st.floats(min_value=1e-6, max_value=1e5))
def test_lgamma_matches_stdlib(x):
    assert lgamma(x) == pytest.approx(math.lgamma(x), rel=1e-13, abs=1e-13)


def test_lgamma_vectorised_against_scipy():
    x = np.geomspace(1e-3, 1e4, 200)
    np.testing.assert_allclose(lgamma(x), sp.gammaln(x), rtol=1e-13, atol=1e-13)


def test_lgamma_large_argument_stays_finite():
    # Gamma(1e6) overflows a double but its log is ordinary
    assert lgamma(1e6) == pytest.approx(math.lgamma(1e6), rel=1e-14)


def test_lgamma_integers():
    for k in range(1, 30):
        assert lgamma(k) == pytest.approx(math.log(math.factorial(k - 1)), abs=1e-12)


@pytest.mark.parametrize("x", [0.0, -1.0, -2.5, math.nan])
def test_lgamma_rejects_nonpositive(x):
    with pytest.raises(DomainError):
        lgamma(x)


@given(st.floats(min_value=1e-3, max_value=500), st.floats(min_value=1e-3, max_value=500))
def test_lbeta_symmetry_and_scipy(x, y):
    assert lbeta(x, y) == pytest.approx(lbeta(y, x), abs=1e-12)
    assert lbeta(x, y) == pytest.approx(sp.betaln(x, y), rel=1e-11, abs=1e-11)
