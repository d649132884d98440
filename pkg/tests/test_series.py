import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jetstress.jetfield.series import TruncatedSeries, series_compose, variables
from jetstress.multiindex import MultiIndex


def test_product_truncates():
    x = TruncatedSeries.variable(1, 3, 0)
    p = (1 + x) * (1 - x)
    assert np.allclose(p.coeffs, [1, 0, -1, 0])


def test_sin_partials_at_zero():
    x = TruncatedSeries.variable(1, 3, 0)
    d = x.sin().partials()
    assert np.allclose(d, [0, 1, 0, -1])


def test_exp_log_inverse():
    x, y = variables([0.3, -0.2], 4)
    f = (x * y + 2.0).log().exp()
    g = x * y + 2.0
    assert np.allclose(f.coeffs, g.coeffs, atol=1e-13)


def test_reciprocal_and_power():
    x = TruncatedSeries.variable(1, 5, 0, 0.5)
    r = x.reciprocal()
    # d^j/dx^j (1/x) = (-1)^j j! / x^(j+1)
    expected = [(-1) ** j * math.factorial(j) / 0.5 ** (j + 1) for j in range(6)]
    assert np.allclose(r.partials(), expected)
    s = x.sqrt() * x.sqrt()
    assert np.allclose(s.coeffs, x.coeffs, atol=1e-13)
    assert np.allclose((x**3).coeffs, (x * x * x).coeffs)


def test_mixed_partial_of_product():
    x, y = variables([1.0, 2.0], 2)
    f = x * x * y
    assert f.coeff(MultiIndex.from_sequence([1, 2], 2)) == pytest.approx(2.0)
    assert f.partials()[0] == pytest.approx(2.0)


def test_compose_with_center():
    u = TruncatedSeries.variable(1, 2, 0)
    x = TruncatedSeries.variable(1, 2, 0)
    out = series_compose(u * u, [1 + x], center=[0.0])
    assert np.allclose(out.coeffs, [1, 2, 1])


def test_compose_chain_rule():
    # sin(x^2) at x = 0.7: compose sin expansion at 0.49 with x^2
    x = TruncatedSeries.variable(1, 3, 0, 0.7)
    inner = x * x
    outer = TruncatedSeries.variable(1, 3, 0, inner.value).sin()
    comp = series_compose(outer, [inner])
    assert np.allclose(comp.coeffs, (x * x).sin().coeffs, atol=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1), st.integers(0, 4))
def test_ring_laws(a, b, order):
    x, y = variables([a, b], order)
    lhs = (x + y) * (x - y)
    rhs = x * x - y * y
    assert np.allclose(lhs.coeffs, rhs.coeffs, atol=1e-12)


def test_partials_against_finite_differences():
    f = lambda x, y: math.exp(x) * math.cos(y) + x * y**3
    x, y = variables([0.2, 0.4], 2)
    s = x.exp() * y.cos() + x * y**3
    h = 1e-5
    dx = (f(0.2 + h, 0.4) - f(0.2 - h, 0.4)) / (2 * h)
    k = 1e-3
    dxy = (f(0.2 + k, 0.4 + k) - f(0.2 + k, 0.4 - k) - f(0.2 - k, 0.4 + k) + f(0.2 - k, 0.4 - k)) / (4 * k * k)
    exact = -math.exp(0.2) * math.sin(0.4) + 3 * 0.4**2
    p = s.partials()
    assert p[1] == pytest.approx(dx, rel=1e-8)
    assert p[4] == pytest.approx(exact, abs=1e-14)
    assert p[4] == pytest.approx(dxy, abs=1e-6)
