import math

import numpy as np
import pytest

from jetstress.jetfield.maps import (
    ComposedMap,
    ConstantMap,
    ExprMap,
    FuncMap,
    LinearDiffMap,
    NotPolynomial,
    PolyMap,
    Polynomial,
    StackMap,
    eval_expr,
    linear_diff,
    map_from_json,
)
from jetstress.randomdata import random_polymap

SIN_TREE = {"op": "add", "args": [{"op": "sin", "args": [{"var": 1}]}, {"op": "mul", "args": [{"var": 1}, {"var": 2}, 2.0]}]}


def test_polynomial_ring_and_derivative():
    x = Polynomial.variable(2, 0)
    y = Polynomial.variable(2, 1)
    p = (x + 1) * (y - 2) + x**2
    assert p([1.0, 3.0]) == pytest.approx(3.0)
    assert p.derivative(0)([1.0, 3.0]) == pytest.approx(3.0)
    with pytest.raises(NotPolynomial):
        x ** 0.5


def test_eval_expr_numbers():
    assert eval_expr(SIN_TREE, [0.5, 2.0]) == pytest.approx(math.sin(0.5) + 2.0)
    tree = {"op": "div", "args": [{"op": "pow", "args": [{"var": 1}, 3]}, {"op": "exp", "args": [{"var": 2}]}]}
    assert eval_expr(tree, [2.0, 0.0]) == pytest.approx(8.0)


def test_map_from_json_chooses_polymap():
    poly = map_from_json([{"op": "mul", "args": [{"var": 1}, {"var": 1}]}], 1)
    assert isinstance(poly, PolyMap)
    expr = map_from_json([SIN_TREE], 2)
    assert isinstance(expr, ExprMap)
    with pytest.raises((KeyError, ValueError, TypeError)):
        map_from_json([{"op": "tan", "args": [1]}], 1)


def test_expr_and_func_agree(rng):
    f = map_from_json([SIN_TREE], 2)
    g = FuncMap(lambda s: [s[0].sin() + s[0] * s[1] * 2.0], 2, 1)
    for x in rng.uniform(-1, 1, size=(5, 2)):
        assert np.allclose(f.jet(x, 3), g.jet(x, 3), atol=1e-13)


def test_polymap_jets_match_series_path(rng):
    P = random_polymap(rng, 3, 2, 4)
    generic = FuncMap(lambda s: P.evaluate_series(s), 3, 2)
    X = rng.uniform(-1, 1, size=(6, 3))
    assert np.allclose(P.jet_batch(X, 3), np.stack([generic.jet(x, 3) for x in X]), atol=1e-11)


def test_polymap_json_roundtrip(rng):
    P = random_polymap(rng, 2, 3, 3)
    Q = map_from_json(P.to_json(), 2)
    X = rng.uniform(-1, 1, size=(4, 2))
    assert np.allclose(P.jet_batch(X, 2), Q.jet_batch(X, 2))


def test_composition_chain_rule():
    inner = map_from_json([{"op": "mul", "args": [{"var": 1}, {"var": 2}]}], 2)
    outer = map_from_json([{"op": "exp", "args": [{"var": 1}]}], 1)
    h = ComposedMap(outer, inner)
    x = np.array([0.3, 0.5])
    j = h.jet(x, 1)[0]
    e = math.exp(0.15)
    assert np.allclose(j, [e, 0.5 * e, 0.3 * e])


def test_stack_and_constant(rng):
    a = random_polymap(rng, 2, 1, 2)
    c = ConstantMap([4.0, 5.0], 2)
    s = StackMap([a, c])
    x = np.array([0.1, 0.2])
    jet = s.jet(x, 2)
    assert np.allclose(jet[0], a.jet(x, 2)[0])
    assert np.allclose(jet[1:, 0], [4.0, 5.0])
    assert np.allclose(jet[1:, 1:], 0.0)


def test_linear_diff_and_merge(rng):
    a = random_polymap(rng, 2, 2, 3)
    C1 = np.zeros((1, 2, 2))
    C1[0, 0, 0] = 1.0
    C1[0, 1, 1] = 1.0  # divergence of (a1, a2)
    div = LinearDiffMap(a, None, C1)
    x = np.array([0.4, -0.3])
    d0 = a.derivative(0).jet(x, 1)
    d1 = a.derivative(1).jet(x, 1)
    assert np.allclose(div.jet(x, 1)[0], d0[0] + d1[1])
    # a zeroth-order map of a first-order one merges into one first-order map
    twice = linear_diff(div, np.array([[2.0]]))
    assert isinstance(twice, LinearDiffMap) and twice.parent is a
    assert np.allclose(twice.jet(x, 1)[0], 2 * (d0[0] + d1[1]))
