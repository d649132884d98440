from math import factorial

import numpy as np
import pytest

from jetstress.measure import (
    Box,
    Simplex,
    box_rule,
    force_functionals,
    integrate_boundary_form,
    integrate_n_form,
    region_from_json,
    simplex_rule,
    stokes_residual,
    unit_box,
    unit_simplex,
)
from jetstress.randomdata import random_field, random_section


@pytest.mark.parametrize("a,b", [(0, 0), (2, 1), (3, 3), (5, 0)])
def test_simplex_monomials(a, b):
    exact = factorial(a) * factorial(b) / factorial(a + b + 2)
    got = integrate_n_form(lambda X: X[:, 0] ** a * X[:, 1] ** b, unit_simplex(2), a + b)
    assert got == pytest.approx(exact, rel=1e-13)


def test_tetrahedron_monomial():
    exact = factorial(2) * factorial(1) * factorial(1) / factorial(2 + 1 + 1 + 3)
    got = integrate_n_form(lambda X: X[:, 0] ** 2 * X[:, 1] * X[:, 2], unit_simplex(3), 4)
    assert got == pytest.approx(exact, rel=1e-13)


def test_box_rule_exactness():
    rule = box_rule(2, 7)
    vals = rule.nodes[:, 0] ** 7 * rule.nodes[:, 1] ** 6
    assert np.sum(rule.weights * vals) == pytest.approx(1 / 8 * 1 / 7)
    assert np.sum(simplex_rule(3, 2).weights) == pytest.approx(1 / 6)
    box = Box([-1.0, 0.0], [2.0, 0.5])
    assert integrate_n_form(lambda X: np.ones(len(X)), box, 0) == pytest.approx(1.5)


@pytest.mark.parametrize("region", [unit_box(2), unit_simplex(2), Box([0, 0, 0], [1, 2, 0.5]), unit_simplex(3)])
def test_divergence_theorem(region):
    # c_i d_i -| dx with c = (x2^2 x1, x1 x2, ...) has d c = div c dx
    def c(X):
        out = np.zeros_like(X)
        out[:, 0] = X[:, 1] ** 2 * X[:, 0]
        out[:, 1] = X[:, 0] * X[:, 1]
        return out

    def div(X):
        return X[:, 1] ** 2 + X[:, 0]

    assert integrate_boundary_form(c, region, 4) == pytest.approx(integrate_n_form(div, region, 3), abs=1e-13)


def test_orientation_reversal_and_split():
    f = lambda X: X[:, 0] ** 2 + X[:, 1]  # noqa: E731
    box = Box([0.0, 0.0], [1.0, 1.0])
    flipped = Box([0.0, 0.0], [1.0, 1.0], orientation=-1)
    assert integrate_n_form(f, flipped, 2) == pytest.approx(-integrate_n_form(f, box, 2))
    left, right = box.split(0, 0.3)
    total = integrate_n_form(f, left, 2) + integrate_n_form(f, right, 2)
    assert total == pytest.approx(integrate_n_form(f, box, 2))


def test_simplex_measure_ignores_vertex_order():
    s = Simplex([[0, 0], [1, 0], [0, 1]])
    t = Simplex([[0, 0], [0, 1], [1, 0]])
    flipped = Simplex([[0, 0], [1, 0], [0, 1]], orientation=-1)
    one = lambda X: np.ones(len(X))  # noqa: E731
    assert integrate_n_form(one, s, 0) == pytest.approx(0.5)
    assert integrate_n_form(one, t, 0) == pytest.approx(0.5)
    assert integrate_n_form(one, flipped, 0) == pytest.approx(-0.5)


def test_region_json():
    r = region_from_json({"kind": "box", "lo": [0, 0], "hi": [1, 2]})
    assert integrate_n_form(lambda X: np.ones(len(X)), r, 0) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        region_from_json({"kind": "sphere"})


@pytest.mark.parametrize("region", [unit_box(2), unit_simplex(3)])
def test_force_functionals_agree(rng, region):
    n, m, k = region.n, 2, 2
    b = random_field(rng, "bodyforce", n, m, k)
    tau = random_field(rng, "traction", n, m, k)
    lam = random_field(rng, "jetsection", n, m, k)
    w = random_section(rng, n, m, k + 2)
    assert abs(stokes_residual(tau, lam, region, 2 * (k + 2) + 1)) < 1e-10
    f = force_functionals(b, tau, region, w, 2 * (k + 2) + 1)
    assert f["boundary_body"] == pytest.approx(f["nonholonomic"], rel=1e-12, abs=1e-10)
    assert f["nonholonomic"] == pytest.approx(f["variational"], rel=1e-12, abs=1e-10)
