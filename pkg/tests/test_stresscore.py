import numpy as np
import pytest

from jetstress.jetfield.jets import JetPoint, include_holonomic
from jetstress.jetfield.maps import PolyMap, Polynomial
from jetstress.multiindex import jet_layout
from jetstress.randomdata import random_field, random_points
from jetstress.stresscore import (
    BodyForce,
    Field,
    NonHolStress,
    TractionStress,
    VariationalStress,
    cauchy_pullback,
    component_keys,
    constitutive_var,
    contraction_weights,
    divergence,
    exterior_jet,
    field_from_json,
    field_to_json,
    holonomic_kernel_element,
    induced_nhs,
    nh_pair,
    p_tau,
    restrict_to_holonomic,
    symmetric_gauge_k2,
    traction_action,
    var_pair,
    var_stress_from_force_system,
)


def restriction_by_definition(P: NonHolStress) -> np.ndarray:
    """S_I = P_I + sum of Pbar^{J;j} over the pairs (J, j) with Jj = I."""
    n, m, k = P.n, P.m, P.k
    lo, hi = jet_layout(n, k - 1), jet_layout(n, k)
    S = np.zeros((m, hi.size))
    for a in range(m):
        for q, J in enumerate(lo.indices):
            S[a, hi.position[J]] += P.P[a, q]
            for j in range(n):
                S[a, hi.position[J.append(j + 1)]] += P.Pbar[a, q, j]
    return S


@pytest.mark.parametrize("n,m,k", [(1, 1, 1), (2, 2, 2), (3, 1, 2), (2, 1, 3), (3, 2, 3)])
def test_restriction_matches_definition_and_duality(rng, n, m, k):
    size = jet_layout(n, k - 1).size
    P = NonHolStress(n, m, k, rng.normal(size=(m, size)), rng.normal(size=(m, size, n)))
    S = restrict_to_holonomic(P)
    assert np.allclose(S.S, restriction_by_definition(P), atol=1e-14)
    u = JetPoint(n, m, k, rng.normal(size=(m, jet_layout(n, k).size)))
    assert nh_pair(P, include_holonomic(u)) == pytest.approx(var_pair(S, u), abs=1e-12)


def test_kernel_element_n2_k2(rng):
    K = holonomic_kernel_element(2, 1, 2, rng.normal(size=(1, 2, 2)))
    assert np.max(np.abs(K.flat)) > 1e-3
    assert np.allclose(restrict_to_holonomic(K).S, 0.0, atol=1e-14)
    # the antisymmetric top part survives
    assert K.Pbar[0, 1, 1] == pytest.approx(-K.Pbar[0, 2, 0])


def test_k1_restriction_is_a_reshape(rng):
    P = NonHolStress(3, 2, 1, rng.normal(size=(2, 1)), rng.normal(size=(2, 1, 3)))
    S = restrict_to_holonomic(P).S
    assert np.array_equal(S[:, 0], P.P[:, 0])
    assert np.array_equal(S[:, 1:], P.Pbar[:, 0, :])


def test_exterior_jet_components(rng):
    n, m, k = 2, 1, 2
    tau = random_field(rng, "traction", n, m, k, 3)
    polys = tau.map.polys
    x = np.array([0.2, -0.4])
    P = exterior_jet(tau).at(x)
    lo = jet_layout(n, k - 1)
    for q in range(lo.size):
        div = sum(polys[q * n + j].derivative(j)(x) for j in range(n))
        assert P.P[0, q] == pytest.approx(div, abs=1e-12)
        for j in range(n):
            assert P.Pbar[0, q, j] == pytest.approx(polys[q * n + j](x), abs=1e-12)


def test_equilibrium_of_induced_stress(rng):
    n, m, k = 2, 2, 3
    b = random_field(rng, "bodyforce", n, m, k)
    tau = random_field(rng, "traction", n, m, k)
    P = induced_nhs(b, tau)
    X = random_points(rng, n, 7)
    assert np.allclose(divergence(P).values_batch(X), -b.values_batch(X), atol=1e-11)
    assert np.allclose(p_tau(P).values_batch(X), tau.values_batch(X))
    assert np.allclose(divergence(exterior_jet(tau)).values_batch(X), 0.0, atol=1e-11)


def test_divergence_of_generic_stress_is_p_minus_div_pbar(rng):
    n, m, k = 2, 1, 2
    P = random_field(rng, "nonholonomic", n, m, k, 3)
    x = np.array([0.3, 0.1])
    size = m * jet_layout(n, k - 1).size
    polys = P.map.polys
    d = divergence(P).at(x).b.reshape(-1)
    for q in range(size):
        div = sum(polys[size + q * n + j].derivative(j)(x) for j in range(n))
        assert d[q] == pytest.approx(div - polys[q](x), abs=1e-12)


def test_symmetric_gauge_reproduces_stress(rng):
    n, m, k = 3, 2, 2
    S = random_field(rng, "variational", n, m, k, 3)
    b, tau = symmetric_gauge_k2(S)
    X = random_points(rng, n, 6)
    assert np.allclose(var_stress_from_force_system(b, tau).values_batch(X), S.values_batch(X), atol=1e-11)
    for x in X[:2]:
        t = tau.at(x)
        for a in (1, 2):
            assert t.block(a, 1).symmetry_defect() < 1e-12
        bb = b.at(x).b
        assert np.allclose(bb[:, 1:], 0.0)


def test_euclidean_k1_cauchy_formula(rng):
    # k = 1: the traction on a face is sigma^i n_i
    n, m = 3, 3
    sigma = rng.normal(size=(m, 1, n))
    tau = TractionStress(n, m, 1, sigma)
    frame = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])  # face x1 = const, outward +e1
    t = cauchy_pullback(tau, frame, np.zeros(n))
    assert np.allclose(t.t[:, 0], sigma[:, 0, 0])
    v = rng.normal(size=(m, 1))
    assert cauchy_pullback(tau, frame, np.zeros(n), v) == pytest.approx(float(sigma[:, 0, 0] @ v[:, 0]))


def test_contraction_weights_rotated_face():
    frame = np.array([[-1.0, 1.0]]) / np.sqrt(2)  # det[N, t] > 0 for outward N = (1, 1)/sqrt 2
    w = contraction_weights(frame)
    assert np.allclose(w, np.array([1.0, 1.0]) / np.sqrt(2))
    with pytest.raises(ValueError):
        contraction_weights(np.array([[0.0, 0.0]]))


def test_traction_action_is_linear(rng):
    tau = TractionStress(2, 1, 2, rng.normal(size=(1, 3, 2)))
    v1, v2 = rng.normal(size=(2, 1, 3))
    assert np.allclose(traction_action(tau, v1 + 2 * v2), traction_action(tau, v1) + 2 * traction_action(tau, v2))


def test_field_json_roundtrip_and_validation(rng):
    data = {
        "n": 2,
        "m": 1,
        "k": 2,
        "kind": "traction",
        "components": [{"alpha": 1, "index": [1, 0], "slot": 2, "expr": {"op": "mul", "args": [{"var": 1}, 3]}}],
    }
    f = field_from_json(data)
    t = f.at([2.0, 5.0])
    keys = [d["key"] for d in component_keys("traction", 2, 1, 2)]
    assert t.flat[keys.index("tau[1;1|2]")] == pytest.approx(6.0)
    assert np.count_nonzero(t.flat) == 1
    back = field_from_json(field_to_json(f))
    assert np.allclose(back.values_batch([[0.5, 0.5]]), f.values_batch([[0.5, 0.5]]))
    with pytest.raises(ValueError):
        field_from_json(dict(data, components=[{"alpha": 1, "index": [2, 0], "slot": 1, "expr": 1}]))
    with pytest.raises(ValueError):
        Field("traction", 2, 1, 2, PolyMap.zeros(2, 5))


def test_value_types_are_frozen(rng):
    S = VariationalStress(2, 1, 1, rng.normal(size=(1, 3)))
    with pytest.raises(ValueError):
        S.S[0, 0] = 1.0
    b = BodyForce(2, 1, 2, np.ones((1, 3)))
    assert np.allclose((-b).b, -1.0)


def test_constitutive_quadratic_is_identity(rng):
    n, m, k = 2, 1, 2
    size = m * jet_layout(n, k).size
    phi = PolyMap([Polynomial(size, {tuple(2 * int(r == i) for r in range(size)): 0.5 for i in range(size)})], size)
    u = JetPoint(n, m, k, rng.normal(size=(m, 6)))
    assert np.allclose(constitutive_var(phi, u).S, u.values)
