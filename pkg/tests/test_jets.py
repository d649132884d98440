import numpy as np
import pytest

from jetstress.jetfield.jets import (
    JetExtensionMap,
    JetPoint,
    NonHolJetPoint,
    holonomic_defect,
    include_holonomic,
    is_holonomic,
    prolong,
    prolong_section_of_jets,
)
from jetstress.jetfield.maps import map_from_json
from jetstress.multiindex import jet_layout
from jetstress.randomdata import random_section


def test_prolong_square():
    w = map_from_json([{"op": "mul", "args": [{"var": 1}, {"var": 1}]}], 2)
    u = prolong(w, [1.0, 0.0], 2)
    assert np.allclose(u.values[0], [1, 2, 0, 2, 0, 0])
    assert u.component(1, [1, 1]) == 2.0
    assert u.truncate(1).values.shape == (1, 3)


def test_prolong_of_sine_section():
    w = map_from_json([{"op": "sin", "args": [{"var": 1}]}], 1)
    u = prolong(w, [0.0], 3)
    assert np.allclose(u.values[0], [0, 1, 0, -1])


@pytest.mark.parametrize("n,m,k", [(1, 1, 1), (2, 2, 2), (3, 1, 3), (2, 1, 4)])
def test_extension_of_a_section_is_holonomic(rng, n, m, k):
    w = random_section(rng, n, m, k + 2)
    lam = JetExtensionMap(w, k - 1)
    x = rng.uniform(-1, 1, n)
    p = prolong_section_of_jets(lam, x, m, k)
    assert is_holonomic(p)
    u = prolong(w, x, k)
    assert np.allclose(include_holonomic(u).flat, p.flat)


def test_generic_nonholonomic_point_is_not_holonomic(rng):
    n, m, k = 2, 1, 2
    size = jet_layout(n, k - 1).size
    p = NonHolJetPoint(n, m, k, rng.normal(size=(m, size)), rng.normal(size=(m, size, n)))
    assert holonomic_defect(p) > 1e-3
    assert not is_holonomic(p)


def test_top_order_mixed_entries_must_agree():
    # k = 1: mu_{;1} and mu_{;2} are free; k = 2 top block: mu_{1;2} must equal mu_{2;1}
    n, m, k = 2, 1, 2
    u = JetPoint(n, m, k, np.arange(6.0).reshape(1, 6))
    p = include_holonomic(u)
    mu = np.array(p.mu)
    mu[0, 1, 1] += 0.5
    q = NonHolJetPoint(n, m, k, p.lam, mu)
    assert holonomic_defect(q) == pytest.approx(0.5)


def test_flat_roundtrip(rng):
    n, m, k = 3, 2, 2
    size = jet_layout(n, k - 1).size
    p = NonHolJetPoint(n, m, k, rng.normal(size=(m, size)), rng.normal(size=(m, size, n)))
    q = NonHolJetPoint.from_flat(n, m, k, p.flat)
    assert np.array_equal(q.flat, p.flat)
    assert p.mu_block(1, 1).values.shape == (n, n)


def test_section_size_checked(rng):
    w = random_section(rng, 2, 2, 3)
    with pytest.raises(ValueError):
        prolong_section_of_jets(w, [0.0, 0.0], 2, 2)
