"""Seeded random polynomial data with small integer coefficients."""
from __future__ import annotations

import numpy as np

from .jetfield.maps import PolyMap, Polynomial
from .multiindex import indices_upto
from .stresscore.fields import Field
from .stresscore.values import flat_size

__all__ = ["random_polynomial", "random_polymap", "random_field", "random_section", "random_points"]


def random_polynomial(rng: np.random.Generator, n: int, degree: int, coef_range: int = 3, density: float = 1.0) -> Polynomial:
    """Polynomial of total degree ``<= degree`` with integer coefficients in ``[-coef_range, coef_range]``."""
    terms = {}
    for I in indices_upto(n, degree):
        c = int(rng.integers(-coef_range, coef_range + 1))
        keep = density >= 1.0 or rng.random() < density
        if keep and c:
            terms[I.counts] = float(c)
    return Polynomial(n, terms)


def random_polymap(rng, n: int, n_out: int, degree: int, coef_range: int = 3, density: float = 1.0) -> PolyMap:
    return PolyMap([random_polynomial(rng, n, degree, coef_range, density) for _ in range(n_out)], n)


def random_field(rng, kind: str, n: int, m: int, k: int, degree: int | None = None, density: float = 1.0) -> Field:
    """Random polynomial field; default degree is ``k + 2``."""
    degree = k + 2 if degree is None else degree
    return Field(kind, n, m, k, random_polymap(rng, n, flat_size(kind, n, m, k), degree, density=density))


def random_section(rng, n: int, m: int, degree: int, density: float = 1.0) -> PolyMap:
    """Random section ``w: R^n -> R^m``."""
    return random_polymap(rng, n, m, degree, density=density)


def random_points(rng, n: int, count: int, lo: float = -1.0, hi: float = 1.0) -> np.ndarray:
    return rng.uniform(lo, hi, size=(count, n))
