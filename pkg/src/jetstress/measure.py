"""Regions, oriented boundary faces, quadrature and force functionals.

Regions carry the standard orientation of the chart.  A boundary face is an
affine map from a reference cell; its tangent frame is ordered so that
``det[N_out, t_1, ..., t_{n-1}] > 0`` for an outward vector ``N_out``, which
makes the boundary integral of ``d omega``'s primitive satisfy Stokes'
theorem with a plus sign.  The convention is checked at import time on the
interval, where it reduces to ``int_a^b f' = f(b) - f(a)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from .jetfield.jets import JetExtensionMap
from .jetfield.maps import SmoothMap
from .multiindex import jet_layout
from .stresscore.fields import Field
from .stresscore.operators import contraction_weights, exterior_jet, induced_nhs, var_stress_from_force_system

__all__ = [
    "QuadratureRule",
    "box_rule",
    "simplex_rule",
    "Region",
    "Box",
    "Simplex",
    "Face",
    "region_from_json",
    "integrate_n_form",
    "integrate_boundary_form",
    "stokes_residual",
    "force_functional",
    "nhs_functional",
    "var_functional",
    "force_functionals",
    "orientation_self_test",
]


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and weights on a reference cell; exact for total degree ``<= degree``."""

    nodes: np.ndarray
    weights: np.ndarray
    degree: int
    cell: str


def _points_for(degree: int) -> int:
    return max(1, (degree + 2) // 2)


@lru_cache(maxsize=None)
def box_rule(dim: int, degree: int) -> QuadratureRule:
    """Tensor Gauss-Legendre rule on ``[0, 1]^dim``."""
    if dim == 0:
        return QuadratureRule(np.zeros((1, 0)), np.ones(1), degree, "box")
    t, w = np.polynomial.legendre.leggauss(_points_for(degree))
    t, w = (t + 1) / 2, w / 2
    grids = np.meshgrid(*([t] * dim), indexing="ij")
    nodes = np.stack([g.reshape(-1) for g in grids], axis=1)
    wg = np.meshgrid(*([w] * dim), indexing="ij")
    weights = np.prod(np.stack([g.reshape(-1) for g in wg], axis=1), axis=1)
    return QuadratureRule(nodes, weights, degree, "box")


@lru_cache(maxsize=None)
def simplex_rule(dim: int, degree: int) -> QuadratureRule:
    """Collapsed-coordinate Gauss-Jacobi rule on the unit simplex ``{s >= 0, sum s <= 1}``."""
    if dim == 0:
        return QuadratureRule(np.zeros((1, 0)), np.ones(1), degree, "simplex")
    npts = _points_for(degree)
    factors = []
    for i in range(dim):
        a = dim - 1 - i
        t, w = roots_jacobi(npts, a, 0)
        factors.append(((t + 1) / 2, w / 2 ** (a + 1)))
    grids = np.meshgrid(*[f[0] for f in factors], indexing="ij")
    xi = np.stack([g.reshape(-1) for g in grids], axis=1)
    wg = np.meshgrid(*[f[1] for f in factors], indexing="ij")
    weights = np.prod(np.stack([g.reshape(-1) for g in wg], axis=1), axis=1)
    nodes = np.empty_like(xi)
    remaining = np.ones(xi.shape[0])
    for i in range(dim):
        nodes[:, i] = remaining * xi[:, i]
        remaining = remaining * (1 - xi[:, i])
    return QuadratureRule(nodes, weights, degree, "simplex")


@dataclass(frozen=True, eq=False)
class Face:
    """Affine face ``x(s) = origin + s @ edges`` over a reference cell, with oriented frame."""

    origin: np.ndarray
    edges: np.ndarray
    cell: str
    sign: int

    @property
    def frame(self) -> np.ndarray:
        """Positively oriented tangent frame (edges with the orientation sign applied)."""
        f = np.array(self.edges, dtype=float)
        if f.shape[0]:
            f[0] *= self.sign
        return f

    def rule(self, degree: int) -> QuadratureRule:
        dim = self.edges.shape[0]
        return box_rule(dim, degree) if self.cell == "box" else simplex_rule(dim, degree)

    def points(self, rule: QuadratureRule) -> np.ndarray:
        return self.origin + rule.nodes @ self.edges


def _oriented(origin, edges, outward, cell) -> Face:
    n = origin.shape[0]
    edges = np.asarray(edges, dtype=float).reshape(n - 1, n)
    det = np.linalg.det(np.vstack([outward, edges])) if n > 1 else float(outward[0])
    if abs(det) < 1e-14:
        raise ValueError("degenerate face")
    return Face(np.asarray(origin, dtype=float), edges, cell, 1 if det > 0 else -1)


class Region:
    n: int
    orientation: int = 1

    def faces(self) -> list[Face]:
        raise NotImplementedError

    def rule(self, degree: int) -> QuadratureRule:
        raise NotImplementedError

    def points(self, rule: QuadratureRule) -> np.ndarray:
        raise NotImplementedError

    @property
    def volume_factor(self) -> float:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Box(Region):
    lo: np.ndarray
    hi: np.ndarray
    orientation: int = 1

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float).reshape(-1)
        hi = np.asarray(self.hi, dtype=float).reshape(-1)
        if lo.shape != hi.shape or np.any(hi <= lo):
            raise ValueError("box needs lo < hi componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def n(self) -> int:
        return self.lo.shape[0]

    @property
    def volume_factor(self) -> float:
        return float(np.prod(self.hi - self.lo))

    def rule(self, degree: int) -> QuadratureRule:
        return box_rule(self.n, degree)

    def points(self, rule: QuadratureRule) -> np.ndarray:
        return self.lo + rule.nodes * (self.hi - self.lo)

    def faces(self) -> list[Face]:
        n = self.n
        ext = self.hi - self.lo
        out = []
        for r in range(n):
            others = [s for s in range(n) if s != r]
            edges = np.zeros((n - 1, n))
            for q, s in enumerate(others):
                edges[q, s] = ext[s]
            for side, at in ((-1.0, self.lo[r]), (1.0, self.hi[r])):
                origin = self.lo.copy()
                origin[r] = at
                normal = np.zeros(n)
                normal[r] = side
                out.append(_oriented(origin, edges, normal, "box"))
        return out

    def split(self, axis: int, at: float) -> tuple[Box, Box]:
        """Two boxes sharing the face ``x[axis] = at`` (0-based axis)."""
        if not self.lo[axis] < at < self.hi[axis]:
            raise ValueError("split position must lie strictly inside the box")
        hi1 = self.hi.copy()
        hi1[axis] = at
        lo2 = self.lo.copy()
        lo2[axis] = at
        return Box(self.lo, hi1, self.orientation), Box(lo2, self.hi, self.orientation)

    def to_json(self) -> dict:
        return {"kind": "box", "lo": self.lo.tolist(), "hi": self.hi.tolist()}


@dataclass(frozen=True, eq=False)
class Simplex(Region):
    vertices: np.ndarray
    orientation: int = 1

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1] + 1:
            raise ValueError("a simplex in R^n needs n + 1 vertices")
        if abs(np.linalg.det(v[1:] - v[0])) < 1e-14:
            raise ValueError("degenerate simplex")
        object.__setattr__(self, "vertices", v)

    @property
    def n(self) -> int:
        return self.vertices.shape[1]

    @property
    def volume_factor(self) -> float:
        return float(abs(np.linalg.det(self.vertices[1:] - self.vertices[0])))

    def rule(self, degree: int) -> QuadratureRule:
        return simplex_rule(self.n, degree)

    def points(self, rule: QuadratureRule) -> np.ndarray:
        v = self.vertices
        return v[0] + rule.nodes @ (v[1:] - v[0])

    def faces(self) -> list[Face]:
        v = self.vertices
        out = []
        for i in range(v.shape[0]):
            rest = np.delete(v, i, axis=0)
            outward = rest.mean(axis=0) - v[i]
            out.append(_oriented(rest[0], rest[1:] - rest[0], outward, "simplex"))
        return out

    def to_json(self) -> dict:
        return {"kind": "simplex", "vertices": self.vertices.tolist()}


def unit_box(n: int) -> Box:
    return Box(np.zeros(n), np.ones(n))


def unit_simplex(n: int) -> Simplex:
    return Simplex(np.vstack([np.zeros(n), np.eye(n)]))


__all__ += ["unit_box", "unit_simplex"]


def region_from_json(data: dict) -> Region:
    kind = data.get("kind")
    if kind == "box":
        return Box(data["lo"], data["hi"])
    if kind == "simplex":
        return Simplex(data["vertices"])
    raise ValueError(f"unknown region kind {kind!r}")


def _evaluate(f, X) -> np.ndarray:
    if isinstance(f, SmoothMap):
        return f.values_batch(X)
    return np.asarray(f(X), dtype=float)


def integrate_n_form(density, region: Region, degree: int) -> float:
    """``int_R density dx``; ``density`` is a scalar SmoothMap or a vectorized callable."""
    rule = region.rule(degree)
    X = region.points(rule)
    vals = _evaluate(density, X).reshape(X.shape[0])
    return float(region.orientation * region.volume_factor * np.sum(rule.weights * vals))


def integrate_boundary_form(c, region: Region, degree: int) -> float:
    """``int_{dR} sum_i c_i d_i -| dx`` with the outward-induced orientation.

    ``c`` maps points ``(Q, n)`` to coefficients ``(Q, n)``.
    """
    total = []
    for face in region.faces():
        rule = face.rule(degree)
        X = face.points(rule)
        coeffs = _evaluate(c, X).reshape(X.shape[0], region.n)
        w = contraction_weights(face.frame) if region.n > 1 else np.array([float(face.sign)])
        total.append(np.sum(rule.weights * (coeffs @ w)))
    return float(region.orientation * np.sum(total))


def _traction_coeffs(tau: Field, lam_values):
    """Vectorized ``c_i = tau^{J;i} lambda_J`` from flat samples."""
    n, m, k = tau.n, tau.m, tau.k
    size = m * jet_layout(n, k - 1).size

    def c(X):
        T = tau.values_batch(X).reshape(X.shape[0], size, n)
        L = lam_values(X).reshape(X.shape[0], size)
        return np.einsum("qpi,qp->qi", T, L)

    return c


def _j1_section(lam_map: SmoothMap, X) -> np.ndarray:
    """Flat ``[lambda, mu]`` samples of ``j^1 lambda``."""
    J = lam_map.jet_batch(X, 1)  # (Q, size, 1 + n)
    return np.concatenate([J[:, :, 0], J[:, :, 1:].reshape(J.shape[0], -1)], axis=1)


def stokes_residual(tau: Field, lam: Field, region: Region, degree: int) -> float:
    """``|int_{dR} tau . lambda - int_R (exterior jet of tau) . j^1 lambda|``."""
    boundary = integrate_boundary_form(_traction_coeffs(tau, lam.values_batch), region, degree)
    d_tau = exterior_jet(tau)

    def density(X):
        return np.sum(d_tau.values_batch(X) * _j1_section(lam.map, X), axis=1)

    return abs(boundary - integrate_n_form(density, region, degree))


def force_functional(b: Field, tau: Field, region: Region, w: SmoothMap, degree: int) -> float:
    """``int_R b . j^{k-1} w + int_{dR} tau . j^{k-1} w``."""
    k = tau.k
    body = integrate_n_form(lambda X: np.sum(b.values_batch(X) * _jets(w, X, k - 1), axis=1), region, degree)
    surf = integrate_boundary_form(_traction_coeffs(tau, lambda X: _jets(w, X, k - 1)), region, degree)
    return body + surf


def nhs_functional(P: Field, region: Region, w: SmoothMap, degree: int) -> float:
    """``int_R P . j^1(j^{k-1} w)``."""
    ext = JetExtensionMap(w, P.k - 1)
    return integrate_n_form(lambda X: np.sum(P.values_batch(X) * _j1_section(ext, X), axis=1), region, degree)


def var_functional(S: Field, region: Region, w: SmoothMap, degree: int) -> float:
    """``int_R S . j^k w``."""
    return integrate_n_form(lambda X: np.sum(S.values_batch(X) * _jets(w, X, S.k), axis=1), region, degree)


def _jets(w: SmoothMap, X, order: int) -> np.ndarray:
    return w.jet_batch(X, order).reshape(X.shape[0], -1)


def force_functionals(b: Field, tau: Field, region: Region, w: SmoothMap, degree: int) -> dict[str, float]:
    """The force on ``region`` computed three ways: boundary plus body, non-holonomic, variational."""
    return {
        "boundary_body": force_functional(b, tau, region, w, degree),
        "nonholonomic": nhs_functional(induced_nhs(b, tau), region, w, degree),
        "variational": var_functional(var_stress_from_force_system(b, tau), region, w, degree),
    }


def orientation_self_test() -> float:
    """Fundamental theorem on an interval: ``int_a^b f' = f(b) - f(a)``."""
    a, b = -0.5, 1.25
    interval = Box([a], [b])
    f = lambda X: X[:, 0] ** 3 - 2 * X[:, 0]  # noqa: E731
    df = lambda X: 3 * X[:, 0] ** 2 - 2  # noqa: E731
    lhs = integrate_n_form(df, interval, 2)
    rhs = integrate_boundary_form(lambda X: f(X)[:, None], interval, 3)
    expect = (b**3 - 2 * b) - (a**3 - 2 * a)
    err = max(abs(lhs - expect), abs(rhs - expect))
    if err > 1e-12:
        raise RuntimeError(f"boundary orientation convention broken (error {err:g})")
    return err


orientation_self_test()
