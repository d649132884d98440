"""Coordinate changes and the covariant transformation of jets and stresses.

A chart change is a map ``x -> x'`` with an explicit inverse; a bundle
transition ``A(x)`` acts on fibre components, ``w' = A(x) w``.  Jets are
transformed by building the Taylor polynomial of a representative about
``x``, substituting the inverse chart expanded about ``x' = forward(x)``
and multiplying by the expansion of ``A``; partials are then read off at
``x'``.  Every step is series arithmetic, so transforms are exact for
polynomial charts.

Stress pushforwards map components given at ``x'`` back to ``x`` so that
the associated differential form is chart independent, with
``Jac = det(dx'/dx)`` at ``x``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .jetfield.jets import JetPoint, NonHolJetPoint
from .jetfield.maps import ConstantMap, PolyMap, Polynomial, SmoothMap, map_from_json
from .jetfield.series import TruncatedSeries, _mul_table, variables
from .multiindex import MultiIndex, jet_layout
from .stresscore.values import BodyForce, NonHolStress, TractionStress, VariationalStress

__all__ = [
    "ChartMap",
    "BundleTransition",
    "JetTransition",
    "LocalTransition",
    "ChartError",
    "transform_jet",
    "assemble_G",
    "assemble_H",
    "transform_nonholonomic",
    "pushforward_var_stress",
    "pushforward_traction_stress",
    "pushforward_body_force",
    "pushforward_nh_stress",
    "pushforward_vectors",
    "example_chart",
    "affine_chart",
    "identity_chart",
]


class ChartError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ChartMap:
    """``forward: x -> x'`` with ``inverse: x' -> x``; ``box`` bounds the ``x`` domain."""

    forward: SmoothMap
    inverse: SmoothMap
    box: np.ndarray = None
    name: str = ""

    def __post_init__(self):
        n = self.forward.n_in
        if (self.forward.n_out, self.inverse.n_in, self.inverse.n_out) != (n, n, n):
            raise ChartError("forward and inverse must both map R^n -> R^n")
        box = np.array([[-np.inf, np.inf]] * n) if self.box is None else np.asarray(self.box, dtype=float)
        if box.shape != (n, 2) or np.any(box[:, 0] > box[:, 1]):
            raise ChartError("box must be n pairs [lo, hi]")
        box.setflags(write=False)
        object.__setattr__(self, "box", box)

    @property
    def n(self) -> int:
        return self.forward.n_in

    def contains(self, x, slack: float = 1e-12) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.box[:, 0] - slack) and np.all(x <= self.box[:, 1] + slack))

    def _require(self, x):
        if not self.contains(x):
            raise ChartError(f"point {np.asarray(x).tolist()} lies outside the chart box")

    def jacobian(self, x) -> np.ndarray:
        """``dx'^a/dx^r`` at ``x``."""
        return self.forward.jet(np.asarray(x, dtype=float), 1)[:, 1:]

    def jacobian_det(self, x) -> float:
        return float(np.linalg.det(self.jacobian(x)))

    def inverse_jacobian(self, xp) -> np.ndarray:
        """``dx^i/dx'^{i'}`` at ``x'``."""
        return self.inverse.jet(np.asarray(xp, dtype=float), 1)[:, 1:]

    def reversed(self, box=None) -> ChartMap:
        return ChartMap(self.inverse, self.forward, box, self.name + "^-1" if self.name else "")

    def validate(self, points=None, order: int = 2, tol: float = 1e-9) -> float:
        """Check ``forward o inverse = id`` to ``order`` and a nonzero Jacobian.

        Returns the largest residual; raises :class:`ChartError` beyond ``tol``.
        """
        if points is None:
            points = _sample_box(self.box)
        worst = 0.0
        for x in np.atleast_2d(points):
            xp = self.forward(x)
            worst = max(worst, float(np.max(np.abs(self.inverse(xp) - x))))
            comp = self.forward.evaluate_series(self.inverse.taylor(xp, order))
            ident = variables(xp, order)
            worst = max(worst, max(float(np.max(np.abs(a.coeffs - b.coeffs))) for a, b in zip(comp, ident)))
            if abs(self.jacobian_det(x)) < 1e-12:
                raise ChartError(f"singular chart at {x.tolist()}")
        if worst > tol:
            raise ChartError(f"forward o inverse differs from the identity by {worst:g}")
        return worst

    def to_json(self) -> dict:
        out = {"forward": self.forward.to_json(), "inverse": self.inverse.to_json()}
        if np.all(np.isfinite(self.box)):
            out["box"] = self.box.tolist()
        return out

    @classmethod
    def from_json(cls, data) -> ChartMap:
        fwd = data["forward"]
        n = len(fwd)
        return cls(map_from_json(fwd, n), map_from_json(data["inverse"], n), data.get("box"), data.get("name", ""))


def _sample_box(box) -> np.ndarray:
    lo, hi = box[:, 0], box[:, 1]
    lo = np.where(np.isfinite(lo), lo, -1.0)
    hi = np.where(np.isfinite(hi), hi, 1.0)
    fr = np.array([0.5, 0.2, 0.8, 0.35, 0.65])
    return lo + np.outer(fr, hi - lo)


@dataclass(frozen=True, eq=False)
class BundleTransition:
    """``A(x)`` as a map ``R^n -> R^{m*m}`` (row-major ``A[alpha', alpha]``)."""

    A: SmoothMap
    m: int

    def __post_init__(self):
        if self.A.n_out != self.m * self.m:
            raise ChartError("A must have m*m outputs")

    @classmethod
    def identity(cls, n: int, m: int) -> BundleTransition:
        return cls(ConstantMap(np.eye(m).reshape(-1), n), m)

    def matrix(self, x) -> np.ndarray:
        return self.A(np.asarray(x, dtype=float)).reshape(self.m, self.m)

    def series(self, inputs) -> list[list[TruncatedSeries]]:
        flat = self.A.evaluate_series(inputs)
        return [flat[a * self.m : (a + 1) * self.m] for a in range(self.m)]

    def to_json(self):
        return self.A.to_json()

    @classmethod
    def from_json(cls, data, n: int) -> BundleTransition:
        rows = data
        m = len(rows)
        trees = [t for row in rows for t in row] if isinstance(rows[0], list) else rows
        m = int(round(np.sqrt(len(trees))))
        return cls(map_from_json(trees, n), m)


def _mul_matrix(a: TruncatedSeries) -> np.ndarray:
    """Matrix ``M`` with ``(a * b).coeffs = M @ b.coeffs``."""
    ia, ib, ic = _mul_table(a.n, a.order)
    size = a.coeffs.shape[0]
    M = np.zeros((size, size))
    np.add.at(M, (ic, ib), a.coeffs[ia])
    return M


@dataclass(frozen=True, eq=False)
class JetTransition:
    """``u' = G u`` at ``x``; ``jac_det = det(dx'/dx)`` at ``x``, ``jac_inv = dx/dx'`` at ``x'``."""

    n: int
    m: int
    k: int
    x: np.ndarray
    xp: np.ndarray
    G: np.ndarray
    jac_det: float
    jac_inv: np.ndarray


class LocalTransition:
    """Series data of a chart change about one point, reused by all transforms there."""

    def __init__(self, chart: ChartMap, A: BundleTransition, x, k: int):
        x = np.asarray(x, dtype=float).reshape(-1)
        chart._require(x)
        self.chart, self.A, self.k = chart, A, k
        self.n, self.m = chart.n, A.m
        self.x = x
        self.xp = chart.forward(x)
        Xs = chart.inverse.evaluate_series(variables(self.xp, k))
        drift = max(abs(s.value - x0) for s, x0 in zip(Xs, x))
        if drift > 1e-9 * (1 + np.max(np.abs(x))):
            raise ChartError(f"inverse(forward(x)) misses x by {drift:g}")
        delta = []
        for s, x0 in zip(Xs, x):
            d = s - x0
            d.coeffs[0] = 0.0
            delta.append(d)
        layout = jet_layout(self.n, k)
        # P_I = delta^I / I!
        P = [TruncatedSeries.constant(self.n, k, 1.0)]
        for pos in range(1, layout.size):
            I = layout.indices[pos]
            last = I.offsets()[-1]
            P.append(P[layout.position[I.remove(last + 1)]] * delta[last] * (1.0 / I.counts[last]))
        self.Pmat = np.array([p.coeffs for p in P])  # (N_I, N_coeff)
        self.Amul = [[_mul_matrix(a) for a in row] for row in A.series(Xs)]
        self.layout = layout
        self.jac_det = chart.jacobian_det(x)
        self.jac_inv = chart.inverse_jacobian(self.xp)

    def transform(self, U, order: int | None = None) -> np.ndarray:
        """Transform jet components ``U[alpha, I, c]`` (any number of columns ``c``)."""
        order = self.k if order is None else order
        size = jet_layout(self.n, order).size
        U = np.asarray(U, dtype=float)
        squeeze = U.ndim == 2
        U = U.reshape(self.m, size, -1)
        Pm = self.Pmat[:size]
        W = np.einsum("ic,aij->acj", Pm, U)  # series coefficients (order k) of each representative
        out = np.zeros_like(W)
        for ap in range(self.m):
            for a in range(self.m):
                out[ap] += self.Amul[ap][a] @ W[a]
        res = out[:, :size, :] * jet_layout(self.n, order).factorials[None, :, None]
        return res[:, :, 0] if squeeze else res

    def G(self, order: int | None = None) -> np.ndarray:
        order = self.k if order is None else order
        size = jet_layout(self.n, order).size
        eye = np.eye(self.m * size).reshape(self.m, size, self.m * size)
        return self.transform(eye, order).reshape(self.m * size, self.m * size)

    def jet_transition(self, order: int | None = None) -> JetTransition:
        order = self.k if order is None else order
        return JetTransition(self.n, self.m, order, self.x, self.xp, self.G(order), self.jac_det, self.jac_inv)


def transform_jet(chart: ChartMap, A: BundleTransition, x, u: JetPoint) -> JetPoint:
    """Components at ``x' = forward(x)`` of the jet ``u`` given at ``x``."""
    loc = LocalTransition(chart, A, x, u.k)
    return JetPoint(u.n, u.m, u.k, loc.transform(u.values))


def assemble_G(chart: ChartMap, A: BundleTransition, x, k: int) -> JetTransition:
    """Jet transition matrix built from the transforms of unit jets."""
    return LocalTransition(chart, A, x, k).jet_transition()


def _two_point_series(chart: ChartMap, A: BundleTransition, x, k: int):
    """Expansions in ``(delta', eps')`` of ``X = inv(x'+delta')`` and ``Y = inv(x'+delta'+eps')``."""
    n = chart.n
    xp = chart.forward(x)
    s = variables(np.zeros(2 * n), k)
    base = [s[r] + xp[r] for r in range(n)]
    shifted = [base[r] + s[n + r] for r in range(n)]
    X = chart.inverse.evaluate_series(base)
    Y = chart.inverse.evaluate_series(shifted)
    return xp, X, Y


def assemble_H(chart: ChartMap, A: BundleTransition, x, k: int) -> np.ndarray:
    """Matrix of the induced transformation of ``J^1(J^{k-1} W)`` at ``x``.

    Flat components are ``[lambda (m, N_{k-1}), mu (m, N_{k-1}, n)]``.  A point
    ``(lambda, mu)`` is represented near ``x`` by the family of ``(k-1)``-jets
    ``F_X(eps) = sum_J (lambda_J + mu_{J;j} (X - x)_j) eps^J / J!`` at base
    points ``X``; transforming each member to primed coordinates and taking the
    first-order variation in the base point gives ``(lambda', mu')``.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    chart._require(x)
    n, m = chart.n, A.m
    xp, X, Y = _two_point_series(chart, A, x, k)
    drift = max(abs(s.value - x0) for s, x0 in zip(X, x))
    if drift > 1e-9 * (1 + np.max(np.abs(x))):
        raise ChartError(f"inverse(forward(x)) misses x by {drift:g}")
    delta = []
    for s, x0 in zip(X, x):
        d = s - x0
        d.coeffs[0] = 0.0
        delta.append(d)
    eps = [y - xx for y, xx in zip(Y, X)]
    lo = jet_layout(n, k - 1)
    Q = [TruncatedSeries.constant(2 * n, k, 1.0)]
    for pos in range(1, lo.size):
        J = lo.indices[pos]
        last = J.offsets()[-1]
        Q.append(Q[lo.position[J.remove(last + 1)]] * eps[last] * (1.0 / J.counts[last]))
    basis = [q.coeffs for q in Q] + [(q * delta[j]).coeffs for q in Q for j in range(n)]
    B = np.array(basis).T  # (coeffs, N*(1+n)), columns: lambda_J then mu_{J;j}
    Amul = [[_mul_matrix(a) for a in row] for row in A.series(Y)]
    big = jet_layout(2 * n, k)
    lam_rows = np.array([big.position[MultiIndex((0,) * n + J.counts)] for J in lo.indices])
    mu_rows = np.array(
        [[big.position[MultiIndex(tuple(int(r == j) for r in range(n)) + J.counts)] for j in range(n)] for J in lo.indices]
    )
    fact = lo.factorials
    size = lo.size
    ncols = size * (1 + n)
    H = np.zeros((m * size * (1 + n), m * size * (1 + n)))
    for a in range(m):
        # source columns of fibre index a
        src = np.concatenate([a * size + np.arange(size), m * size + (a * size + np.arange(size))[:, None] * n + np.arange(n)[None, :]], axis=None)
        for ap in range(m):
            out = Amul[ap][a] @ B  # (coeffs, ncols)
            lam_new = out[lam_rows] * fact[:, None]
            mu_new = out[mu_rows.reshape(-1)].reshape(size, n, ncols) * fact[:, None, None]
            H[ap * size : (ap + 1) * size, src] = lam_new
            dst_mu = m * size + (ap * size + np.arange(size))[:, None] * n + np.arange(n)[None, :]
            H[dst_mu.reshape(-1)[:, None], src[None, :]] = mu_new.reshape(size * n, ncols)
    return H


def transform_nonholonomic(chart: ChartMap, A: BundleTransition, x, p: NonHolJetPoint) -> NonHolJetPoint:
    H = assemble_H(chart, A, x, p.k)
    return NonHolJetPoint.from_flat(p.n, p.m, p.k, H @ p.flat)


def pushforward_var_stress(chart: ChartMap, A: BundleTransition, S_prime: VariationalStress, x) -> VariationalStress:
    """``S = Jac G^T S'``: components at ``x`` of a stress given at ``x' = forward(x)``."""
    loc = LocalTransition(chart, A, x, S_prime.k)
    S = loc.jac_det * loc.G().T @ S_prime.flat
    return VariationalStress(S_prime.n, S_prime.m, S_prime.k, S.reshape(S_prime.m, -1))


def pushforward_body_force(chart: ChartMap, A: BundleTransition, b_prime: BodyForce, x) -> BodyForce:
    """``b = Jac G_{k-1}^T b'``."""
    loc = LocalTransition(chart, A, x, b_prime.k - 1)
    b = loc.jac_det * loc.G().T @ b_prime.flat
    return BodyForce(b_prime.n, b_prime.m, b_prime.k, b.reshape(b_prime.m, -1))


def pushforward_traction_stress(chart: ChartMap, A: BundleTransition, tau_prime: TractionStress, x) -> TractionStress:
    """``tau^{J;i} = Jac tau'^{J';i'} G_{J'J} dx^i/dx'^{i'}``."""
    loc = LocalTransition(chart, A, x, tau_prime.k - 1)
    tp = tau_prime.tau.reshape(-1, tau_prime.n)  # rows (alpha', J')
    tau = loc.jac_det * loc.G().T @ tp @ loc.jac_inv.T
    return TractionStress(tau_prime.n, tau_prime.m, tau_prime.k, tau.reshape(tau_prime.tau.shape))


def pushforward_nh_stress(chart: ChartMap, A: BundleTransition, P_prime: NonHolStress, x) -> NonHolStress:
    """``P = Jac H^T P'``."""
    H = assemble_H(chart, A, x, P_prime.k)
    jac = chart.jacobian_det(x)
    return NonHolStress.from_flat(P_prime.n, P_prime.m, P_prime.k, jac * H.T @ P_prime.flat)


def pushforward_vectors(chart: ChartMap, x, vectors) -> np.ndarray:
    """Tangent vectors at ``x`` expressed in primed coordinates (rows)."""
    return np.atleast_2d(vectors) @ chart.jacobian(x).T


def identity_chart(n: int, box=None) -> ChartMap:
    ident = PolyMap([Polynomial.variable(n, r) for r in range(n)], n)
    return ChartMap(ident, ident, box, "identity")


def affine_chart(L, c=None, box=None) -> ChartMap:
    """``x' = L x + c``."""
    L = np.asarray(L, dtype=float)
    n = L.shape[0]
    c = np.zeros(n) if c is None else np.asarray(c, dtype=float)
    Li = np.linalg.inv(L)
    var = [Polynomial.variable(n, r) for r in range(n)]

    def affine(M, t):
        return PolyMap([sum((M[i, r] * var[r] for r in range(n)), Polynomial.constant(n, t[i])) for i in range(n)], n)

    return ChartMap(affine(L, c), affine(Li, -Li @ c), box, "affine")


def example_chart(n: int = 2, box=None) -> ChartMap:
    """``x'^1 = x^1 + (x^2)^2``, other coordinates unchanged; inverse ``x^1 = x'^1 - (x'^2)^2``."""
    if n < 2:
        raise ChartError("the example chart needs n >= 2")
    var = [Polynomial.variable(n, r) for r in range(n)]
    fwd = [var[0] + var[1] * var[1]] + var[1:]
    inv = [var[0] - var[1] * var[1]] + var[1:]
    return ChartMap(PolyMap(fwd, n), PolyMap(inv, n), box, "example")
