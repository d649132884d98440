"""Operators among stresses, forces and jets.

Pointwise operators take value objects.  Field operators take
:class:`Field` objects and return fields whose maps are first-order
constant-coefficient differential expressions of their inputs, so that
their jets are exact whenever the inputs are.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from ..jetfield.jets import JetPoint, NonHolJetPoint
from ..jetfield.maps import LinearDiffMap, SmoothMap, StackMap, linear_diff
from ..multiindex import jet_layout
from ..symalg import collapse_matrix, spread_matrix
from .fields import Field
from .values import (
    HyperTraction,
    NonHolStress,
    TractionStress,
    VariationalStress,
)

__all__ = [
    "var_pair",
    "traction_action",
    "contraction_weights",
    "form_on_frame",
    "hyper_traction",
    "cauchy_pullback",
    "nh_pair",
    "p_tau",
    "exterior_jet",
    "divergence",
    "induced_nhs",
    "restrict_to_holonomic",
    "restriction_matrix",
    "reduced_exterior_jet",
    "var_stress_from_force_system",
    "holonomic_kernel_element",
    "symmetric_gauge_k2",
    "DivergenceSlotError",
]


class DivergenceSlotError(RuntimeError):
    """The first-order slot of a divergence did not vanish."""


def _same(a, b):
    if (a.n, a.m, a.k) != (b.n, b.m, b.k):
        raise ValueError(f"shape mismatch: (n, m, k) = {(a.n, a.m, a.k)} vs {(b.n, b.m, b.k)}")


# pairings


def var_pair(S: VariationalStress, u: JetPoint) -> float:
    """Coefficient of ``dx`` in ``S . j^k w``."""
    _same(S, u)
    return float(np.sum(S.S * u.values))


def _lower_jet(v, n, m, k) -> np.ndarray:
    size = jet_layout(n, k - 1).size
    arr = np.asarray(getattr(v, "values", v), dtype=float)
    if arr.shape[0] != m or arr.shape[1] < size:
        raise ValueError(f"need (k-1)-jet components of shape ({m}, >= {size}), got {arr.shape}")
    return arr[:, :size]


def traction_action(tau: TractionStress, v) -> np.ndarray:
    """Coefficients ``c_i`` of the ``(n-1)``-form ``tau . v`` on ``d_i -| dx``.

    ``v`` is a JetPoint (order ``>= k-1``) or an array ``v[alpha, J]``.
    """
    v = _lower_jet(v, tau.n, tau.m, tau.k)
    return np.einsum("apj,ap->j", tau.tau, v)


def contraction_weights(frame) -> np.ndarray:
    """``w_i = (d_i -| dx)(t_1, ..., t_{n-1}) = det[e_i, t_1, ..., t_{n-1}]``."""
    frame = np.atleast_2d(np.asarray(frame, dtype=float))
    n = frame.shape[1]
    if frame.shape[0] != n - 1:
        raise ValueError(f"need {n - 1} tangent vectors in R^{n}")
    if n == 1:
        return np.ones(1)
    w = np.empty(n)
    for i in range(n):
        M = np.vstack([np.eye(n)[i], frame])
        w[i] = np.linalg.det(M)
    scale = np.prod(np.linalg.norm(frame, axis=1))
    if np.linalg.norm(w) <= 1e-12 * max(scale, 1e-300):
        raise ValueError("degenerate tangent frame")
    return w


def form_on_frame(c, frame) -> float:
    """Evaluate ``sum_i c_i d_i -| dx`` on the tangent frame."""
    return float(np.dot(np.asarray(c, dtype=float), contraction_weights(frame)))


def hyper_traction(tau: TractionStress, z, frame) -> HyperTraction:
    """Restriction of ``tau`` to a boundary with positively oriented tangent frame."""
    w = contraction_weights(frame)
    return HyperTraction(tau.n, tau.m, tau.k, z, np.einsum("apj,j->ap", tau.tau, w))


def cauchy_pullback(tau_field, face, z, v=None):
    """Hyper-traction at ``z`` on ``face`` (an object with a ``frame`` or a raw frame).

    Returns the :class:`HyperTraction`, or its action on ``v`` when given.
    """
    tau = tau_field.at(z) if isinstance(tau_field, Field) else tau_field
    frame = getattr(face, "frame", face)
    t = hyper_traction(tau, z, frame)
    return t if v is None else t.act(v)


def nh_pair(P: NonHolStress, p: NonHolJetPoint) -> float:
    _same(P, p)
    return float(np.sum(P.P * p.lam) + np.sum(P.Pbar * p.mu))


# pointwise algebra


def p_tau(P):
    """Traction stress determined by a non-holonomic stress (its ``Pbar`` part)."""
    if isinstance(P, Field):
        return Field("traction", P.n, P.m, P.k, linear_diff(P.map, _select_bar(P.n, P.m, P.k)))
    return TractionStress(P.n, P.m, P.k, P.Pbar)


@lru_cache(maxsize=None)
def restriction_matrix(n: int, m: int, k: int) -> np.ndarray:
    """Matrix of the holonomic restriction on flat ``[P, Pbar]`` components."""
    lo = jet_layout(n, k - 1)
    hi = jet_layout(n, k)
    size = lo.size
    M = np.zeros((m * hi.size, m * size * (n + 1)))
    for a in range(m):
        rows = a * hi.size
        # degree-J part copied
        M[rows : rows + size, a * size : (a + 1) * size] = np.eye(size)
        for l in range(k):
            C = collapse_matrix(n, l + 1)  # (sym_dim(n, l+1), sym_dim(n, l) * n)
            src = lo.block(l)
            dst = hi.block(l + 1)
            col0 = m * size + (a * size + src.start) * n
            M[rows + dst.start : rows + dst.stop, col0 : col0 + C.shape[1]] += C
    M.setflags(write=False)
    return M


def restrict_to_holonomic(P):
    """Variational stress ``P o (holonomic inclusion)``.

    Top degree: collapse of the top ``Pbar`` block; middle degrees: ``P`` plus
    the collapse of ``Pbar`` one degree down; degree zero: ``P``.
    """
    R = restriction_matrix(P.n, P.m, P.k)
    if isinstance(P, Field):
        if P.kind != "nonholonomic":
            raise TypeError("restriction needs a non-holonomic stress field")
        return Field("variational", P.n, P.m, P.k, linear_diff(P.map, R))
    return VariationalStress(P.n, P.m, P.k, (R @ P.flat).reshape(P.m, -1))


def holonomic_kernel_element(n: int, m: int, k: int, top, lower=None) -> NonHolStress:
    """A non-holonomic stress annihilated by the holonomic restriction.

    ``top`` gives ``Pbar`` for ``|J| = k - 1`` (shape ``(m, sym_dim(n, k-1), n)``);
    its part in the image of the spread operator is removed.  ``lower`` gives
    the remaining ``Pbar`` blocks (default zero).  ``P`` is then chosen to
    cancel the collapsed ``Pbar`` one degree down, and ``P_0 = 0``.
    """
    if k < 1:
        raise ValueError("need k >= 1")
    lo = jet_layout(n, k - 1)
    size = lo.size
    Pbar = np.zeros((m, size, n))
    if lower is not None:
        Pbar[:, : lo.block(k - 1).start, :] = np.asarray(lower, dtype=float).reshape(m, -1, n)
    top = np.asarray(top, dtype=float).reshape(m, -1, n)
    C = collapse_matrix(n, k)
    Sp = spread_matrix(n, k)
    for a in range(m):
        t = top[a].reshape(-1)
        Pbar[a, lo.block(k - 1)] = (t - Sp @ (C @ t)).reshape(-1, n)
    P = np.zeros((m, size))
    for l in range(k - 1):
        C = collapse_matrix(n, l + 1)
        for a in range(m):
            P[a, lo.block(l + 1)] = -C @ Pbar[a, lo.block(l)].reshape(-1)
    return NonHolStress(n, m, k, P, Pbar)


# field operators


def _select_bar(n, m, k) -> np.ndarray:
    size = m * jet_layout(n, k - 1).size
    M = np.zeros((size * n, size * (n + 1)))
    M[:, size:] = np.eye(size * n)
    return M


def _div_rows(n, m, k) -> np.ndarray:
    """``C1`` block taking ``tau^{J;j}`` to ``sum_j d_j tau^{J;j}``."""
    size = m * jet_layout(n, k - 1).size
    C1 = np.zeros((size, size * n, n))
    for q in range(size):
        for j in range(n):
            C1[q, q * n + j, j] = 1.0
    return C1


class _Probe(SmoothMap):
    """Stand-in parent used to read off operator coefficients; never evaluated."""

    def __init__(self, n: int, size: int):
        self.n_in = n
        self.n_out = size

    def evaluate_series(self, inputs):
        raise TypeError("probe maps carry no values")


def _expect(field: Field, kind: str):
    if not isinstance(field, Field) or field.kind != kind:
        raise TypeError(f"expected a {kind} field")


def exterior_jet(tau: Field) -> Field:
    """``P^J = d_j tau^{J;j}``, ``Pbar^{J;j} = tau^{J;j}``."""
    _expect(tau, "traction")
    n, m, k = tau.n, tau.m, tau.k
    size = m * jet_layout(n, k - 1).size
    C0 = np.zeros((size * (n + 1), size * n))
    C0[size:, :] = np.eye(size * n)
    C1 = np.zeros((size * (n + 1), size * n, n))
    C1[:size] = _div_rows(n, m, k)
    return Field("nonholonomic", n, m, k, linear_diff(tau.map, C0, C1))


def induced_nhs(b: Field, tau: Field) -> Field:
    """``P^J = d_j tau^{J;j} + b^J``, ``Pbar^{J;j} = tau^{J;j}``."""
    _expect(b, "bodyforce")
    _expect(tau, "traction")
    _same(b, tau)
    n, m, k = tau.n, tau.m, tau.k
    size = m * jet_layout(n, k - 1).size
    C0 = np.zeros((size * (n + 1), size * (n + 1)))
    C0[:size, :size] = np.eye(size)
    C0[size:, size:] = np.eye(size * n)
    C1 = np.zeros((size * (n + 1), size * (n + 1), n))
    C1[:size, size:] = _div_rows(n, m, k)
    return Field("nonholonomic", n, m, k, LinearDiffMap(StackMap([b.map, tau.map]), C0, C1))


def divergence(P: Field, tol: float = 0.0) -> Field:
    """``div P = (exterior jet of p_tau(P)) - P`` as a body-force field.

    The ``Pbar`` slot of the difference is checked to vanish identically
    (its operator coefficients must be zero up to ``tol``).
    """
    _expect(P, "nonholonomic")
    n, m, k = P.n, P.m, P.k
    size = m * jet_layout(n, k - 1).size
    probe = Field("nonholonomic", n, m, k, _Probe(n, size * (n + 1)))
    d_tau = exterior_jet(p_tau(probe)).map
    if not (isinstance(d_tau, LinearDiffMap) and d_tau.parent is probe.map):
        raise TypeError("exterior jet of p_tau(P) did not reduce to a first-order operator on P")
    C0 = d_tau.C0 - np.eye(size * (n + 1))
    C1 = d_tau.C1
    residual = max(np.max(np.abs(C0[size:]), initial=0.0), np.max(np.abs(C1[size:]), initial=0.0))
    if residual > tol:
        raise DivergenceSlotError(f"first-order slot of the divergence is {residual:g}, expected 0")
    return Field("bodyforce", n, m, k, linear_diff(P.map, C0[:size], C1[:size]))


def reduced_exterior_jet(tau: Field) -> Field:
    return restrict_to_holonomic(exterior_jet(tau))


def var_stress_from_force_system(b: Field, tau: Field) -> Field:
    return restrict_to_holonomic(induced_nhs(b, tau))


def symmetric_gauge_k2(S: Field) -> tuple[Field, Field]:
    """For ``k = 2``: a force system ``(b, tau)`` with symmetric ``tau^{ij}`` and ``b^i = 0``.

    ``tau^{i;j}`` spreads the top block of ``S``; ``tau^{;i} = S^i - d_j tau^{i;j}``;
    ``b_0 = S_0 - d_j tau^{;j}``.  The top block of ``S`` is symmetric by
    construction, so this applies to every variational stress of order 2.
    """
    _expect(S, "variational")
    n, m, k = S.n, S.m, S.k
    if k != 2:
        raise ValueError("the symmetric gauge is defined for k = 2")
    hi = jet_layout(n, 2)
    lo = jet_layout(n, 1)
    ns = m * hi.size
    Sp = spread_matrix(n, 2)  # (n * n, sym_dim(n, 2))
    ntau = m * lo.size * n

    # tau^{i;j} from S_2; tau^{;i} = S^i - d_j tau^{i;j}
    C0 = np.zeros((ntau, ns))
    C1 = np.zeros((ntau, ns, n))
    for a in range(m):
        base = a * lo.size * n
        top_rows = slice(base + n, base + n + n * n)
        C0[top_rows, a * hi.size + hi.block(2).start : a * hi.size + hi.block(2).stop] = Sp
        for i in range(n):
            C0[base + i, a * hi.size + 1 + i] = 1.0
            for j in range(n):
                # d_j tau^{i;j} = d_j (Sp @ S_2)[i * n + j]
                C1[base + i, a * hi.size + hi.block(2).start : a * hi.size + hi.block(2).stop, j] -= Sp[i * n + j]
    tau_map = LinearDiffMap(S.map, C0, C1)
    # b_0 = S_0 - d_j tau^{;j}; b^i = 0
    nb = m * lo.size
    D0 = np.zeros((nb, ns + ntau))
    D1 = np.zeros((nb, ns + ntau, n))
    for a in range(m):
        D0[a * lo.size, a * hi.size] = 1.0
        for j in range(n):
            D1[a * lo.size, ns + a * lo.size * n + j, j] = -1.0
    b_map = LinearDiffMap(StackMap([S.map, tau_map]), D0, D1)
    return Field("bodyforce", n, m, k, b_map), Field("traction", n, m, k, tau_map)
