"""Jet points of ``J^k W`` and of ``J^1(J^{k-1} W)``.

Components are held as flat arrays:

* :class:`JetPoint` ``values[alpha, p]`` is ``u^alpha_{,I}`` for ``I`` at
  position ``p`` of ``jet_layout(n, k)`` (derivative convention).
* :class:`NonHolJetPoint` ``lam[alpha, p]`` is ``lambda^alpha_J`` and
  ``mu[alpha, p, j]`` is ``lambda^alpha_{J;j}`` for ``J`` at position ``p``
  of ``jet_layout(n, k - 1)`` and 0-based slot ``j``.

A section of ``J^{k-1} W`` is a :class:`SmoothMap` with ``m * N_{k-1}``
outputs ordered ``(alpha, J)``, alpha-major.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..multiindex import MultiIndex, jet_layout
from ..symalg import Convention, SymArray, AlmostSymArray
from .maps import SmoothMap

__all__ = [
    "JetPoint",
    "NonHolJetPoint",
    "JetExtensionMap",
    "prolong",
    "prolong_batch",
    "prolong_section_of_jets",
    "include_holonomic",
    "holonomic_defect",
    "is_holonomic",
]


def _frozen(a, shape):
    a = np.array(a, dtype=float).reshape(shape)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class JetPoint:
    n: int
    m: int
    k: int
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values, (self.m, jet_layout(self.n, self.k).size)))

    @classmethod
    def zeros(cls, n: int, m: int, k: int) -> JetPoint:
        return cls(n, m, k, np.zeros((m, jet_layout(n, k).size)))

    def component(self, alpha: int, I) -> float:
        """``u^alpha_{,I}`` with 1-based ``alpha`` and ``I`` a MultiIndex or 1-based sequence."""
        I = I if isinstance(I, MultiIndex) else MultiIndex.from_sequence(I, self.n)
        return float(self.values[alpha - 1, jet_layout(self.n, self.k).position[I]])

    def block(self, alpha: int, degree: int) -> SymArray:
        sl = jet_layout(self.n, self.k).block(degree)
        return SymArray(self.n, degree, self.values[alpha - 1, sl], Convention.DERIVATIVE)

    def truncate(self, k: int) -> JetPoint:
        return JetPoint(self.n, self.m, k, self.values[:, : jet_layout(self.n, k).size])

    @property
    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)


@dataclass(frozen=True, eq=False)
class NonHolJetPoint:
    n: int
    m: int
    k: int
    lam: np.ndarray
    mu: np.ndarray

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("non-holonomic jets need k >= 1")
        size = jet_layout(self.n, self.k - 1).size
        object.__setattr__(self, "lam", _frozen(self.lam, (self.m, size)))
        object.__setattr__(self, "mu", _frozen(self.mu, (self.m, size, self.n)))

    @classmethod
    def zeros(cls, n: int, m: int, k: int) -> NonHolJetPoint:
        size = jet_layout(n, k - 1).size
        return cls(n, m, k, np.zeros((m, size)), np.zeros((m, size, n)))

    @classmethod
    def from_flat(cls, n: int, m: int, k: int, flat) -> NonHolJetPoint:
        size = jet_layout(n, k - 1).size
        flat = np.asarray(flat, dtype=float).reshape(-1)
        return cls(n, m, k, flat[: m * size], flat[m * size :])

    @property
    def flat(self) -> np.ndarray:
        return np.concatenate([self.lam.reshape(-1), self.mu.reshape(-1)])

    def mu_block(self, alpha: int, degree: int) -> AlmostSymArray:
        """``lambda^alpha_{J;j}`` for ``|J| = degree`` as array components."""
        sl = jet_layout(self.n, self.k - 1).block(degree)
        return AlmostSymArray(self.n, degree + 1, self.mu[alpha - 1, sl], Convention.DERIVATIVE)


class JetExtensionMap(SmoothMap):
    """Pointwise ``x -> j^r w(x)`` as a section of ``J^r W``."""

    def __init__(self, w: SmoothMap, order: int):
        self.w = w
        self.order = order
        self.m = w.n_out
        self.n_in = w.n_in
        self.n_out = self.m * jet_layout(self.n_in, order).size

    @staticmethod
    @lru_cache(maxsize=None)
    def _shift_table(n: int, r: int, d: int) -> np.ndarray:
        big = jet_layout(n, r + d)
        heads = jet_layout(n, r).indices
        tails = jet_layout(n, d).indices
        return np.array([[big.position[J + I] for I in tails] for J in heads], dtype=int)

    def jet_batch(self, X, order: int) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        pj = self.w.jet_batch(X, order + self.order)  # (P, m, big)
        table = self._shift_table(self.n_in, self.order, order)  # (N_r, N_d)
        out = pj[:, :, table]  # (P, m, N_r, N_d)
        return out.reshape(X.shape[0], self.n_out, table.shape[1])

    def jet(self, x, order: int) -> np.ndarray:
        return self.jet_batch(np.asarray(x, dtype=float).reshape(1, -1), order)[0]


def prolong(w: SmoothMap, x, k: int) -> JetPoint:
    """``j^k w(x)``: exact for polynomial sections."""
    x = np.asarray(x, dtype=float).reshape(-1)
    return JetPoint(w.n_in, w.n_out, k, w.jet(x, k))


def prolong_batch(w: SmoothMap, X, k: int) -> np.ndarray:
    """Jet components at many points, shape ``(P, m, N_k)``."""
    return w.jet_batch(X, k)


def prolong_section_of_jets(lam: SmoothMap, x, m: int, k: int) -> NonHolJetPoint:
    """``j^1 lambda(x)`` for a section ``lambda`` of ``J^{k-1} W``."""
    n = lam.n_in
    size = jet_layout(n, k - 1).size
    if lam.n_out != m * size:
        raise ValueError(f"section has {lam.n_out} outputs, expected m*N = {m * size}")
    jet = lam.jet(np.asarray(x, dtype=float).reshape(-1), 1).reshape(m, size, n + 1)
    return NonHolJetPoint(n, m, k, jet[:, :, 0], jet[:, :, 1:])


def include_holonomic(u: JetPoint) -> NonHolJetPoint:
    """``j^k w(x) -> j^1(j^{k-1} w)(x)``."""
    if u.k < 1:
        raise ValueError("inclusion needs k >= 1")
    size = jet_layout(u.n, u.k - 1).size
    app = jet_layout(u.n, u.k).append[:size]  # (size, n), all valid
    return NonHolJetPoint(u.n, u.m, u.k, u.values[:, :size], u.values[:, app])


def holonomic_defect(p: NonHolJetPoint) -> float:
    """Largest violation of the holonomy conditions.

    Below the top degree ``mu_{J;j}`` must equal ``lambda_{Jj}``; at the top
    degree all ``(J, j)`` reordering to the same index must agree.
    """
    n, k = p.n, p.k
    lower = jet_layout(n, k - 1)
    defect = 0.0
    if k >= 2:
        inner = lower.block(k - 2).stop
        app = lower.append[:inner]
        defect = float(np.max(np.abs(p.mu[:, :inner, :] - p.lam[:, app]), initial=0.0))
    top = jet_layout(n, k)
    top_pos = top.append[lower.block(k - 1)]  # (heads, n) positions of Jj in the order-k layout
    mu_top = p.mu[:, lower.block(k - 1), :]
    for pos in np.unique(top_pos):
        vals = mu_top[:, top_pos == pos]
        defect = max(defect, float(np.max(vals.max(axis=1) - vals.min(axis=1), initial=0.0)))
    return defect


def is_holonomic(p: NonHolJetPoint, tol: float = 1e-12) -> bool:
    return holonomic_defect(p) <= tol
