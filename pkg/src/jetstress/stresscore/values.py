"""Stress and force values at a single base point.

All components use the dual convention, so each pairing is a plain sum
over canonical multi-indices.  Arrays are flat per fibre index ``alpha``:

* :class:`VariationalStress` ``S[alpha, p]`` for ``I`` at position ``p`` of
  ``jet_layout(n, k)``.
* :class:`TractionStress` ``tau[alpha, p, i]`` for ``(J; i)`` with ``J`` at
  position ``p`` of ``jet_layout(n, k - 1)``.
* :class:`NonHolStress` ``P[alpha, p]`` and ``Pbar[alpha, p, j]``.
* :class:`BodyForce` ``b[alpha, p]``.

A dual component of an almost-symmetric block is the sum of the full-array
entries over the orderings of ``J`` only.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..multiindex import MultiIndex, jet_layout
from ..symalg import AlmostSymArray, Convention, SymArray

__all__ = [
    "VariationalStress",
    "TractionStress",
    "NonHolStress",
    "BodyForce",
    "HyperTraction",
    "component_keys",
    "flat_size",
]


def _frozen(a, shape):
    a = np.array(a, dtype=float).reshape(shape)
    a.setflags(write=False)
    return a


def _seq(I: MultiIndex) -> str:
    return ".".join(str(j) for j in I.sequence())


def _check(a, b):
    if (a.n, a.m, a.k) != (b.n, b.m, b.k):
        raise ValueError(f"shape mismatch: (n, m, k) = {(a.n, a.m, a.k)} vs {(b.n, b.m, b.k)}")


@dataclass(frozen=True, eq=False)
class VariationalStress:
    n: int
    m: int
    k: int
    S: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "S", _frozen(self.S, (self.m, jet_layout(self.n, self.k).size)))

    @classmethod
    def zeros(cls, n, m, k):
        return cls(n, m, k, np.zeros((m, jet_layout(n, k).size)))

    @classmethod
    def from_blocks(cls, n, m, k, blocks) -> VariationalStress:
        """``blocks[(alpha, degree)]`` is a dual :class:`SymArray`; missing blocks are zero."""
        layout = jet_layout(n, k)
        S = np.zeros((m, layout.size))
        for (alpha, l), arr in blocks.items():
            S[alpha - 1, layout.block(l)] = arr.to_convention(Convention.DUAL).values
        return cls(n, m, k, S)

    def block(self, alpha: int, degree: int) -> SymArray:
        return SymArray(self.n, degree, self.S[alpha - 1, jet_layout(self.n, self.k).block(degree)])

    def component(self, alpha: int, I) -> float:
        I = I if isinstance(I, MultiIndex) else MultiIndex.from_sequence(I, self.n)
        return float(self.S[alpha - 1, jet_layout(self.n, self.k).position[I]])

    @property
    def flat(self):
        return self.S.reshape(-1)

    def __add__(self, other):
        _check(self, other)
        return VariationalStress(self.n, self.m, self.k, self.S + other.S)

    def __sub__(self, other):
        _check(self, other)
        return VariationalStress(self.n, self.m, self.k, self.S - other.S)


@dataclass(frozen=True, eq=False)
class TractionStress:
    n: int
    m: int
    k: int
    tau: np.ndarray

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("traction stresses need k >= 1")
        object.__setattr__(self, "tau", _frozen(self.tau, (self.m, jet_layout(self.n, self.k - 1).size, self.n)))

    @classmethod
    def zeros(cls, n, m, k):
        return cls(n, m, k, np.zeros((m, jet_layout(n, k - 1).size, n)))

    @classmethod
    def from_blocks(cls, n, m, k, blocks) -> TractionStress:
        """``blocks[(alpha, degree)]`` is an :class:`AlmostSymArray` of degree ``degree + 1``."""
        layout = jet_layout(n, k - 1)
        tau = np.zeros((m, layout.size, n))
        for (alpha, l), arr in blocks.items():
            tau[alpha - 1, layout.block(l)] = arr.to_convention(Convention.DUAL).values
        return cls(n, m, k, tau)

    def block(self, alpha: int, degree: int) -> AlmostSymArray:
        """``tau^{J; i}`` with ``|J| = degree``."""
        sl = jet_layout(self.n, self.k - 1).block(degree)
        return AlmostSymArray(self.n, degree + 1, self.tau[alpha - 1, sl])

    @property
    def flat(self):
        return self.tau.reshape(-1)

    def __add__(self, other):
        _check(self, other)
        return TractionStress(self.n, self.m, self.k, self.tau + other.tau)

    def __sub__(self, other):
        _check(self, other)
        return TractionStress(self.n, self.m, self.k, self.tau - other.tau)


@dataclass(frozen=True, eq=False)
class BodyForce:
    n: int
    m: int
    k: int
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "b", _frozen(self.b, (self.m, jet_layout(self.n, self.k - 1).size)))

    @classmethod
    def zeros(cls, n, m, k):
        return cls(n, m, k, np.zeros((m, jet_layout(n, k - 1).size)))

    def block(self, alpha: int, degree: int) -> SymArray:
        return SymArray(self.n, degree, self.b[alpha - 1, jet_layout(self.n, self.k - 1).block(degree)])

    @property
    def flat(self):
        return self.b.reshape(-1)

    def __neg__(self):
        return BodyForce(self.n, self.m, self.k, -self.b)


@dataclass(frozen=True, eq=False)
class NonHolStress:
    n: int
    m: int
    k: int
    P: np.ndarray
    Pbar: np.ndarray

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("non-holonomic stresses need k >= 1")
        size = jet_layout(self.n, self.k - 1).size
        object.__setattr__(self, "P", _frozen(self.P, (self.m, size)))
        object.__setattr__(self, "Pbar", _frozen(self.Pbar, (self.m, size, self.n)))

    @classmethod
    def zeros(cls, n, m, k):
        size = jet_layout(n, k - 1).size
        return cls(n, m, k, np.zeros((m, size)), np.zeros((m, size, n)))

    @classmethod
    def from_flat(cls, n, m, k, flat) -> NonHolStress:
        size = jet_layout(n, k - 1).size
        flat = np.asarray(flat, dtype=float).reshape(-1)
        return cls(n, m, k, flat[: m * size], flat[m * size :])

    def block(self, alpha: int, degree: int) -> SymArray:
        return SymArray(self.n, degree, self.P[alpha - 1, jet_layout(self.n, self.k - 1).block(degree)])

    def bar_block(self, alpha: int, degree: int) -> AlmostSymArray:
        sl = jet_layout(self.n, self.k - 1).block(degree)
        return AlmostSymArray(self.n, degree + 1, self.Pbar[alpha - 1, sl])

    @property
    def flat(self):
        return np.concatenate([self.P.reshape(-1), self.Pbar.reshape(-1)])

    def __add__(self, other):
        _check(self, other)
        return NonHolStress(self.n, self.m, self.k, self.P + other.P, self.Pbar + other.Pbar)

    def __sub__(self, other):
        _check(self, other)
        return NonHolStress(self.n, self.m, self.k, self.P - other.P, self.Pbar - other.Pbar)


@dataclass(frozen=True, eq=False)
class HyperTraction:
    """Boundary density ``t^J_alpha`` relative to the face parametrization measure."""

    n: int
    m: int
    k: int
    z: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "z", _frozen(self.z, (self.n,)))
        object.__setattr__(self, "t", _frozen(self.t, (self.m, jet_layout(self.n, self.k - 1).size)))

    def act(self, v) -> float:
        """Pair with ambient ``(k-1)``-jet components ``v[alpha, J]``."""
        v = np.asarray(getattr(v, "values", v), dtype=float)
        return float(np.sum(self.t * v[:, : self.t.shape[1]]))


_KINDS = ("variational", "traction", "nonholonomic", "bodyforce", "jetsection")


def flat_size(kind: str, n: int, m: int, k: int) -> int:
    if kind not in _KINDS:
        raise ValueError(f"unknown kind {kind!r}")
    if kind == "variational":
        return m * jet_layout(n, k).size
    size = m * jet_layout(n, k - 1).size
    if kind == "traction":
        return size * n
    if kind == "nonholonomic":
        return size * (n + 1)
    return size


def component_keys(kind: str, n: int, m: int, k: int) -> list[dict]:
    """Descriptors of the flat components of a field kind, in storage order.

    Each descriptor has ``alpha`` (1-based), ``index`` (count vector), and
    where relevant ``slot`` (1-based) and ``part`` (``"P"`` or ``"Pbar"``),
    plus a printable ``key``.
    """
    if kind == "variational":
        heads = jet_layout(n, k).indices
        return [{"alpha": a, "index": I.to_json(), "key": f"S[{a};{_seq(I)}]"} for a in range(1, m + 1) for I in heads]
    heads = jet_layout(n, k - 1).indices
    plain = [{"alpha": a, "index": J.to_json()} for a in range(1, m + 1) for J in heads]
    slotted = [
        {"alpha": a, "index": J.to_json(), "slot": i} for a in range(1, m + 1) for J in heads for i in range(1, n + 1)
    ]
    if kind == "traction":
        return [dict(d, key=f"tau[{d['alpha']};{_seq(MultiIndex(tuple(d['index'])))}|{d['slot']}]") for d in slotted]
    if kind == "nonholonomic":
        return [dict(d, part="P", key=f"P[{d['alpha']};{_seq(MultiIndex(tuple(d['index'])))}]") for d in plain] + [
            dict(d, part="Pbar", key=f"Pbar[{d['alpha']};{_seq(MultiIndex(tuple(d['index'])))}|{d['slot']}]")
            for d in slotted
        ]
    if kind in ("bodyforce", "jetsection"):
        name = "b" if kind == "bodyforce" else "lam"
        return [dict(d, key=f"{name}[{d['alpha']};{_seq(MultiIndex(tuple(d['index'])))}]") for d in plain]
    raise ValueError(f"unknown kind {kind!r}")
