"""Symmetric and almost-symmetric component arrays.

Two component conventions are used and always carried as a tag:

``DERIVATIVE``
    The value stored at canonical ``I`` equals every entry of the full
    symmetric array along the orbit of ``I`` (e.g. partial derivatives
    ``w_{,I}``).  Jets use this convention.

``DUAL``
    The value stored at canonical ``I`` is the sum of the full array over
    the orbit of ``I``, i.e. ``|I|!/I!`` times one entry.  Pairing a dual
    array with a derivative array is then the plain sum over canonical
    indices.  All stresses and forces use this convention.

An almost-symmetric array of degree ``l`` is keyed by ``(J, j)`` with ``J``
canonical of degree ``l - 1`` and ``j`` a free last slot; it is stored as a
``(sym_dim(n, l-1), n)`` array.  For the dual convention the orbit sum runs
over the orderings of ``J`` only.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .multiindex import MultiIndex, enumerate_indices, sym_dim

__all__ = [
    "Convention",
    "ConventionError",
    "SymArray",
    "AlmostSymArray",
    "symmetrize",
    "symmetrize_almost",
    "collapse_last",
    "spread_last",
    "pair",
    "collapse_matrix",
    "spread_matrix",
]


class Convention(str, enum.Enum):
    DERIVATIVE = "derivative"
    DUAL = "dual"


class ConventionError(ValueError):
    """Raised when arrays in incompatible component conventions are mixed."""


def _positions(n: int, l: int) -> dict[MultiIndex, int]:
    return {I: p for p, I in enumerate(enumerate_indices(n, l))}


@dataclass(frozen=True, eq=False)
class SymArray:
    n: int
    l: int
    values: np.ndarray
    convention: Convention = Convention.DUAL

    def __post_init__(self):
        values = np.array(self.values, dtype=float).reshape(-1)
        if values.shape[0] != sym_dim(self.n, self.l):
            raise ValueError(
                f"expected {sym_dim(self.n, self.l)} entries for n={self.n}, l={self.l}, got {values.shape[0]}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "convention", Convention(self.convention))

    @classmethod
    def zeros(cls, n: int, l: int, convention=Convention.DUAL) -> SymArray:
        return cls(n, l, np.zeros(sym_dim(n, l)), convention)

    @classmethod
    def from_mapping(cls, n: int, l: int, mapping, convention=Convention.DUAL) -> SymArray:
        """Build from ``{MultiIndex or 1-based sequence: value}``; missing entries are zero."""
        pos = _positions(n, l)
        values = np.zeros(len(pos))
        for key, v in mapping.items():
            I = key if isinstance(key, MultiIndex) else MultiIndex.from_sequence(key, n)
            if I.degree != l:
                raise ValueError(f"index {I} has degree {I.degree}, expected {l}")
            values[pos[I]] = v
        return cls(n, l, values, convention)

    @property
    def indices(self) -> list[MultiIndex]:
        return enumerate_indices(self.n, self.l)

    def __getitem__(self, key) -> float:
        I = key if isinstance(key, MultiIndex) else MultiIndex.from_sequence(key, self.n)
        return float(self.values[_positions(self.n, self.l)[I]])

    def entries(self):
        return zip(self.indices, self.values.tolist())

    def multiplicities(self) -> np.ndarray:
        return np.array([I.multiplicity for I in self.indices], dtype=float)

    def to_convention(self, convention) -> SymArray:
        convention = Convention(convention)
        if convention == self.convention:
            return self
        mult = self.multiplicities()
        if convention == Convention.DUAL:
            return SymArray(self.n, self.l, self.values * mult, convention)
        return SymArray(self.n, self.l, self.values / mult, convention)

    def to_dense(self) -> np.ndarray:
        """Full ``(n,)*l`` array; dual values are spread evenly over their orbit."""
        comps = self.to_convention(Convention.DERIVATIVE).values
        pos = _positions(self.n, self.l)
        dense = np.empty((self.n,) * self.l)
        for seq in itertools.product(range(self.n), repeat=self.l):
            dense[seq] = comps[pos[MultiIndex.from_offsets(seq, self.n)]]
        return dense

    @classmethod
    def from_dense(cls, dense, convention=Convention.DUAL) -> SymArray:
        """Inverse of :meth:`to_dense` for symmetric input (no symmetry check)."""
        dense = np.asarray(dense, dtype=float)
        n = dense.shape[0] if dense.ndim else 1
        l = dense.ndim
        comps = np.array([dense[I.offsets()] for I in enumerate_indices(n, l)])
        return cls(n, l, comps, Convention.DERIVATIVE).to_convention(convention)

    def __add__(self, other: SymArray) -> SymArray:
        _check_compatible(self, other)
        return SymArray(self.n, self.l, self.values + other.values, self.convention)

    def __sub__(self, other: SymArray) -> SymArray:
        _check_compatible(self, other)
        return SymArray(self.n, self.l, self.values - other.values, self.convention)

    def __mul__(self, c: float) -> SymArray:
        return SymArray(self.n, self.l, self.values * c, self.convention)

    __rmul__ = __mul__

    def to_json(self) -> dict:
        return {
            "convention": self.convention.value,
            "n": self.n,
            "l": self.l,
            "entries": [{"index": I.to_json(), "value": v} for I, v in self.entries()],
        }

    @classmethod
    def from_json(cls, data) -> SymArray:
        n, l = int(data["n"]), int(data["l"])
        mapping = {MultiIndex.from_json(e["index"]): e["value"] for e in data["entries"]}
        return cls.from_mapping(n, l, mapping, Convention(data["convention"]))


@dataclass(frozen=True, eq=False)
class AlmostSymArray:
    n: int
    l: int
    values: np.ndarray
    convention: Convention = Convention.DUAL

    def __post_init__(self):
        if self.l < 1:
            raise ValueError("almost-symmetric arrays need degree l >= 1")
        values = np.array(self.values, dtype=float).reshape(sym_dim(self.n, self.l - 1), self.n)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "convention", Convention(self.convention))

    @classmethod
    def zeros(cls, n: int, l: int, convention=Convention.DUAL) -> AlmostSymArray:
        return cls(n, l, np.zeros((sym_dim(n, l - 1), n)), convention)

    @classmethod
    def from_mapping(cls, n: int, l: int, mapping, convention=Convention.DUAL) -> AlmostSymArray:
        """Build from ``{(J, j): value}`` with ``J`` a MultiIndex or 1-based sequence, ``j`` 1-based."""
        pos = _positions(n, l - 1)
        values = np.zeros((len(pos), n))
        for (J, j), v in mapping.items():
            J = J if isinstance(J, MultiIndex) else MultiIndex.from_sequence(J, n)
            values[pos[J], j - 1] = v
        return cls(n, l, values, convention)

    @property
    def heads(self) -> list[MultiIndex]:
        return enumerate_indices(self.n, self.l - 1)

    def __getitem__(self, key) -> float:
        J, j = key
        J = J if isinstance(J, MultiIndex) else MultiIndex.from_sequence(J, self.n)
        return float(self.values[_positions(self.n, self.l - 1)[J], j - 1])

    def to_convention(self, convention) -> AlmostSymArray:
        convention = Convention(convention)
        if convention == self.convention:
            return self
        mult = np.array([J.multiplicity for J in self.heads], dtype=float)[:, None]
        if convention == Convention.DUAL:
            return AlmostSymArray(self.n, self.l, self.values * mult, convention)
        return AlmostSymArray(self.n, self.l, self.values / mult, convention)

    def to_dense(self) -> np.ndarray:
        """Full ``(n,)*l`` array, the last axis being the free slot."""
        comps = self.to_convention(Convention.DERIVATIVE).values
        pos = _positions(self.n, self.l - 1)
        dense = np.empty((self.n,) * self.l)
        for seq in itertools.product(range(self.n), repeat=self.l - 1):
            dense[seq] = comps[pos[MultiIndex.from_offsets(seq, self.n)]]
        return dense

    def symmetry_defect(self) -> float:
        """Largest spread of the full-array entries within one orbit of ``<Jj>``.

        Zero exactly when the full array is symmetric in all ``l`` slots.
        """
        return float(np.max(np.abs(self.to_dense() - symmetrize(self.to_dense()).to_dense()), initial=0.0))

    def __add__(self, other: AlmostSymArray) -> AlmostSymArray:
        _check_compatible(self, other)
        return AlmostSymArray(self.n, self.l, self.values + other.values, self.convention)

    def __sub__(self, other: AlmostSymArray) -> AlmostSymArray:
        _check_compatible(self, other)
        return AlmostSymArray(self.n, self.l, self.values - other.values, self.convention)

    def __mul__(self, c: float) -> AlmostSymArray:
        return AlmostSymArray(self.n, self.l, self.values * c, self.convention)

    __rmul__ = __mul__

    def to_json(self) -> dict:
        return {
            "convention": self.convention.value,
            "n": self.n,
            "l": self.l,
            "entries": [
                {"index": J.to_json(), "slot": j + 1, "value": float(self.values[p, j])}
                for p, J in enumerate(self.heads)
                for j in range(self.n)
            ],
        }

    @classmethod
    def from_json(cls, data) -> AlmostSymArray:
        n, l = int(data["n"]), int(data["l"])
        mapping = {(MultiIndex.from_json(e["index"]), int(e["slot"])): e["value"] for e in data["entries"]}
        return cls.from_mapping(n, l, mapping, Convention(data["convention"]))


def _check_compatible(a, b):
    if (a.n, a.l) != (b.n, b.l):
        raise ValueError(f"shape mismatch: (n={a.n}, l={a.l}) vs (n={b.n}, l={b.l})")
    if a.convention != b.convention:
        raise ConventionError(f"cannot combine {a.convention.value} with {b.convention.value} arrays")


def symmetrize(raw, n: int | None = None, l: int | None = None) -> SymArray:
    """Average over all ``l!`` slot permutations.

    ``raw`` is either a full ``(n,)*l`` array or a callable taking a 1-based
    index sequence.  The result holds array components (derivative convention).
    """
    if callable(raw):
        if n is None or l is None:
            raise ValueError("n and l are required for a callable input")
        dense = np.empty((n,) * l)
        for seq in itertools.product(range(n), repeat=l):
            dense[seq] = raw(tuple(r + 1 for r in seq))
    else:
        dense = np.asarray(raw, dtype=float)
        n = dense.shape[0] if dense.ndim else 1
        l = dense.ndim
    perms = list(itertools.permutations(range(l)))
    values = []
    for I in enumerate_indices(n, l):
        seq = I.offsets()
        values.append(sum(dense[tuple(seq[p] for p in perm)] for perm in perms) / len(perms))
    return SymArray(n, l, np.array(values), Convention.DERIVATIVE)


def symmetrize_almost(T: AlmostSymArray) -> SymArray:
    """Symmetrization of an almost-symmetric array using only ``l`` slot moves.

    For array components, ``S(T)_I = (1/l) sum_j I_j T^{(I-j); j}``.  For the
    dual convention this reduces to :func:`collapse_last`.
    """
    if T.convention == Convention.DUAL:
        return collapse_last(T)
    n, l = T.n, T.l
    head_pos = _positions(n, l - 1)
    out = []
    for I in enumerate_indices(n, l):
        acc = 0.0
        for j in I.support():
            acc += I.counts[j - 1] * T.values[head_pos[I.remove(j)], j - 1]
        out.append(acc / l)
    return SymArray(n, l, np.array(out), Convention.DERIVATIVE)


@lru_cache(maxsize=None)
def collapse_matrix(n: int, l: int) -> np.ndarray:
    """Matrix of :func:`collapse_last` acting on the flattened ``(J, j)`` array."""
    head_pos = _positions(n, l - 1)
    idx = enumerate_indices(n, l)
    M = np.zeros((len(idx), len(head_pos) * n))
    for p, I in enumerate(idx):
        for j in I.support():
            M[p, head_pos[I.remove(j)] * n + (j - 1)] = 1.0
    M.setflags(write=False)
    return M


@lru_cache(maxsize=None)
def spread_matrix(n: int, l: int) -> np.ndarray:
    """Matrix of :func:`spread_last` producing the flattened ``(J, j)`` array."""
    pos = _positions(n, l)
    heads = enumerate_indices(n, l - 1)
    M = np.zeros((len(heads) * n, len(pos)))
    for q, J in enumerate(heads):
        for j in range(1, n + 1):
            I = J.append(j)
            M[q * n + (j - 1), pos[I]] = 1.0 / I.distinct_count
    M.setflags(write=False)
    return M


def collapse_last(T: AlmostSymArray) -> SymArray:
    """Sum the ``c(I)`` pairs ``(J, j)`` that reorder to each ``I``.

    ``result_I = sum_{j in I} T^{(I - j); j}``; for ``T`` built by
    :func:`spread_last` from ``R`` this is ``R`` again, and for ``T`` constant
    on orbits it is ``c(I) T_I``.
    """
    values = collapse_matrix(T.n, T.l) @ T.values.reshape(-1)
    return SymArray(T.n, T.l, values, T.convention)


def spread_last(R: SymArray) -> AlmostSymArray:
    """``T^{J; j} = R_<Jj> / c(Jj)``, a right inverse of :func:`collapse_last`."""
    if R.l < 1:
        raise ValueError("spread_last needs degree >= 1")
    values = spread_matrix(R.n, R.l) @ R.values
    return AlmostSymArray(R.n, R.l, values, R.convention)


def pair(dual: SymArray, derivative: SymArray) -> float:
    """Canonical-index sum of a dual array against a derivative array."""
    if dual.convention != Convention.DUAL or derivative.convention != Convention.DERIVATIVE:
        raise ConventionError(
            f"pair expects (dual, derivative), got ({dual.convention.value}, {derivative.convention.value})"
        )
    if (dual.n, dual.l) != (derivative.n, derivative.l):
        raise ValueError("dimension/degree mismatch")
    return float(dual.values @ derivative.values)
