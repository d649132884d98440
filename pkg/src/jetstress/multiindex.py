"""Canonical multi-indices over a base of dimension ``n``.

A multi-index is stored as its count vector: ``counts[r]`` is the number of
times base index ``r + 1`` occurs.  Base indices in the public API
(:meth:`MultiIndex.append`, :meth:`MultiIndex.remove`,
:meth:`MultiIndex.sequence`) are 1-based, ``j = 1..n``; the array offset of
``j`` is ``j - 1``.

Ordering contract (used for every flattened array and every serialized file):
indices are graded by degree, and within one degree they are listed in
lexicographic order of their non-decreasing sequences, i.e.
``itertools.combinations_with_replacement(range(n), l)`` order.  For
``n = 2, l = 2`` this is ``11, 12, 22`` (count vectors ``[2,0], [1,1], [0,2]``).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

__all__ = [
    "MultiIndex",
    "enumerate_indices",
    "indices_upto",
    "sym_dim",
    "JetLayout",
    "jet_layout",
]


@dataclass(frozen=True)
class MultiIndex:
    counts: tuple[int, ...]

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if any(c < 0 for c in counts):
            raise ValueError(f"negative count in {counts}")
        object.__setattr__(self, "counts", counts)

    @classmethod
    def zero(cls, n: int) -> MultiIndex:
        return cls((0,) * n)

    @classmethod
    def from_sequence(cls, seq, n: int) -> MultiIndex:
        """Build from a sequence of 1-based base indices, in any order."""
        counts = [0] * n
        for j in seq:
            if not 1 <= j <= n:
                raise IndexError(f"base index {j} out of range 1..{n}")
            counts[j - 1] += 1
        return cls(tuple(counts))

    @classmethod
    def from_offsets(cls, offsets, n: int) -> MultiIndex:
        counts = [0] * n
        for r in offsets:
            counts[r] += 1
        return cls(tuple(counts))

    @property
    def n(self) -> int:
        return len(self.counts)

    @cached_property
    def degree(self) -> int:
        return sum(self.counts)

    @cached_property
    def factorial(self) -> int:
        """``I! = I_1! ... I_n!``."""
        return math.prod(math.factorial(c) for c in self.counts)

    @cached_property
    def multiplicity(self) -> int:
        """Number of distinct orderings, ``|I|! / I!``."""
        return math.factorial(self.degree) // self.factorial

    @cached_property
    def distinct_count(self) -> int:
        """``c(I)``: how many base indices occur at least once."""
        return sum(1 for c in self.counts if c > 0)

    def support(self) -> tuple[int, ...]:
        """1-based base indices occurring in the index."""
        return tuple(r + 1 for r, c in enumerate(self.counts) if c > 0)

    def sequence(self) -> tuple[int, ...]:
        """Canonical (non-decreasing) 1-based sequence."""
        return tuple(r + 1 for r, c in enumerate(self.counts) for _ in range(c))

    def offsets(self) -> tuple[int, ...]:
        return tuple(r for r, c in enumerate(self.counts) for _ in range(c))

    def append(self, j: int) -> MultiIndex:
        if not 1 <= j <= self.n:
            raise IndexError(f"base index {j} out of range 1..{self.n}")
        counts = list(self.counts)
        counts[j - 1] += 1
        return MultiIndex(tuple(counts))

    def remove(self, j: int) -> MultiIndex:
        if not 1 <= j <= self.n:
            raise IndexError(f"base index {j} out of range 1..{self.n}")
        if self.counts[j - 1] == 0:
            raise ValueError(f"base index {j} does not occur in {self.sequence()}")
        counts = list(self.counts)
        counts[j - 1] -= 1
        return MultiIndex(tuple(counts))

    def __add__(self, other: MultiIndex) -> MultiIndex:
        if other.n != self.n:
            raise ValueError("dimension mismatch")
        return MultiIndex(tuple(a + b for a, b in zip(self.counts, other.counts)))

    def sort_key(self):
        return (self.degree, tuple(-c for c in self.counts))

    def __lt__(self, other: MultiIndex) -> bool:
        return self.sort_key() < other.sort_key()

    def to_json(self) -> list[int]:
        return list(self.counts)

    @classmethod
    def from_json(cls, data) -> MultiIndex:
        return cls(tuple(data))

    def __repr__(self) -> str:
        seq = "".join(str(j) for j in self.sequence()) if self.n < 10 else self.sequence()
        return f"MultiIndex({list(self.counts)}; {seq or '-'})"


def sym_dim(n: int, l: int) -> int:
    """Dimension of symmetric l-tensors over an n-space, (n+l-1)!/((n-1)! l!)."""
    return math.comb(n + l - 1, l)


@lru_cache(maxsize=None)
def _enumerate(n: int, l: int) -> tuple[MultiIndex, ...]:
    return tuple(
        MultiIndex.from_offsets(c, n)
        for c in itertools.combinations_with_replacement(range(n), l)
    )


def enumerate_indices(n: int, l: int) -> list[MultiIndex]:
    """All canonical multi-indices of degree ``l`` in the documented order."""
    if n < 1 or l < 0:
        raise ValueError("need n >= 1 and l >= 0")
    return list(_enumerate(n, l))


def indices_upto(n: int, k: int) -> list[MultiIndex]:
    """All canonical multi-indices of degree ``0..k``, graded ascending."""
    return [I for l in range(k + 1) for I in _enumerate(n, l)]


class JetLayout:
    """Flattened positions of all multi-indices of degree ``<= k``.

    ``append[p, r]`` is the position of ``indices[p]`` with offset ``r``
    appended, or ``-1`` when that exceeds degree ``k``.
    """

    def __init__(self, n: int, k: int):
        if n < 1 or k < 0:
            raise ValueError("need n >= 1 and k >= 0")
        self.n = n
        self.k = k
        self.indices = tuple(indices_upto(n, k))
        self.size = len(self.indices)
        self.position = {I: p for p, I in enumerate(self.indices)}
        starts = np.cumsum([0] + [sym_dim(n, l) for l in range(k + 1)])
        self.degree_slices = tuple(slice(int(starts[l]), int(starts[l + 1])) for l in range(k + 1))
        self.degrees = np.array([I.degree for I in self.indices], dtype=int)
        self.factorials = np.array([I.factorial for I in self.indices], dtype=float)
        self.multiplicities = np.array([I.multiplicity for I in self.indices], dtype=float)
        self.counts = np.array([I.counts for I in self.indices], dtype=int).reshape(self.size, n)
        app = np.full((self.size, n), -1, dtype=int)
        for p, I in enumerate(self.indices):
            if I.degree < k:
                for r in range(n):
                    app[p, r] = self.position[I.append(r + 1)]
        self.append = app

    def __len__(self) -> int:
        return self.size

    def pos(self, I: MultiIndex) -> int:
        return self.position[I]

    def block(self, l: int) -> slice:
        return self.degree_slices[l]


@lru_cache(maxsize=None)
def jet_layout(n: int, k: int) -> JetLayout:
    return JetLayout(n, k)
