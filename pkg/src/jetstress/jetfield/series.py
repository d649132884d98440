"""Truncated multivariate Taylor series.

A :class:`TruncatedSeries` in ``n`` variables of order ``d`` stores the Taylor
coefficients ``c_I`` (``|I| <= d``) of a function about a fixed expansion
point, in :func:`~jetstress.multiindex.jet_layout` order.  The partial
derivative at the expansion point is ``d_I f = I! c_I``.  Products are
truncated Cauchy products, so every ring operation is exact modulo terms of
degree ``d + 1``.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from ..multiindex import MultiIndex, jet_layout

__all__ = [
    "TruncatedSeries",
    "series_add",
    "series_mul",
    "series_scale",
    "series_compose",
    "variables",
]


@lru_cache(maxsize=None)
def _mul_table(n: int, d: int):
    layout = jet_layout(n, d)
    ia, ib, ic = [], [], []
    for a, I in enumerate(layout.indices):
        room = d - I.degree
        for b in range(layout.block(room).stop):
            ia.append(a)
            ib.append(b)
            ic.append(layout.position[I + layout.indices[b]])
    return np.array(ia), np.array(ib), np.array(ic)


@lru_cache(maxsize=None)
def _derivative_table(n: int, d: int, r: int):
    """Positions and factors for d/dx_r taking order d to order d-1."""
    src = jet_layout(n, d)
    dst = jet_layout(n, d - 1)
    from_pos = np.array([src.position[I.append(r + 1)] for I in dst.indices], dtype=int)
    factor = np.array([I.counts[r] + 1 for I in dst.indices], dtype=float)
    return from_pos, factor


class TruncatedSeries:
    __slots__ = ("n", "order", "coeffs")

    def __init__(self, n: int, order: int, coeffs=None):
        self.n = n
        self.order = order
        size = jet_layout(n, order).size
        if coeffs is None:
            coeffs = np.zeros(size)
        else:
            coeffs = np.asarray(coeffs, dtype=float)
            if coeffs.shape != (size,):
                raise ValueError(f"expected {size} coefficients, got shape {coeffs.shape}")
        self.coeffs = coeffs

    # construction

    @classmethod
    def constant(cls, n: int, order: int, value: float) -> TruncatedSeries:
        s = cls(n, order)
        s.coeffs[0] = value
        return s

    @classmethod
    def variable(cls, n: int, order: int, r: int, value: float = 0.0) -> TruncatedSeries:
        """``value + delta_r`` with ``r`` a 0-based variable offset."""
        s = cls.constant(n, order, value)
        if order >= 1:
            s.coeffs[1 + r] = 1.0
        return s

    @classmethod
    def from_partials(cls, n: int, order: int, partials) -> TruncatedSeries:
        return cls(n, order, np.asarray(partials, dtype=float) / jet_layout(n, order).factorials)

    # inspection

    @property
    def layout(self):
        return jet_layout(self.n, self.order)

    @property
    def value(self) -> float:
        return float(self.coeffs[0])

    def coeff(self, I: MultiIndex) -> float:
        return float(self.coeffs[self.layout.position[I]])

    def partials(self) -> np.ndarray:
        """Partial derivatives at the expansion point, in layout order."""
        return self.coeffs * self.layout.factorials

    def truncate(self, order: int) -> TruncatedSeries:
        if order > self.order:
            raise ValueError("cannot raise the truncation order")
        return TruncatedSeries(self.n, order, self.coeffs[: jet_layout(self.n, order).size].copy())

    def extend(self, order: int) -> TruncatedSeries:
        """Zero-pad to a higher order (exact only for polynomials of degree <= self.order)."""
        out = TruncatedSeries(self.n, order)
        out.coeffs[: self.coeffs.shape[0]] = self.coeffs
        return out

    def derivative(self, r: int) -> TruncatedSeries:
        """Series of ``d/dx_r`` (0-based ``r``), one order lower."""
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 series")
        from_pos, factor = _derivative_table(self.n, self.order, r)
        return TruncatedSeries(self.n, self.order - 1, self.coeffs[from_pos] * factor)

    def is_affine(self) -> bool:
        return not np.any(self.coeffs[jet_layout(self.n, min(self.order, 1)).size :])

    # arithmetic

    def _coerce(self, other) -> TruncatedSeries:
        if isinstance(other, TruncatedSeries):
            if (other.n, other.order) != (self.n, self.order):
                raise ValueError(
                    f"series mismatch: (n={self.n}, d={self.order}) vs (n={other.n}, d={other.order})"
                )
            return other
        return TruncatedSeries.constant(self.n, self.order, float(other))

    def __add__(self, other):
        other = self._coerce(other)
        return TruncatedSeries(self.n, self.order, self.coeffs + other.coeffs)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(self.n, self.order, -self.coeffs)

    def __sub__(self, other):
        other = self._coerce(other)
        return TruncatedSeries(self.n, self.order, self.coeffs - other.coeffs)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            return TruncatedSeries(self.n, self.order, self.coeffs * float(other))
        other = self._coerce(other)
        ia, ib, ic = _mul_table(self.n, self.order)
        out = np.bincount(ic, weights=self.coeffs[ia] * other.coeffs[ib], minlength=self.coeffs.shape[0])
        return TruncatedSeries(self.n, self.order, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, TruncatedSeries):
            return self * (1.0 / float(other))
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, TruncatedSeries):
            return (self.log() * p).exp()
        if float(p).is_integer() and p >= 0:
            p = int(p)
            result = TruncatedSeries.constant(self.n, self.order, 1.0)
            base = self
            while p:
                if p & 1:
                    result = result * base
                p >>= 1
                if p:
                    base = base * base
            return result
        return self.power(float(p))

    # elementary functions: f(a0 + h) = sum_j f^(j)(a0)/j! h^j with h nilpotent

    def _apply(self, taylor_coeffs) -> TruncatedSeries:
        h = TruncatedSeries(self.n, self.order, self.coeffs.copy())
        h.coeffs[0] = 0.0
        out = TruncatedSeries.constant(self.n, self.order, taylor_coeffs[0])
        hp = None
        for j in range(1, self.order + 1):
            hp = h if hp is None else hp * h
            out = out + hp * taylor_coeffs[j]
        return out

    def exp(self) -> TruncatedSeries:
        e = math.exp(self.value)
        return self._apply([e / math.factorial(j) for j in range(self.order + 1)])

    def sin(self) -> TruncatedSeries:
        s, c = math.sin(self.value), math.cos(self.value)
        cyc = (s, c, -s, -c)
        return self._apply([cyc[j % 4] / math.factorial(j) for j in range(self.order + 1)])

    def cos(self) -> TruncatedSeries:
        s, c = math.sin(self.value), math.cos(self.value)
        cyc = (c, -s, -c, s)
        return self._apply([cyc[j % 4] / math.factorial(j) for j in range(self.order + 1)])

    def log(self) -> TruncatedSeries:
        a0 = self.value
        if a0 <= 0:
            raise ValueError("log of a series with non-positive constant term")
        coeffs = [math.log(a0)] + [(-1) ** (j + 1) / (j * a0**j) for j in range(1, self.order + 1)]
        return self._apply(coeffs)

    def power(self, p: float) -> TruncatedSeries:
        """Real power ``a**p`` via the binomial series about the constant term."""
        a0 = self.value
        if a0 == 0:
            raise ValueError("non-integer power of a series with zero constant term")
        if a0 < 0 and not float(p).is_integer():
            raise ValueError("non-integer power of a series with negative constant term")
        coeffs = []
        binom = 1.0
        for j in range(self.order + 1):
            coeffs.append(binom * a0 ** (p - j))
            binom *= (p - j) / (j + 1)
        return self._apply(coeffs)

    def reciprocal(self) -> TruncatedSeries:
        return self.power(-1.0)

    def sqrt(self) -> TruncatedSeries:
        return self.power(0.5)

    def __repr__(self) -> str:
        terms = [
            f"{c:+g}" + "".join(f"*x{j}" for j in I.sequence())
            for I, c in zip(self.layout.indices, self.coeffs)
            if c != 0
        ]
        return f"TruncatedSeries(n={self.n}, d={self.order}: {' '.join(terms) or '0'})"


def series_add(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    return a + b


def series_mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    return a * b


def series_scale(a: TruncatedSeries, c: float) -> TruncatedSeries:
    return a * float(c)


def variables(x, order: int) -> list[TruncatedSeries]:
    """Coordinate series ``x_r + delta_r`` expanded at the point ``x``."""
    x = np.asarray(x, dtype=float).reshape(-1)
    n = x.shape[0]
    return [TruncatedSeries.variable(n, order, r, x[r]) for r in range(n)]


def series_compose(outer: TruncatedSeries, inner, center=None) -> TruncatedSeries:
    """Substitute ``inner`` into ``outer``.

    ``outer`` is a series in ``p`` variables expanded about a point ``c``;
    ``inner`` is a list of ``p`` series in ``n`` variables.  With
    ``center=None`` the constant terms of ``inner`` are taken as ``c`` and the
    result is the order-``d`` expansion of the composite (``d`` the inner
    order).  With an explicit ``center`` the outer series is re-centred, i.e.
    treated as the polynomial ``sum_I c_I (y - center)^I``; this is exact when
    the outer function is a polynomial of degree at most ``outer.order``.
    """
    inner = list(inner)
    if len(inner) != outer.n:
        raise ValueError(f"outer has {outer.n} variables but {len(inner)} inner series were given")
    n, d = inner[0].n, inner[0].order
    if any((s.n, s.order) != (n, d) for s in inner):
        raise ValueError("inner series must share variables and order")
    if center is not None:
        center = np.asarray(center, dtype=float).reshape(-1)
        if center.shape != (outer.n,):
            raise ValueError("center must have one entry per outer variable")
    shifts = []
    for r, s in enumerate(inner):
        h = TruncatedSeries(n, d, s.coeffs.copy())
        h.coeffs[0] = 0.0 if center is None else s.coeffs[0] - center[r]
        shifts.append(h)
    if center is not None:
        top = outer.order
        olayout = jet_layout(outer.n, top)
        monomials = [TruncatedSeries.constant(n, d, 1.0)]
        out = monomials[0] * outer.coeffs[0]
        for pos in range(1, olayout.size):
            I = olayout.indices[pos]
            last = I.offsets()[-1]
            mono = monomials[olayout.position[I.remove(last + 1)]] * shifts[last]
            monomials.append(mono)
            if outer.coeffs[pos] != 0.0:
                out = out + mono * outer.coeffs[pos]
        return out
    top = min(outer.order, d)
    olayout = jet_layout(outer.n, top)
    monomials = [TruncatedSeries.constant(n, d, 1.0)]
    out = monomials[0] * outer.coeffs[0]
    for pos in range(1, olayout.size):
        I = olayout.indices[pos]
        last = I.offsets()[-1]
        prev = olayout.position[I.remove(last + 1)]
        mono = monomials[prev] * shifts[last]
        monomials.append(mono)
        c = outer.coeffs[pos]
        if c != 0.0:
            out = out + mono * c
    return out
