"""Smooth maps evaluated through truncated Taylor arithmetic.

Every map exposes ``evaluate_series`` (generic-ring evaluation on
:class:`TruncatedSeries` arguments), ``jet(x, order)`` (all partial
derivatives up to ``order`` at ``x``, shape ``(n_out, N)`` in
``jet_layout(n_in, order)`` order) and ``jet_batch`` over many points.
Evaluation is pure: no map mutates state when evaluated.

Expression-tree grammar (JSON)::

    expr := number
          | {"const": number}
          | {"var": j}                                   # 1-based coordinate
          | {"op": "add" | "mul", "args": [expr, ...]}
          | {"op": "sub" | "div", "args": [expr, expr]}
          | {"op": "neg" | "sin" | "cos" | "exp" | "log" | "sqrt", "args": [expr]}
          | {"op": "pow", "args": [expr, number]}
          | {"op": "poly", "terms": [[coef, [e_1, ..., e_n]], ...]}

Trees built only from constants, variables, ``add``, ``sub``, ``neg``,
``mul``, ``poly`` and non-negative integer ``pow`` are compiled to
:class:`PolyMap`, which differentiates in closed form.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from ..multiindex import jet_layout
from .series import TruncatedSeries, series_compose, variables

__all__ = [
    "SmoothMap",
    "Polynomial",
    "PolyMap",
    "ExprMap",
    "FuncMap",
    "ComposedMap",
    "StackMap",
    "LinearDiffMap",
    "ConstantMap",
    "linear_diff",
    "NotPolynomial",
    "eval_expr",
    "map_from_json",
]


class SmoothMap:
    """Base class; subclasses override :meth:`evaluate_series` or :meth:`jet`."""

    n_in: int
    n_out: int

    def evaluate_series(self, inputs):
        """Generic evaluation on series arguments (composition with ``inputs``)."""
        inputs = list(inputs)
        x = np.array([s.value for s in inputs])
        local = self.taylor(x, inputs[0].order)
        return [series_compose(t, inputs) for t in local]

    def taylor(self, x, order: int) -> list[TruncatedSeries]:
        """Taylor expansions of every output at ``x``."""
        if type(self).jet is not SmoothMap.jet:
            partials = self.jet(x, order)
            return [TruncatedSeries.from_partials(self.n_in, order, p) for p in partials]
        return self.evaluate_series(variables(x, order))

    def jet(self, x, order: int) -> np.ndarray:
        return np.array([s.partials() for s in self.taylor(x, order)]).reshape(
            self.n_out, jet_layout(self.n_in, order).size
        )

    def jet_batch(self, X, order: int) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.stack([self.jet(x, order) for x in X])

    def values_batch(self, X) -> np.ndarray:
        return self.jet_batch(X, 0)[:, :, 0]

    def __call__(self, x) -> np.ndarray:
        return self.jet(np.asarray(x, dtype=float), 0)[:, 0]

    def to_json(self):
        raise TypeError(f"{type(self).__name__} has no expression-tree form")


class NotPolynomial(TypeError):
    pass


class Polynomial:
    """Sparse polynomial ``{exponent tuple: coefficient}`` in ``n`` variables."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms=None):
        self.n = n
        self.terms = {}
        for e, c in (terms or {}).items():
            e = tuple(int(v) for v in e)
            if len(e) != n or any(v < 0 for v in e):
                raise ValueError(f"bad exponent {e} for n={n}")
            if c != 0:
                self.terms[e] = self.terms.get(e, 0.0) + float(c)

    @classmethod
    def constant(cls, n: int, c: float) -> Polynomial:
        return cls(n, {(0,) * n: c})

    @classmethod
    def variable(cls, n: int, r: int) -> Polynomial:
        e = [0] * n
        e[r] = 1
        return cls(n, {tuple(e): 1.0})

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def _coerce(self, other) -> Polynomial:
        if isinstance(other, Polynomial):
            if other.n != self.n:
                raise ValueError("variable count mismatch")
            return other
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Polynomial.constant(self.n, float(other))
        raise NotPolynomial(type(other).__name__)

    def __add__(self, other):
        other = self._coerce(other)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms.get(e, 0.0) + c
        return Polynomial(self.n, {e: c for e, c in terms.items() if c != 0})

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.n, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        terms = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                terms[e] = terms.get(e, 0.0) + c1 * c2
        return Polynomial(self.n, {e: c for e, c in terms.items() if c != 0})

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return self * (1.0 / float(other))
        raise NotPolynomial("division by a non-constant")

    def __pow__(self, p):
        if not (float(p).is_integer() and p >= 0):
            raise NotPolynomial(f"power {p}")
        out = Polynomial.constant(self.n, 1.0)
        for _ in range(int(p)):
            out = out * self
        return out

    def derivative(self, r: int) -> Polynomial:
        terms = {}
        for e, c in self.terms.items():
            if e[r] > 0:
                e2 = list(e)
                e2[r] -= 1
                terms[tuple(e2)] = terms.get(tuple(e2), 0.0) + c * e[r]
        return Polynomial(self.n, terms)

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(sum(c * np.prod(x ** np.array(e)) for e, c in self.terms.items()))

    def to_json(self) -> dict:
        terms = sorted(self.terms.items(), key=lambda t: (sum(t[0]), tuple(-v for v in t[0])))
        return {"op": "poly", "terms": [[_num(c), list(e)] for e, c in terms]}

    def __repr__(self) -> str:
        return f"Polynomial(n={self.n}, {self.terms})"


def _num(c: float):
    return int(c) if float(c).is_integer() else float(c)


_UNARY = {"sin", "cos", "exp", "log", "sqrt"}


def _unary(name: str, v):
    if isinstance(v, Polynomial):
        raise NotPolynomial(name)
    if isinstance(v, TruncatedSeries):
        return getattr(v, name)()
    return getattr(math, name)(v)


def eval_expr(node, args):
    """Evaluate an expression tree over any ring that supports ``+ - * **``.

    ``args`` holds the coordinate values (floats, series or polynomials).
    """
    if isinstance(node, (int, float)):
        return float(node)
    if "const" in node:
        return float(node["const"])
    if "var" in node:
        j = int(node["var"])
        if not 1 <= j <= len(args):
            raise IndexError(f"variable {j} out of range 1..{len(args)}")
        return args[j - 1]
    op = node.get("op")
    if op == "poly":
        total = 0.0
        for coef, exps in node["terms"]:
            if len(exps) != len(args):
                raise ValueError("poly exponent length does not match the variable count")
            term = float(coef)
            for a, e in zip(args, exps):
                if e:
                    term = term * (a ** int(e))
            total = total + term
        return total
    vals = [eval_expr(a, args) for a in node.get("args", [])]
    if op == "add":
        out = vals[0]
        for v in vals[1:]:
            out = out + v
        return out
    if op == "mul":
        out = vals[0]
        for v in vals[1:]:
            out = out * v
        return out
    if op == "sub":
        return vals[0] - vals[1] if len(vals) == 2 else -vals[0]
    if op == "neg":
        return -vals[0]
    if op == "div":
        return vals[0] / vals[1]
    if op == "pow":
        p = node["args"][1]
        p = p["const"] if isinstance(p, dict) else p
        return vals[0] ** p
    if op in _UNARY:
        return _unary(op, vals[0])
    raise ValueError(f"unknown expression node {node!r}")


class PolyMap(SmoothMap):
    """Vector of polynomials with closed-form derivatives."""

    def __init__(self, polys, n_in: int | None = None):
        polys = list(polys)
        self.n_in = polys[0].n if polys else int(n_in)
        self.n_out = len(polys)
        self.polys = tuple(polys)
        exps = sorted({e for p in polys for e in p.terms}) or [(0,) * self.n_in]
        col = {e: t for t, e in enumerate(exps)}
        self.exps = np.array(exps, dtype=int).reshape(len(exps), self.n_in)
        C = np.zeros((self.n_out, len(exps)))
        for o, p in enumerate(polys):
            for e, c in p.terms.items():
                C[o, col[e]] = c
        self.coef = C
        self.max_exp = int(self.exps.max(initial=0))

    @classmethod
    def zeros(cls, n_in: int, n_out: int) -> PolyMap:
        return cls([Polynomial(n_in) for _ in range(n_out)], n_in)

    @lru_cache(maxsize=8)
    def _tables(self, order: int):
        betas = jet_layout(self.n_in, order).counts  # (B, n)
        diff = self.exps[None, :, :] - betas[:, None, :]  # (B, T, n)
        valid = np.all(diff >= 0, axis=2)
        fall = np.ones(valid.shape)
        for r in range(self.n_in):
            e = self.exps[None, :, r]
            b = betas[:, None, r]
            for s in range(int(betas[:, r].max(initial=0))):
                fall *= np.where(b > s, e - s, 1)
        fall = np.where(valid, fall, 0.0)
        return np.clip(diff, 0, None), fall

    def jet_batch(self, X, order: int) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        D, fall = self._tables(order)
        powers = X[:, :, None] ** np.arange(self.max_exp + 1)[None, None, :]  # (P, n, E)
        M = np.broadcast_to(fall, (X.shape[0],) + fall.shape).copy()
        for r in range(self.n_in):
            M *= powers[:, r, :][:, D[:, :, r]]
        return np.einsum("ot,pbt->pob", self.coef, M)

    def jet(self, x, order: int) -> np.ndarray:
        return self.jet_batch(np.asarray(x, dtype=float).reshape(1, -1), order)[0]

    def evaluate_series(self, inputs):
        inputs = list(inputs)
        cache = {}

        def power(r, e):
            if (r, e) not in cache:
                cache[(r, e)] = inputs[r] ** e
            return cache[(r, e)]

        monos = []
        for e in self.exps:
            m = None
            for r, v in enumerate(e):
                if v:
                    m = power(r, int(v)) if m is None else m * power(r, int(v))
            monos.append(m if m is not None else TruncatedSeries.constant(inputs[0].n, inputs[0].order, 1.0))
        out = []
        for o in range(self.n_out):
            acc = TruncatedSeries(inputs[0].n, inputs[0].order)
            for t, c in enumerate(self.coef[o]):
                if c != 0.0:
                    acc = acc + monos[t] * c
            out.append(acc)
        return out

    def derivative(self, r: int) -> PolyMap:
        return PolyMap([p.derivative(r) for p in self.polys], self.n_in)

    def to_json(self):
        return [p.to_json() for p in self.polys]


class ExprMap(SmoothMap):
    """Vector of expression trees evaluated in series arithmetic."""

    def __init__(self, trees, n_in: int):
        self.trees = list(trees)
        self.n_in = n_in
        self.n_out = len(self.trees)

    def evaluate_series(self, inputs):
        inputs = list(inputs)
        out = []
        for t in self.trees:
            v = eval_expr(t, inputs)
            if not isinstance(v, TruncatedSeries):
                v = TruncatedSeries.constant(inputs[0].n, inputs[0].order, v)
            out.append(v)
        return out

    def to_json(self):
        return list(self.trees)


class FuncMap(SmoothMap):
    """Wraps a user routine ``fn(list_of_series) -> list_of_series``.

    The routine must only use ring operations and the series functions, and
    must not keep state between calls.
    """

    def __init__(self, fn, n_in: int, n_out: int):
        self.fn = fn
        self.n_in = n_in
        self.n_out = n_out

    def evaluate_series(self, inputs):
        inputs = list(inputs)
        out = []
        for v in self.fn(inputs):
            if not isinstance(v, TruncatedSeries):
                v = TruncatedSeries.constant(inputs[0].n, inputs[0].order, v)
            out.append(v)
        if len(out) != self.n_out:
            raise ValueError(f"routine returned {len(out)} outputs, expected {self.n_out}")
        return out


class ConstantMap(SmoothMap):
    def __init__(self, values, n_in: int):
        self.values = np.asarray(values, dtype=float).reshape(-1)
        self.n_in = n_in
        self.n_out = self.values.shape[0]

    def jet(self, x, order: int) -> np.ndarray:
        out = np.zeros((self.n_out, jet_layout(self.n_in, order).size))
        out[:, 0] = self.values
        return out

    def jet_batch(self, X, order: int) -> np.ndarray:
        X = np.atleast_2d(X)
        return np.broadcast_to(self.jet(X[0], order), (X.shape[0], self.n_out, jet_layout(self.n_in, order).size)).copy()

    def to_json(self):
        return [_num(v) for v in self.values]


class ComposedMap(SmoothMap):
    """``outer o inner``."""

    def __init__(self, outer: SmoothMap, inner: SmoothMap):
        if outer.n_in != inner.n_out:
            raise ValueError("composition arity mismatch")
        self.outer = outer
        self.inner = inner
        self.n_in = inner.n_in
        self.n_out = outer.n_out

    def evaluate_series(self, inputs):
        return self.outer.evaluate_series(self.inner.evaluate_series(inputs))

    def taylor(self, x, order: int):
        return self.outer.evaluate_series(self.inner.taylor(x, order))


class StackMap(SmoothMap):
    """Concatenated outputs of maps sharing the same inputs."""

    def __init__(self, maps):
        self.maps = list(maps)
        self.n_in = self.maps[0].n_in
        if any(m.n_in != self.n_in for m in self.maps):
            raise ValueError("stacked maps must share inputs")
        self.n_out = sum(m.n_out for m in self.maps)

    def evaluate_series(self, inputs):
        inputs = list(inputs)
        return [s for m in self.maps for s in m.evaluate_series(inputs)]

    def jet(self, x, order: int) -> np.ndarray:
        return np.concatenate([m.jet(x, order) for m in self.maps], axis=0)

    def jet_batch(self, X, order: int) -> np.ndarray:
        return np.concatenate([m.jet_batch(X, order) for m in self.maps], axis=1)


class LinearDiffMap(SmoothMap):
    """Constant-coefficient first-order operator applied to a parent map.

    ``out_o = sum_i C0[o, i] f_i + sum_{i, r} C1[o, i, r] d_r f_i``.
    """

    def __init__(self, parent: SmoothMap, C0=None, C1=None):
        self.parent = parent
        self.n_in = parent.n_in
        C0 = None if C0 is None else np.asarray(C0, dtype=float)
        C1 = None if C1 is None else np.asarray(C1, dtype=float)
        shape = C0.shape[0] if C0 is not None else C1.shape[0]
        self.C0 = C0 if C0 is not None else np.zeros((shape, parent.n_out))
        self.C1 = C1
        self.n_out = shape
        if self.C0.shape != (shape, parent.n_out):
            raise ValueError("C0 has the wrong shape")
        if C1 is not None and C1.shape != (shape, parent.n_out, self.n_in):
            raise ValueError("C1 has the wrong shape")

    def jet_batch(self, X, order: int) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        size = jet_layout(self.n_in, order).size
        if self.C1 is None:
            pj = self.parent.jet_batch(X, order)
            return np.einsum("oi,pib->pob", self.C0, pj)
        pj = self.parent.jet_batch(X, order + 1)
        out = np.einsum("oi,pib->pob", self.C0, pj[:, :, :size])
        app = jet_layout(self.n_in, order + 1).append[:size]
        for r in range(self.n_in):
            out += np.einsum("oi,pib->pob", self.C1[:, :, r], pj[:, :, app[:, r]])
        return out

    def jet(self, x, order: int) -> np.ndarray:
        return self.jet_batch(np.asarray(x, dtype=float).reshape(1, -1), order)[0]


def linear_diff(parent: SmoothMap, C0=None, C1=None) -> LinearDiffMap:
    """Build ``LinearDiffMap(parent, C0, C1)``, merging with a first-order parent when the total order stays <= 1."""
    if isinstance(parent, LinearDiffMap) and (C1 is None or parent.C1 is None):
        out = parent.n_out
        C0 = np.zeros((np.asarray(C1).shape[0], out)) if C0 is None else np.asarray(C0, dtype=float)
        new0 = C0 @ parent.C0
        if C1 is None and parent.C1 is None:
            new1 = None
        elif C1 is None:
            new1 = np.einsum("oi,ijr->ojr", C0, parent.C1)
        else:
            new1 = np.einsum("oir,ij->ojr", np.asarray(C1, dtype=float), parent.C0)
        return LinearDiffMap(parent.parent, new0, new1)
    return LinearDiffMap(parent, C0, C1)


def _to_polynomial(tree, n_in: int) -> Polynomial:
    args = [Polynomial.variable(n_in, r) for r in range(n_in)]
    v = eval_expr(tree, args)
    return v if isinstance(v, Polynomial) else Polynomial.constant(n_in, v)


def map_from_json(trees, n_in: int) -> SmoothMap:
    """Build a map from a list of expression trees (one per output)."""
    trees = list(trees)
    try:
        return PolyMap([_to_polynomial(t, n_in) for t in trees], n_in)
    except NotPolynomial:
        return ExprMap(trees, n_in)
