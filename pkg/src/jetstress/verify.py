"""Identity suites, run configuration and reports.

Every comparison ``a == b`` is scored by the scaled residual
``|a - b| / max(1, |a|, |b|)``; reports carry both the largest raw
absolute difference and the largest scaled residual, and a check passes
when the scaled residual is within tolerance.
"""
from __future__ import annotations

import contextlib
import datetime as _dt
import json
import platform
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy

from . import __version__
from . import symalg
from .chart import (
    BundleTransition,
    ChartMap,
    affine_chart,
    assemble_G,
    example_chart,
    identity_chart,
    pushforward_body_force,
    pushforward_nh_stress,
    pushforward_traction_stress,
    pushforward_var_stress,
    pushforward_vectors,
)
from .jetfield.jets import JetExtensionMap, JetPoint, include_holonomic, prolong, prolong_section_of_jets
from .jetfield.maps import ComposedMap, ConstantMap, FuncMap, PolyMap, Polynomial, SmoothMap, map_from_json
from .measure import Box, Region, force_functionals, region_from_json, stokes_residual, unit_box, unit_simplex
from .multiindex import enumerate_indices, jet_layout, sym_dim
from .randomdata import random_field, random_points, random_polymap, random_section
from .stresscore import operators
from .stresscore.constitutive import constitutive_nhs, constitutive_var
from .stresscore.fields import Field, field_from_json
from .stresscore.operators import (
    divergence,
    exterior_jet,
    form_on_frame,
    holonomic_kernel_element,
    induced_nhs,
    nh_pair,
    p_tau,
    reduced_exterior_jet,
    restrict_to_holonomic,
    traction_action,
    var_pair,
    var_stress_from_force_system,
)
from .stresscore.values import BodyForce, NonHolStress, TractionStress, VariationalStress
from .symalg import AlmostSymArray, Convention, SymArray, collapse_last, pair, spread_last, symmetrize, symmetrize_almost

__all__ = [
    "REPORT_VERSION",
    "Check",
    "Report",
    "VerifyConfig",
    "ConfigError",
    "SUITES",
    "run_verify",
    "symmetry_example",
    "dims_table",
    "scaled_residual",
    "inject_fault",
]

REPORT_VERSION = "1"
DEFAULT_TOLERANCES = {"algebraic": 1e-12, "chart": 1e-9, "quadrature": 1e-8}


class ConfigError(ValueError):
    """Invalid verification or export configuration."""


@dataclass
class Check:
    name: str
    suite: str
    anchor: str
    max_abs_residual: float
    max_scaled_residual: float
    tolerance: float
    passed: bool
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


class _Tally:
    """Accumulates residuals of one named check."""

    def __init__(self, name: str, suite: str, anchor: str, tol: float):
        self.name, self.suite, self.anchor, self.tol = name, suite, anchor, tol
        self.abs = 0.0
        self.scaled = 0.0
        self.details: dict = {}

    def compare(self, a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        diff = np.abs(a - b)
        scale = np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
        self.abs = max(self.abs, float(np.max(diff, initial=0.0)))
        self.scaled = max(self.scaled, float(np.max(diff / scale, initial=0.0)))

    def zero(self, a):
        self.compare(a, np.zeros_like(np.asarray(a, dtype=float)))

    def flag(self, ok: bool):
        """Boolean condition: residual 0 when it holds, 1 otherwise."""
        self.compare(0.0 if ok else 1.0, 0.0)

    def done(self) -> Check:
        ok = bool(np.isfinite(self.scaled) and self.scaled <= self.tol)
        return Check(self.name, self.suite, self.anchor, self.abs, self.scaled, self.tol, ok, self.details)


def scaled_residual(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.maximum(np.abs(a), np.abs(b))), initial=0.0))


@dataclass
class Report:
    checks: list[Check]
    config: dict
    seed: int
    timestamp: str = ""

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def to_json(self, timestamp: bool = True) -> dict:
        out = {
            "report_version": REPORT_VERSION,
            "environment": {
                "seed": self.seed,
                "jetstress": __version__,
                "python": platform.python_version(),
                "numpy": np.__version__,
                "scipy": scipy.__version__,
            },
            "config": self.config,
            "checks": [c.to_json() for c in self.checks],
            "pass": self.passed,
        }
        if timestamp:
            out["timestamp"] = self.timestamp
        return out


@dataclass
class VerifyConfig:
    n: int = 2
    m: int = 2
    k: int = 2
    seed: int = 0
    systems: int = 3
    points: int = 10
    arrays: int = 200
    potentials: int = 10
    degree: int | None = None
    suites: list[str] | None = None
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    chart: dict | None = None
    transition: list | None = None
    regions: list[dict] | None = None
    fields: dict = field(default_factory=dict)
    inject_fault: str | None = None

    def __post_init__(self):
        for name in ("n", "m", "k"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ConfigError(f"{name} must be a positive integer, got {v!r}")
        if self.n > 4 or self.m > 3 or self.k > 4:
            raise ConfigError("supported sizes are n <= 4, m <= 3, k <= 4")
        tol = dict(DEFAULT_TOLERANCES)
        tol.update(self.tolerances or {})
        self.tolerances = tol
        if self.suites is not None:
            unknown = [s for s in self.suites if s not in SUITES]
            if unknown:
                raise ConfigError(f"unknown suite(s) {unknown}; known: {sorted(SUITES)}")
        if self.inject_fault not in (None, "collapse_factor"):
            raise ConfigError(f"unknown fault {self.inject_fault!r}")

    @classmethod
    def from_json(cls, data: dict) -> VerifyConfig:
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown configuration keys {sorted(extra)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def to_json(self) -> dict:
        return asdict(self)

    # resolved objects

    def field_degree(self) -> int:
        return self.k + 2 if self.degree is None else self.degree

    def chart_map(self) -> ChartMap:
        if self.chart is None:
            return example_chart(self.n) if self.n >= 2 else affine_chart([[2.0]])
        try:
            ch = ChartMap.from_json(self.chart)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad chart: {exc}") from exc
        if ch.n != self.n:
            raise ConfigError("chart dimension differs from n")
        return ch

    def bundle_transition(self) -> BundleTransition:
        if self.transition is None:
            return default_transition(self.n, self.m)
        try:
            A = BundleTransition.from_json(self.transition, self.n)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad transition: {exc}") from exc
        if A.m != self.m:
            raise ConfigError("transition size differs from m")
        return A

    def region_list(self) -> list[Region]:
        if self.regions is None:
            return [unit_box(self.n), unit_simplex(self.n)]
        try:
            regions = [region_from_json(r) for r in self.regions]
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad region: {exc}") from exc
        if any(r.n != self.n for r in regions):
            raise ConfigError("region dimension differs from n")
        return regions

    def given_field(self, name: str, kind: str):
        spec = self.fields.get(name)
        if spec is None:
            return None
        try:
            f = field_from_json(spec)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad field {name!r}: {exc}") from exc
        if f.kind != kind or (f.n, f.m, f.k) != (self.n, self.m, self.k):
            raise ConfigError(f"field {name!r} must be a {kind} field with (n, m, k) = {(self.n, self.m, self.k)}")
        return f

    def given_section(self):
        spec = self.fields.get("w")
        if spec is None:
            return None
        try:
            w = map_from_json(spec, self.n)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad section 'w': {exc}") from exc
        if w.n_out != self.m:
            raise ConfigError("section 'w' must have m components")
        return w


def default_transition(n: int, m: int) -> BundleTransition:
    """``A = [[1, x^1], [0, 1]]`` on the first two fibre components, identity elsewhere."""
    if m < 2:
        return BundleTransition.identity(n, m)
    polys = [Polynomial.constant(n, float(a == b)) for a in range(m) for b in range(m)]
    polys[1] = Polynomial.variable(n, 0)
    return BundleTransition(PolyMap(polys, n), m)


@contextlib.contextmanager
def inject_fault(kind: str | None):
    """Temporarily corrupt the collapse operator (doubles every collapsed sum)."""
    if kind is None:
        yield
        return
    if kind != "collapse_factor":
        raise ConfigError(f"unknown fault {kind!r}")
    original = symalg.collapse_matrix

    def corrupted(n, l):
        return 2.0 * original(n, l)

    symalg.collapse_matrix = corrupted
    operators.collapse_matrix = corrupted
    operators.restriction_matrix.cache_clear()
    try:
        yield
    finally:
        symalg.collapse_matrix = original
        operators.collapse_matrix = original
        operators.restriction_matrix.cache_clear()


# data helpers


class _Data:
    def __init__(self, cfg: VerifyConfig, rng: np.random.Generator):
        self.cfg, self.rng = cfg, rng

    def field(self, name, kind, n=None, m=None, k=None):
        cfg = self.cfg
        n, m, k = n or cfg.n, m or cfg.m, k or cfg.k
        if (n, m, k) == (cfg.n, cfg.m, cfg.k):
            given = cfg.given_field(name, kind)
            if given is not None:
                return given
        return random_field(self.rng, kind, n, m, k, cfg.field_degree() if k == cfg.k else k + 2)

    def section(self, n=None, m=None, k=None):
        cfg = self.cfg
        n, m, k = n or cfg.n, m or cfg.m, k or cfg.k
        if (n, m) == (cfg.n, cfg.m):
            given = cfg.given_section()
            if given is not None:
                return given
        return random_section(self.rng, n, m, k + 2)

    def points(self, count, region: Region | None = None, n=None):
        n = n or self.cfg.n
        if region is None:
            return random_points(self.rng, n, count)
        box = region
        return box.lo + self.rng.random((count, n)) * (box.hi - box.lo)


def _series_traction_divergence(tau: Field, lam: SmoothMap, x) -> float:
    """``d(tau . lambda)`` coefficient at ``x`` from products of first-order Taylor series."""
    n = tau.n
    size = tau.m * jet_layout(n, tau.k - 1).size
    ts = tau.map.taylor(x, 1)
    ls = lam.taylor(x, 1)
    total = 0.0
    for i in range(n):
        c = None
        for p in range(size):
            term = ts[p * n + i] * ls[p]
            c = term if c is None else c + term
        total += c.coeffs[1 + i]
    return total


# suites


def suite_arrow_operators(cfg: VerifyConfig, rng) -> list[Check]:
    tol = cfg.tolerances["algebraic"]
    roundtrip = _Tally("collapse-spread-roundtrip", "arrow-operators", "collapse o spread = id", tol)
    transfer = _Tally("pairing-transfer", "arrow-operators", "T^{J;j} w_{Jj} = (collapse T)^I w_I", tol)
    symm = _Tally("symmetrize-almost", "arrow-operators", "l-term symmetrization = full symmetrization", tol)
    for _ in range(cfg.arrays):
        n = int(rng.integers(1, max(cfg.n, 3) + 1))
        l = int(rng.integers(1, 5))
        R = SymArray(n, l, rng.normal(size=sym_dim(n, l)))
        roundtrip.compare(collapse_last(spread_last(R)).values, R.values)
        T = AlmostSymArray(n, l, rng.normal(size=(sym_dim(n, l - 1), n)))
        w = SymArray(n, l, rng.normal(size=sym_dim(n, l)), Convention.DERIVATIVE)
        direct = 0.0
        for q, J in enumerate(T.heads):
            for j in range(1, n + 1):
                direct += T.values[q, j - 1] * w[J.append(j)]
        transfer.compare(direct, pair(collapse_last(T), w))
        if l <= 3 and n <= 3:
            Td = T.to_convention(Convention.DERIVATIVE)
            symm.compare(symmetrize_almost(Td).values, symmetrize(Td.to_dense()).values)
    return [roundtrip.done(), transfer.done(), symm.done()]


def suite_exterior_jet(cfg: VerifyConfig, rng) -> list[Check]:
    data = _Data(cfg, rng)
    t = _Tally("exterior-jet-identity", "exterior-jet", "exterior jet: (d tau).j^1 lambda = d(tau.lambda)", cfg.tolerances["algebraic"])
    if cfg.k < 1:
        return [t.done()]
    for _ in range(cfg.systems):
        tau = data.field("tau", "traction")
        lam = data.field("lam", "jetsection")
        d_tau = exterior_jet(tau)
        X = data.points(cfg.points)
        Pv = d_tau.values_batch(X)
        J = lam.map.jet_batch(X, 1)
        j1 = np.concatenate([J[:, :, 0], J[:, :, 1:].reshape(len(X), -1)], axis=1)
        lhs = np.sum(Pv * j1, axis=1)
        rhs = np.array([_series_traction_divergence(tau, lam.map, x) for x in X])
        t.compare(lhs, rhs)
    return [t.done()]


def suite_duality(cfg: VerifyConfig, rng) -> list[Check]:
    data = _Data(cfg, rng)
    k = cfg.k
    t = _Tally("holonomic-restriction-duality", "duality", "P . j^1(j^{k-1} w) = (restricted P) . j^k w", cfg.tolerances["algebraic"])
    for _ in range(cfg.systems):
        P = data.field("P", "nonholonomic")
        S = restrict_to_holonomic(P)
        w = data.section()
        ext = JetExtensionMap(w, k - 1)
        X = data.points(cfg.points)
        J = ext.jet_batch(X, 1)
        j1 = np.concatenate([J[:, :, 0], J[:, :, 1:].reshape(len(X), -1)], axis=1)
        lhs = np.sum(P.values_batch(X) * j1, axis=1)
        rhs = np.sum(S.values_batch(X) * w.jet_batch(X, k).reshape(len(X), -1), axis=1)
        t.compare(lhs, rhs)
    return [t.done()]


def suite_equilibrium(cfg: VerifyConfig, rng) -> list[Check]:
    data = _Data(cfg, rng)
    tol = cfg.tolerances["algebraic"]
    anchor = "div P + b = 0 and p_tau P = tau iff P is induced by (b, tau)"
    div_t = _Tally("divergence-of-induced", "equilibrium", anchor, tol)
    ptau_t = _Tally("p-tau-of-induced", "equilibrium", anchor, tol)
    dd_t = _Tally("divergence-of-exterior-jet", "equilibrium", "div(d tau) = 0", tol)
    iff_t = _Tally("equilibrium-biconditional", "equilibrium", anchor, tol)
    for _ in range(cfg.systems):
        b = data.field("b", "bodyforce")
        tau = data.field("tau", "traction")
        Pi = induced_nhs(b, tau)
        X = data.points(cfg.points)
        div_t.compare(divergence(Pi).values_batch(X), -b.values_batch(X))
        ptau_t.compare(p_tau(Pi).values_batch(X), tau.values_batch(X))
        dd_t.zero(divergence(exterior_jet(tau)).values_batch(X))
        # a perturbed stress satisfies neither side of the biconditional
        bump = random_field(rng, "nonholonomic", cfg.n, cfg.m, cfg.k, 1)
        for cand, expect in ((Pi, True), (_sum_fields(Pi, bump), None)):
            eq = scaled_residual(divergence(cand).values_batch(X), -b.values_batch(X)) <= tol
            rebuilt = induced_nhs(b, p_tau(cand))
            same = scaled_residual(rebuilt.values_batch(X), cand.values_batch(X)) <= tol
            iff_t.flag(eq == same and (expect is None or eq == expect))
    return [div_t.done(), ptau_t.done(), dd_t.done(), iff_t.done()]


def _sum_fields(a: Field, b: Field) -> Field:
    from .jetfield.maps import StackMap, linear_diff

    size = a.map.n_out
    C0 = np.hstack([np.eye(size), np.eye(size)])
    return Field(a.kind, a.n, a.m, a.k, linear_diff(StackMap([a.map, b.map]), C0))


def suite_stokes(cfg: VerifyConfig, rng) -> list[Check]:
    data = _Data(cfg, rng)
    tol = cfg.tolerances["quadrature"]
    stokes = _Tally("stokes-residual", "stokes", "int_{dR} tau.lambda = int_R (d tau).j^1 lambda", tol)
    three = _Tally("force-three-ways", "stokes", "boundary+body = non-holonomic = variational force", tol)
    additive = _Tally("force-additivity", "stokes", "force on a box = sum over a two-piece split", tol)
    deg_field = cfg.field_degree()
    degree = 2 * max(deg_field, cfg.k + 2) + 1
    stokes.details["quadrature_degree"] = degree
    three.details["quadrature_degree"] = degree
    for region in cfg.region_list():
        for _ in range(cfg.systems):
            tau = data.field("tau", "traction")
            lam = data.field("lam", "jetsection")
            b = data.field("b", "bodyforce")
            w = data.section()
            stokes.zero(stokes_residual(tau, lam, region, degree))
            f = force_functionals(b, tau, region, w, degree)
            three.compare(f["boundary_body"], f["nonholonomic"])
            three.compare(f["nonholonomic"], f["variational"])
            if isinstance(region, Box):
                left, right = region.split(0, 0.5 * (region.lo[0] + region.hi[0]))
                parts = sum(force_functionals(b, tau, r, w, degree)["boundary_body"] for r in (left, right))
                additive.compare(parts, f["boundary_body"])
    return [stokes.done(), three.done(), additive.done()]


def _transformed_section(chart: ChartMap, A: BundleTransition, w: SmoothMap) -> SmoothMap:
    """``w'(x') = A(x) w(x)`` with ``x = inverse(x')``."""
    m = A.m

    def fn(s):
        X = chart.inverse.evaluate_series(s)
        W = w.evaluate_series(X)
        Am = A.A.evaluate_series(X)
        return [sum((Am[a * m + b] * W[b] for b in range(1, m)), Am[a * m] * W[0]) for a in range(m)]

    return FuncMap(fn, chart.n, m)


def _lambda_family(rng, chart, A, n, m, k, terms=2):
    """``lambda = sum_c f_c j^{k-1} w_c`` and its primed counterpart built from transformed pieces."""
    fs = [random_polymap(rng, n, 1, 2) for _ in range(terms)]
    ws = [random_section(rng, n, m, k + 1) for _ in range(terms)]
    size = m * jet_layout(n, k - 1).size

    def combine(f_maps, e_maps):
        def fn(s):
            out = None
            for f, e in zip(f_maps, e_maps):
                fv = f.evaluate_series(s)[0]
                ev = e.evaluate_series(s)
                part = [fv * v for v in ev]
                out = part if out is None else [a + b for a, b in zip(out, part)]
            return out

        return FuncMap(fn, n, size)

    lam = combine(fs, [JetExtensionMap(w, k - 1) for w in ws])
    f_prime = [ComposedMap(f, chart.inverse) for f in fs]
    e_prime = [JetExtensionMap(_transformed_section(chart, A, w), k - 1) for w in ws]
    return lam, combine(f_prime, e_prime)


def suite_covariance(cfg: VerifyConfig, rng) -> list[Check]:
    n, m, k = cfg.n, cfg.m, cfg.k
    tol = cfg.tolerances["chart"]
    chart = cfg.chart_map()
    A = cfg.bundle_transition()
    chart.validate(order=k + 1, tol=tol)
    S_t = _Tally("variational-form-invariance", "covariance", "S.j^k w dx = S'.j^k w' dx'", tol)
    b_t = _Tally("body-force-form-invariance", "covariance", "b.j^{k-1} w dx = b'.j^{k-1} w' dx'", tol)
    tau_t = _Tally("traction-form-invariance", "covariance", "(tau.j^{k-1} w)(v_1..v_{n-1}) chart independent", tol)
    P_t = _Tally("nonholonomic-form-invariance", "covariance", "P.j^1 lambda dx = P'.j^1 lambda' dx'", tol)
    G_t = _Tally("jet-transition-triangular", "covariance", "G couples |I| <= |I'| only", tol)
    van_t = _Tally("vanishing-above-order", "covariance", "S' = 0 above order l implies S = 0 above order l", tol)
    rt_t = _Tally("chart-roundtrip", "covariance", "G(chart^-1) G(chart) = id", tol)
    box = chart.box
    finite = np.all(np.isfinite(box))
    data = _Data(cfg, rng)
    ident = BundleTransition.identity(n, m)
    for _ in range(cfg.systems):
        w = data.section()
        wp = _transformed_section(chart, A, w)
        lam, lam_p = _lambda_family(rng, chart, A, n, m, k)
        X = data.points(max(2, cfg.points // 5), Box(box[:, 0], box[:, 1]) if finite else None)
        for x in X:
            xp = chart.forward(x)
            jac = chart.jacobian_det(x)
            # variational
            Sp = VariationalStress(n, m, k, rng.normal(size=(m, jet_layout(n, k).size)))
            S = pushforward_var_stress(chart, A, Sp, x)
            S_t.compare(var_pair(S, prolong(w, x, k)), jac * var_pair(Sp, prolong(wp, xp, k)))
            # body force
            bp = BodyForce(n, m, k, rng.normal(size=(m, jet_layout(n, k - 1).size)))
            bb = pushforward_body_force(chart, A, bp, x)
            lo, lo_p = prolong(w, x, k - 1), prolong(wp, xp, k - 1)
            b_t.compare(np.sum(bb.b * lo.values), jac * np.sum(bp.b * lo_p.values))
            # traction on a random tangent frame
            taup = TractionStress(n, m, k, rng.normal(size=(m, jet_layout(n, k - 1).size, n)))
            tau = pushforward_traction_stress(chart, A, taup, x)
            if n > 1:
                V = rng.normal(size=(n - 1, n))
                lhs = form_on_frame(traction_action(tau, lo), V)
                rhs = form_on_frame(traction_action(taup, lo_p), pushforward_vectors(chart, x, V))
            else:
                lhs = float(traction_action(tau, lo)[0])
                rhs = float(traction_action(taup, lo_p)[0])
            tau_t.compare(lhs, rhs)
            # non-holonomic
            Pp = NonHolStress(n, m, k, rng.normal(size=(m, jet_layout(n, k - 1).size)), rng.normal(size=(m, jet_layout(n, k - 1).size, n)))
            P = pushforward_nh_stress(chart, A, Pp, x)
            P_t.compare(nh_pair(P, prolong_section_of_jets(lam, x, m, k)), jac * nh_pair(Pp, prolong_section_of_jets(lam_p, xp, m, k)))
            # structure of G
            G = assemble_G(chart, A, x, k).G
            layout = jet_layout(n, k)
            deg = np.tile(layout.degrees, m)
            G_t.zero(G[deg[:, None] < deg[None, :]])
            # vanishing above order l
            l = int(rng.integers(0, k + 1))
            Sl = np.array(Sp.S)
            Sl[:, layout.degrees > l] = 0.0
            Sv = pushforward_var_stress(chart, A, VariationalStress(n, m, k, Sl), x)
            van_t.zero(Sv.S[:, layout.degrees > l])
            # round trip with the identity transition
            G1 = assemble_G(chart, ident, x, k).G
            G2 = assemble_G(chart.reversed(), ident, xp, k).G
            rt_t.compare(G2 @ G1, np.eye(G1.shape[0]))
    return [S_t.done(), b_t.done(), tau_t.done(), P_t.done(), G_t.done(), van_t.done(), rt_t.done()]


def _random_potential(rng, n_vars: int, terms: int = 12, max_degree: int = 4) -> PolyMap:
    poly = {}
    for _ in range(terms):
        e = [0] * n_vars
        for _ in range(int(rng.integers(1, max_degree + 1))):
            e[int(rng.integers(0, n_vars))] += 1
        poly[tuple(e)] = poly.get(tuple(e), 0.0) + float(rng.integers(-3, 4))
    return PolyMap([Polynomial(n_vars, poly)], n_vars)


def suite_constitutive(cfg: VerifyConfig, rng) -> list[Check]:
    n, m, k = cfg.n, cfg.m, cfg.k
    size = m * jet_layout(n, k).size
    fd = _Tally("potential-gradient-vs-differences", "constitutive", "S = d phi / d u (canonical coordinates)", 1e-6)
    quad = _Tally("quadratic-potential", "constitutive", "phi = |u|^2/2 gives S = u", cfg.tolerances["algebraic"])
    chain = _Tally("nonholonomic-potential-restriction", "constitutive", "restriction of dPhi = d phi for Phi = phi o r", cfg.tolerances["algebraic"])
    h = 1e-5
    for _ in range(cfg.potentials):
        phi = _random_potential(rng, size)
        u = JetPoint(n, m, k, rng.uniform(-1, 1, size=(m, jet_layout(n, k).size)))
        g = constitutive_var(phi, u).flat
        base = u.flat
        approx = np.empty(size)
        for i in range(size):
            e = np.zeros(size)
            e[i] = h
            approx[i] = (phi(base + e)[0] - phi(base - e)[0]) / (2 * h)
        err = float(np.max(np.abs(g - approx)) / max(1.0, float(np.max(np.abs(g)))))
        fd.compare(err, 0.0)
    half = PolyMap([Polynomial(size, {tuple(int(r == i) * 2 for r in range(size)): 0.5 for i in range(size)})], size)
    u = JetPoint(n, m, k, rng.uniform(-1, 1, size=(m, jet_layout(n, k).size)))
    quad.compare(constitutive_var(half, u).flat, u.flat)
    # Phi = phi o r with r reading the top jet from one (J, j) split
    lo = jet_layout(n, k - 1)
    hi = jet_layout(n, k)
    nh_size = m * lo.size * (n + 1)
    rows = []
    for a in range(m):
        for I in hi.indices:
            if I.degree < k:
                col = a * lo.size + lo.position[I]
            else:
                last = I.offsets()[-1]
                col = m * lo.size + (a * lo.size + lo.position[I.remove(last + 1)]) * n + last
            rows.append(Polynomial.variable(nh_size, col))
    r = PolyMap(rows, nh_size)
    for _ in range(max(cfg.systems, 1)):
        phi = _random_potential(rng, size)
        u = JetPoint(n, m, k, rng.uniform(-1, 1, size=(m, hi.size)))
        P = constitutive_nhs(ComposedMap(phi, r), include_holonomic(u))
        chain.compare(restrict_to_holonomic(P).flat, constitutive_var(phi, u).flat)
    return [fd.done(), quad.done(), chain.done()]


def suite_k1(cfg: VerifyConfig, rng) -> list[Check]:
    n, m = cfg.n, cfg.m
    tol = cfg.tolerances["algebraic"]
    div_t = _Tally("k1-classical-divergence", "k1-degeneration", "k=1: reduced exterior jet = (div tau, tau)", tol)
    same_t = _Tally("k1-restriction-identity", "k1-degeneration", "k=1: restriction reshapes (P, Pbar)", tol)
    for _ in range(cfg.systems):
        tau = random_field(rng, "traction", n, m, 1, 3)
        X = random_points(rng, n, cfg.points)
        S = reduced_exterior_jet(tau).values_batch(X).reshape(len(X), m, n + 1)
        J = tau.map.jet_batch(X, 1).reshape(len(X), m, n, n + 1)
        div = np.einsum("qajj->qa", J[:, :, :, 1:])
        div_t.compare(S[:, :, 0], div)
        div_t.compare(S[:, :, 1:], J[:, :, :, 0])
        P = NonHolStress(n, m, 1, rng.normal(size=(m, 1)), rng.normal(size=(m, 1, n)))
        Sv = restrict_to_holonomic(P).S
        same_t.compare(Sv[:, 0], P.P[:, 0])
        same_t.compare(Sv[:, 1:], P.Pbar[:, 0, :])
    return [div_t.done(), same_t.done()]


def suite_kernel(cfg: VerifyConfig, rng) -> list[Check]:
    tol = cfg.tolerances["algebraic"]
    anchor = "restriction to holonomic jets is not injective for k >= 2"
    ker = _Tally("kernel-element", "kernel", anchor, tol)
    nonzero = _Tally("kernel-element-nonzero", "kernel", anchor, tol)
    same_S = _Tally("force-system-non-uniqueness", "kernel", "different (b, tau) with the same variational stress", tol)
    cases = {(2, cfg.m, 2)}
    if cfg.k >= 2:
        cases.add((cfg.n, cfg.m, cfg.k))
    for n, m, k in sorted(cases):
        lo = jet_layout(n, k - 1)
        top = rng.normal(size=(m, sym_dim(n, k - 1), n))
        lower = rng.normal(size=(m, lo.block(k - 1).start, n))
        K = holonomic_kernel_element(n, m, k, top, lower)
        ker.zero(restrict_to_holonomic(K).S)
        nonzero.flag(float(np.max(np.abs(K.flat))) > 1e-3)
        b = random_field(rng, "bodyforce", n, m, k)
        tau = random_field(rng, "traction", n, m, k)
        b2 = _sum_fields(b, Field("bodyforce", n, m, k, ConstantMap(K.P.reshape(-1), n)))
        tau2 = _sum_fields(tau, Field("traction", n, m, k, ConstantMap(K.Pbar.reshape(-1), n)))
        X = random_points(rng, n, cfg.points)
        same_S.compare(var_stress_from_force_system(b, tau).values_batch(X), var_stress_from_force_system(b2, tau2).values_batch(X))
        nonzero.flag(scaled_residual(tau.values_batch(X), tau2.values_batch(X)) > 1e-6)
    return [ker.done(), nonzero.done(), same_S.done()]


def full_traction_blocks(tau: TractionStress, alpha: int = 1) -> dict[int, np.ndarray]:
    """Full arrays ``tau^{i_1..i_r l}`` per degree ``r`` (last axis the free slot)."""
    return {r: tau.block(alpha, r).to_dense() for r in range(tau.k)}


def symmetry_example(point=(0.3, 0.7)) -> dict:
    """Traction symmetry under ``x'^1 = x^1 + (x^2)^2`` (n = 2, scalar fibre).

    Pushes forward ``tau'`` with every full-array entry equal to one, for
    ``k = 4``, and measures the symmetry of each block; repeats for ``k = 2``
    with symmetric and non-symmetric ``tau'``, and for the identity and a
    linear chart.
    """
    n, m = 2, 1
    x = np.asarray(point, dtype=float)
    chart = example_chart(2)
    ident = BundleTransition.identity(n, m)

    def ones_tau(k):
        lo = jet_layout(n, k - 1)
        return TractionStress(n, m, k, np.repeat(lo.multiplicities[:, None], n, axis=1)[None])

    tau4 = pushforward_traction_stress(chart, ident, ones_tau(4), x)
    blocks = full_traction_blocks(tau4)
    defects = {r: tau4.block(1, r).symmetry_defect() for r in range(4)}
    il = blocks[1]
    result = {
        "point": x.tolist(),
        "jacobian": chart.jacobian_det(x),
        "k4": {
            "blocks": {str(r): blocks[r].tolist() for r in range(4)},
            "symmetry_defect": {str(r): defects[r] for r in range(4)},
            "il_asymmetry": float(abs(il[0, 1] - il[1, 0])),
        },
    }
    # k = 2: symmetric iff symmetric
    rng = np.random.default_rng(7)
    Msym = rng.normal(size=(2, 2))
    Msym = Msym + Msym.T
    Masym = Msym + np.array([[0.0, 1.0], [-1.0, 0.0]])
    out2 = {}
    for label, M in (("symmetric", Msym), ("non_symmetric", Masym)):
        t = np.zeros((1, 3, 2))
        t[0, 0] = rng.normal(size=2)
        t[0, 1:, :] = M
        tp = TractionStress(n, m, 2, t)
        out2[label] = {
            "source_defect": tp.block(1, 1).symmetry_defect(),
            "pushed_defect": pushforward_traction_stress(chart, ident, tp, x).block(1, 1).symmetry_defect(),
        }
    result["k2"] = out2
    control = {}
    for label, ch in (("identity", identity_chart(2)), ("linear", affine_chart([[2.0, 1.0], [0.5, 1.5]], [0.1, -0.2]))):
        pushed = pushforward_traction_stress(ch, ident, ones_tau(4), x)
        control[label] = max(pushed.block(1, r).symmetry_defect() for r in range(4))
    result["controls"] = control
    return result


def suite_symmetry_example(cfg: VerifyConfig, rng) -> list[Check]:
    tol = cfg.tolerances["chart"]
    ex = symmetry_example()
    anchor = "traction symmetry is not invariant beyond the top block"
    top = _Tally("top-block-stays-symmetric", "symmetry-example", anchor, tol)
    top.zero(ex["k4"]["symmetry_defect"]["3"])
    asym = _Tally("il-block-asymmetric", "symmetry-example", anchor, tol)
    asym.flag(ex["k4"]["il_asymmetry"] > 1e-3)
    asym.details["il_asymmetry"] = ex["k4"]["il_asymmetry"]
    k2 = _Tally("k2-symmetry-preserved", "symmetry-example", "k=2: tau^{il} symmetric iff tau'^{il} symmetric", tol)
    k2.zero(ex["k2"]["symmetric"]["pushed_defect"])
    k2.flag(ex["k2"]["non_symmetric"]["pushed_defect"] > 1e-3)
    ctrl = _Tally("affine-charts-preserve-symmetry", "symmetry-example", "no second derivatives, no asymmetry", tol)
    ctrl.zero([ex["controls"]["identity"], ex["controls"]["linear"]])
    return [top.done(), asym.done(), k2.done(), ctrl.done()]


def suite_euclidean(cfg: VerifyConfig, rng) -> list[Check]:
    """Flat n = 3, k = 2: integration by parts of a top-order stress with unit normals."""
    n, m, k = 3, 3, 2
    tol = cfg.tolerances["quadrature"]
    anchor = "int S^{ab}_j v^j_{,ab} = int_{dR} S^{ab}_j n_b v^j_{,a} dA - int S^{ab}_{j,b} v^j_{,a} dV"
    ibp = _Tally("euclidean-integration-by-parts", "euclidean", anchor, tol)
    pipe = _Tally("euclidean-force-system", "euclidean", anchor, tol)
    region = Box([0.0, 0.0, 0.0], [1.0, 0.8, 1.2])
    degree = 9
    from .measure import box_rule, integrate_n_form

    for _ in range(max(1, cfg.systems)):
        # full symmetric S^{ab}_j with polynomial entries of degree 2
        full = {}
        for j in range(m):
            for a in range(n):
                for b in range(a, n):
                    full[(j, a, b)] = random_polymap(rng, n, 1, 2)
        polys_S = []
        hi = jet_layout(n, k)
        for j in range(m):
            for I in hi.indices:
                if I.degree < 2:
                    polys_S.append(Polynomial(n))
                else:
                    a, b = I.offsets()
                    polys_S.append(full[(j, a, b)].polys[0] * float(I.multiplicity))
        S = Field("variational", n, m, k, PolyMap(polys_S, n))
        v = random_section(rng, n, m, 3)

        def S_full(X):
            out = np.zeros((len(X), m, n, n))
            for (j, a, b), p in full.items():
                val = p.values_batch(X)[:, 0]
                out[:, j, a, b] = val
                out[:, j, b, a] = val
            return out

        def dS_full(X):
            out = np.zeros((len(X), m, n, n, n))
            for (j, a, b), p in full.items():
                J = p.jet_batch(X, 1)[:, 0, 1:]
                out[:, j, a, b] = J
                out[:, j, b, a] = J
            return out

        def grad_v(X):
            return v.jet_batch(X, 1)[:, :, 1:]  # (Q, m, n)

        def hess_v(X):
            H = v.jet_batch(X, 2)
            out = np.zeros((len(X), m, n, n))
            for p, I in enumerate(hi.indices):
                if I.degree == 2:
                    a, b = I.offsets()
                    out[:, :, a, b] = H[:, :, p]
                    out[:, :, b, a] = H[:, :, p]
            return out

        lhs = integrate_n_form(lambda X: np.einsum("qjab,qjab->q", S_full(X), hess_v(X)), region, degree)
        body = integrate_n_form(lambda X: np.einsum("qjabb,qja->q", dS_full(X), grad_v(X)), region, degree)
        # boundary with explicit unit normals and area elements
        surface = 0.0
        rule = box_rule(n - 1, degree)
        for r in range(n):
            others = [s for s in range(n) if s != r]
            area = float(np.prod(region.hi[others] - region.lo[others]))
            for side, at in ((-1.0, region.lo[r]), (1.0, region.hi[r])):
                X = np.empty((rule.nodes.shape[0], n))
                X[:, r] = at
                X[:, others] = region.lo[others] + rule.nodes * (region.hi[others] - region.lo[others])
                normal = np.zeros(n)
                normal[r] = side
                t = np.einsum("qjab,b->qja", S_full(X), normal)
                surface += area * float(np.sum(rule.weights * np.einsum("qja,qja->q", t, grad_v(X))))
        ibp.compare(lhs, surface - body)
        # the same decomposition through the force-system pipeline
        lo = jet_layout(n, k - 1)
        tau_polys = [Polynomial(n)] * (m * lo.size * n)
        tau_polys = list(tau_polys)
        b_polys = [Polynomial(n)] * (m * lo.size)
        b_polys = list(b_polys)
        for j in range(m):
            for a in range(n):
                for b in range(n):
                    key = (j, min(a, b), max(a, b))
                    tau_polys[(j * lo.size + 1 + a) * n + b] = full[key].polys[0]
                acc = Polynomial(n)
                for b in range(n):
                    acc = acc + full[(j, min(a, b), max(a, b))].polys[0].derivative(b)
                b_polys[j * lo.size + 1 + a] = -acc
        tau = Field("traction", n, m, k, PolyMap(tau_polys, n))
        bf = Field("bodyforce", n, m, k, PolyMap(b_polys, n))
        f = force_functionals(bf, tau, region, v, degree)
        pipe.compare(f["boundary_body"], lhs)
        pipe.compare(f["variational"], lhs)
        X = random_points(rng, n, cfg.points)
        pipe.compare(var_stress_from_force_system(bf, tau).values_batch(X), S.values_batch(X))
    return [ibp.done(), pipe.done()]


SUITES = {
    "arrow-operators": suite_arrow_operators,
    "exterior-jet": suite_exterior_jet,
    "duality": suite_duality,
    "equilibrium": suite_equilibrium,
    "stokes": suite_stokes,
    "covariance": suite_covariance,
    "constitutive": suite_constitutive,
    "k1-degeneration": suite_k1,
    "kernel": suite_kernel,
    "symmetry-example": suite_symmetry_example,
    "euclidean": suite_euclidean,
}


def run_verify(cfg: VerifyConfig, suites=None) -> Report:
    names = suites or cfg.suites or list(SUITES)
    for s in names:
        if s not in SUITES:
            raise ConfigError(f"unknown suite {s!r}; known: {sorted(SUITES)}")
    checks = []
    with inject_fault(cfg.inject_fault):
        for i, name in enumerate(names):
            rng = np.random.default_rng([cfg.seed, i])
            checks.extend(SUITES[name](cfg, rng))
    stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return Report(checks, cfg.to_json(), cfg.seed, stamp)


def dims_table(n_max: int, l_max: int) -> list[dict]:
    """Enumerated counts of symmetric multi-indices against the closed form."""
    from math import factorial

    rows = []
    for n in range(1, n_max + 1):
        for l in range(0, l_max + 1):
            closed = factorial(n + l - 1) // (factorial(n - 1) * factorial(l))
            rows.append({"n": n, "l": l, "enumerated": len(enumerate_indices(n, l)), "closed_form": closed})
    return rows


def report_json_text(report: Report, timestamp: bool = True) -> str:
    return json.dumps(report.to_json(timestamp), indent=2, sort_keys=True)
