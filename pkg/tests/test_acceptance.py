"""Acceptance criteria, one test each, printing a single PASS/FAIL line."""
import time
from math import factorial

import numpy as np

from jetstress.multiindex import enumerate_indices
from jetstress.verify import (
    VerifyConfig,
    suite_arrow_operators,
    suite_constitutive,
    suite_covariance,
    suite_duality,
    suite_equilibrium,
    suite_euclidean,
    suite_exterior_jet,
    suite_kernel,
    suite_stokes,
    suite_symmetry_example,
)

SEED = 1234


def report(capsys, number, title, ok, detail):
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} ({detail})")


def run_checks(suite, configs, names=None):
    checks = []
    for i, cfg in enumerate(configs):
        checks += [c for c in suite(cfg, np.random.default_rng([SEED, i])) if names is None or c.name in names]
    return checks


def summary(checks):
    worst = max(checks, key=lambda c: c.max_scaled_residual / c.tolerance)
    return f"worst {worst.name} {worst.max_scaled_residual:.2e} (abs {worst.max_abs_residual:.2e}) vs {worst.tolerance:g}"


def test_criterion_01_symmetric_dimensions(capsys):
    t = time.perf_counter()
    bad = [
        (n, l)
        for n in range(1, 6)
        for l in range(0, 6)
        if len(enumerate_indices(n, l)) != factorial(n + l - 1) // (factorial(n - 1) * factorial(l))
    ]
    elapsed = time.perf_counter() - t
    ok = not bad and elapsed < 1.0
    report(capsys, 1, "symmetric-dimension table", ok, f"{len(bad)} mismatches, {elapsed:.2f}s")
    assert ok


def test_criterion_02_arrow_operator_laws(capsys):
    t = time.perf_counter()
    cfg = VerifyConfig(n=4, seed=SEED, arrays=1000)
    checks = run_checks(suite_arrow_operators, [cfg], {"collapse-spread-roundtrip", "pairing-transfer"})
    elapsed = time.perf_counter() - t
    ok = all(c.passed for c in checks) and all(c.tolerance <= 1e-12 for c in checks) and elapsed < 5.0
    report(capsys, 2, "arrow-operator laws on 1000 arrays", ok, f"{summary(checks)}, {elapsed:.2f}s")
    assert ok


def grid_configs(**kw):
    return [VerifyConfig(n=n, m=2, k=k, seed=SEED, **kw) for n in (2, 3) for k in (2, 3)]


def test_criterion_03_exterior_jet(capsys):
    t = time.perf_counter()
    checks = run_checks(suite_exterior_jet, grid_configs(systems=20, points=100))
    elapsed = time.perf_counter() - t
    ok = all(c.passed for c in checks) and elapsed < 30.0
    report(capsys, 3, "exterior-jet identity, 20 systems x 100 points", ok, f"{summary(checks)}, {elapsed:.2f}s")
    assert ok


def test_criterion_04_dual_restriction(capsys):
    t = time.perf_counter()
    checks = run_checks(suite_duality, grid_configs(systems=20, points=100))
    elapsed = time.perf_counter() - t
    ok = all(c.passed for c in checks)
    report(capsys, 4, "dual-restriction identity", ok, f"{summary(checks)}, {elapsed:.2f}s")
    assert ok


def test_criterion_05_equilibrium(capsys):
    t = time.perf_counter()
    checks = run_checks(suite_equilibrium, grid_configs(systems=10, points=50))
    elapsed = time.perf_counter() - t
    ok = all(c.passed for c in checks)
    report(capsys, 5, "equilibrium biconditional", ok, f"{summary(checks)}, {elapsed:.2f}s")
    assert ok


def test_criterion_06_stokes_power_balance(capsys):
    t = time.perf_counter()
    configs = [
        VerifyConfig(n=n, m=2, k=k, seed=SEED, systems=3, tolerances={"quadrature": 1e-9})
        for n in (2, 3)
        for k in (1, 2, 3)
    ]
    checks = run_checks(suite_stokes, configs)
    elapsed = time.perf_counter() - t
    ok = all(c.passed for c in checks) and elapsed < 60.0
    report(capsys, 6, "three force functionals on unit box and simplex", ok, f"{summary(checks)}, {elapsed:.2f}s")
    assert ok


def test_criterion_07_covariance(capsys):
    t = time.perf_counter()
    configs = [VerifyConfig(n=2, m=2, k=k, seed=SEED, systems=5, points=10) for k in (1, 2, 3, 4)]
    configs.append(VerifyConfig(n=3, m=2, k=2, seed=SEED, systems=3, points=10))
    checks = run_checks(suite_covariance, configs)
    elapsed = time.perf_counter() - t
    ok = all(c.passed for c in checks) and all(c.tolerance <= 1e-9 for c in checks)
    report(capsys, 7, "covariance under a nonlinear chart", ok, f"{summary(checks)}, {elapsed:.2f}s")
    assert ok


def test_criterion_08_symmetry_non_invariance(capsys):
    t = time.perf_counter()
    checks = run_checks(suite_symmetry_example, [VerifyConfig(seed=SEED)])
    elapsed = time.perf_counter() - t
    asym = next(c for c in checks if c.name == "il-block-asymmetric").details["il_asymmetry"]
    ok = all(c.passed for c in checks) and asym > 1e-3 and elapsed < 5.0
    report(capsys, 8, "traction symmetry example", ok, f"tau^il asymmetry {asym:.3g}, {summary(checks)}, {elapsed:.2f}s")
    assert ok


def test_criterion_09_non_injectivity(capsys):
    t = time.perf_counter()
    checks = run_checks(suite_kernel, [VerifyConfig(n=2, m=1, k=2, seed=SEED, tolerances={"algebraic": 1e-14})])
    elapsed = time.perf_counter() - t
    ok = all(c.passed for c in checks)
    report(capsys, 9, "nonzero kernel element of the restriction, n = k = 2", ok, f"{summary(checks)}, {elapsed:.2f}s")
    assert ok


def test_criterion_10_constitutive_gradient(capsys):
    t = time.perf_counter()
    checks = run_checks(suite_constitutive, [VerifyConfig(n=2, m=2, k=2, seed=SEED, potentials=50)])
    elapsed = time.perf_counter() - t
    fd = next(c for c in checks if c.name == "potential-gradient-vs-differences")
    quad = next(c for c in checks if c.name == "quadratic-potential")
    ok = all(c.passed for c in checks) and fd.tolerance <= 1e-6 and quad.max_abs_residual == 0.0
    report(capsys, 10, "constitutive gradient vs central differences", ok, f"{summary(checks)}, {elapsed:.2f}s")
    assert ok


def test_criterion_11_euclidean_cross_check(capsys):
    t = time.perf_counter()
    checks = run_checks(suite_euclidean, [VerifyConfig(seed=SEED, systems=5, tolerances={"quadrature": 1e-9})])
    elapsed = time.perf_counter() - t
    ok = all(c.passed for c in checks)
    report(capsys, 11, "Euclidean n = 3, k = 2 integration by parts", ok, f"{summary(checks)}, {elapsed:.2f}s")
    assert ok
