"""Command line entry point: ``jetstress verify | example-symmetry | dims | export``."""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .chart import ChartError
from .randomdata import random_field, random_section
from .stresscore.fields import component_keys
from .stresscore.operators import var_stress_from_force_system
from .verify import ConfigError, VerifyConfig, dims_table, report_json_text, run_verify, symmetry_example

EXIT_OK, EXIT_FAIL, EXIT_PARSE = 0, 1, 2

EXPORT_KEYS = {"n", "m", "k", "seed", "degree", "grid", "fields"}


def _load_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc


def cmd_verify(args) -> int:
    data = _load_json(args.config) if args.config else {}
    if args.seed is not None:
        data = {**data, "seed": args.seed}
    if args.suite:
        data = {**data, "suites": args.suite}
    cfg = VerifyConfig.from_json(data)
    try:
        report = run_verify(cfg)
    except ChartError as exc:
        raise ConfigError(str(exc)) from exc
    for c in report.checks:
        mark = "PASS" if c.passed else "FAIL"
        print(f"{mark}  {c.suite:<18} {c.name:<40} {c.max_scaled_residual:.3e} <= {c.tolerance:g}", file=sys.stderr)
    text = report_json_text(report, timestamp=not args.no_timestamp)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    if not report.passed:
        print("failed: " + ", ".join(c.name for c in report.failed()), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_example_symmetry(args) -> int:
    ex = symmetry_example(tuple(args.point))
    if args.json:
        print(json.dumps(ex, indent=2, sort_keys=True))
    else:
        x = ex["point"]
        print(f"chart x'1 = x1 + (x2)^2, k = 4, tau' = 1 in every full-array entry, x = ({x[0]:g}, {x[1]:g})")
        labels = {3: "tau^{ijkl}", 2: "tau^{ijl}", 1: "tau^{il}", 0: "tau^{l}"}
        for r in (3, 2, 1, 0):
            arr = np.asarray(ex["k4"]["blocks"][str(r)])
            print(f"{labels[r]:<12} symmetry defect {ex['k4']['symmetry_defect'][str(r)]:.3e}")
            for idx in np.ndindex(arr.shape):
                print(f"    [{','.join(str(i + 1) for i in idx)}] {arr[idx]: .12g}")
        print(f"|tau^12 - tau^21| = {ex['k4']['il_asymmetry']:.12g}")
        for label, d in ex["k2"].items():
            print(f"k = 2, {label} tau': defect {d['source_defect']:.3e} -> {d['pushed_defect']:.3e}")
        for label, d in ex["controls"].items():
            print(f"{label} chart: largest defect {d:.3e}")
    ok = (
        ex["k4"]["symmetry_defect"]["3"] <= 1e-9
        and ex["k4"]["il_asymmetry"] > 1e-3
        and ex["k2"]["symmetric"]["pushed_defect"] <= 1e-9
        and ex["k2"]["non_symmetric"]["pushed_defect"] > 1e-3
        and max(ex["controls"].values()) <= 1e-9
    )
    return EXIT_OK if ok else EXIT_FAIL


def cmd_dims(args) -> int:
    rows = dims_table(args.n, args.l)
    print(f"{'n':>3} {'l':>3} {'enumerated':>11} {'closed form':>12}")
    ok = True
    for r in rows:
        ok &= r["enumerated"] == r["closed_form"]
        print(f"{r['n']:>3} {r['l']:>3} {r['enumerated']:>11} {r['closed_form']:>12}")
    return EXIT_OK if ok else EXIT_FAIL


def _grid(spec: dict, n: int) -> np.ndarray:
    lo = np.asarray(spec.get("lo", [0.0] * n), dtype=float)
    hi = np.asarray(spec.get("hi", [1.0] * n), dtype=float)
    shape = spec.get("shape", [2] * n)
    if lo.shape != (n,) or hi.shape != (n,) or len(shape) != n or any(int(s) < 1 for s in shape):
        raise ConfigError("grid needs lo, hi and shape of length n with positive counts")
    axes = [np.linspace(a, b, int(s)) if int(s) > 1 else np.array([0.5 * (a + b)]) for a, b, s in zip(lo, hi, shape)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.reshape(-1) for g in mesh], axis=1)


def export_fields(data: dict):
    """Resolve the export configuration into ``(X, columns, rows, manifest)``."""
    extra = set(data) - EXPORT_KEYS
    if extra:
        raise ConfigError(f"unknown export keys {sorted(extra)}")
    cfg = VerifyConfig.from_json({key: data[key] for key in ("n", "m", "k", "seed", "degree", "fields") if key in data})
    n, m, k = cfg.n, cfg.m, cfg.k
    rng = np.random.default_rng(cfg.seed)
    tau = cfg.given_field("tau", "traction") or random_field(rng, "traction", n, m, k, cfg.field_degree())
    b = cfg.given_field("b", "bodyforce") or random_field(rng, "bodyforce", n, m, k, cfg.field_degree())
    w = cfg.given_section() or random_section(rng, n, m, k + 2)
    S = var_stress_from_force_system(b, tau)
    X = _grid(data.get("grid", {}), n)
    columns = [f"x{i + 1}" for i in range(n)]
    blocks = [X]
    for f in (b, tau, S):
        columns += [key["key"] for key in component_keys(f.kind, n, m, k)]
        blocks.append(f.values_batch(X))
    Sv = blocks[-1]
    power = np.sum(Sv * w.jet_batch(X, k).reshape(len(X), -1), axis=1)
    columns.append("power")
    blocks.append(power[:, None])
    table = np.hstack(blocks)
    manifest = {
        "n": n,
        "m": m,
        "k": k,
        "seed": cfg.seed,
        "rows": int(len(X)),
        "columns": columns,
        "power": "S . j^k w with S the variational stress of (b, tau)",
        "fields": {
            "tau": tau.map.to_json() if hasattr(tau.map, "to_json") else None,
            "b": b.map.to_json() if hasattr(b.map, "to_json") else None,
            "w": w.to_json(),
        },
        "files": ["samples.csv"],
    }
    return X, columns, table, manifest


def cmd_export(args) -> int:
    data = _load_json(args.config) if args.config else {}
    _, columns, table, manifest = export_fields(data)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "samples.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in table:
            writer.writerow([repr(float(v)) for v in row])
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(f"wrote {len(table)} rows to {out / 'samples.csv'}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jetstress", description="k-jet hyper-stress calculus and identity checks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run identity suites and print a JSON report")
    p.add_argument("--config", help="VerifyConfig JSON file")
    p.add_argument("--suite", action="append", help="suite to run (repeatable)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--no-timestamp", action="store_true", help="omit the timestamp for byte-stable reports")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("example-symmetry", help="traction symmetry under x'1 = x1 + (x2)^2")
    p.add_argument("--point", type=float, nargs=2, default=[0.3, 0.7])
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_example_symmetry)

    p = sub.add_parser("dims", help="symmetric multi-index counts")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--l", type=int, default=4)
    p.set_defaults(func=cmd_dims)

    p = sub.add_parser("export", help="sample fields on a grid to CSV")
    p.add_argument("--config", help="export JSON file")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
