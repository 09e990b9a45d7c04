"""Command line front end for the equilibrium benchmark.

Runs the seeded random-network benchmark and writes residual traces, or
verifies the worked 2x2 resolvent example with ``--example22``.  Exit codes:
0 success, 1 usage or I/O error, 2 when a run with a guaranteed-admissible
step fails to converge (or the example verification mismatches).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

import numpy as np

from .harness import (
    METHODS,
    BenchmarkConfig,
    export_traces,
    generate_instance,
    run_benchmark,
    trace_metadata,
)
from .norms import WeightedNorm, induced_norm
from .resolvent import resolvent_affine


class _Parser(argparse.ArgumentParser):
    """argparse defaults to exit code 2 on usage errors; this CLI reserves 2
    for convergence failures and reports usage problems with 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        sys.exit(1)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="monotone-bench",
        description="Random recurrent-network equilibrium benchmark "
                    "(forward step, forward-backward, Peaceman-Rachford, and friends).")
    p.add_argument("--config", help="JSON file with BenchmarkConfig fields; flags override")
    p.add_argument("--seed", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--a", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--methods", help=f"comma-separated subset of {','.join(METHODS)}")
    p.add_argument("--alpha", action="append", default=[], metavar="METHOD=VALUE",
                   help="step-size override, repeatable (e.g. --alpha pr=0.5)")
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iters", type=int, dest="max_iters")
    p.add_argument("--out", dest="out_path", help="output path for traces")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--example22", action="store_true",
                   help="verify the worked 2x2 resolvent example and exit")
    return p


def _config_from_args(args) -> BenchmarkConfig:
    base = {}
    if args.config:
        with open(args.config) as fh:
            base = json.load(fh)
    cfg = BenchmarkConfig.from_dict(base)
    updates = {}
    for name in ("seed", "n", "m", "a", "rho", "tol", "max_iters", "out_path", "format"):
        val = getattr(args, name)
        if val is not None:
            updates[name] = val
    if args.methods is not None:
        updates["methods"] = tuple(s.strip() for s in args.methods.split(",") if s.strip())
    overrides = dict(cfg.alphas)
    for spec in args.alpha:
        if "=" not in spec:
            raise ValueError(f"--alpha expects METHOD=VALUE, got {spec!r}")
        name, val = spec.split("=", 1)
        overrides[name.strip()] = float(val)
    if overrides:
        updates["alphas"] = overrides
    return dataclasses.replace(cfg, **updates) if updates else cfg


def run_example22() -> int:
    """Check the analytic 2x2 resolvent/reflection matrices and their norms."""
    A = np.array([[2.0, -2.0], [1.0, 1.0]])
    inf2 = WeightedNorm.linf(np.ones(2))
    expected = {
        1.0: (np.array([[0.25, 0.25], [-0.125, 0.375]]),
              np.array([[-0.5, 0.5], [-0.25, -0.25]]),
              0.5, 1.0),
        2.0: (np.array([[3, 4], [-2, 5]]) / 23.0,
              np.array([[-17, 8], [-4, -13]]) / 23.0,
              7.0 / 23.0, 25.0 / 23.0),
    }
    ok = True
    for alpha, (J_exact, R_exact, lip_j, lip_r) in expected.items():
        J = np.column_stack([resolvent_affine(A, None, alpha, e) for e in np.eye(2)])
        R = 2.0 * J - np.eye(2)
        checks = [
            (f"J(alpha={alpha:g})", J, J_exact),
            (f"R(alpha={alpha:g})", R, R_exact),
        ]
        for label, got, want in checks:
            good = np.allclose(got, want, atol=1e-12, rtol=0.0)
            ok &= good
            print(f"{label}: computed {np.array2string(got, precision=10)} "
                  f"expected {np.array2string(want, precision=10)} "
                  f"[{'ok' if good else 'MISMATCH'}]")
        for label, mat, want in ((f"Lip(J, alpha={alpha:g})", J, lip_j),
                                 (f"Lip(R, alpha={alpha:g})", R, lip_r)):
            got = induced_norm(mat, inf2)
            good = abs(got - want) <= 1e-12
            ok &= good
            print(f"{label}: computed {got:.12f} expected {want:.12f} "
                  f"[{'ok' if good else 'MISMATCH'}]")
    print("example22:", "all checks passed" if ok else "MISMATCH DETECTED")
    return 0 if ok else 2


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.example22:
        return run_example22()
    try:
        cfg = _config_from_args(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    instance = generate_instance(cfg)
    traces = run_benchmark(cfg, instance=instance)
    meta = trace_metadata(cfg, instance)
    print(f"instance: n={cfg.n} m={cfg.m} seed={cfg.seed} gamma={meta['gamma']:.6f} "
          f"mu2(A)={meta['mu_2_of_A']:.6f} (reported, not asserted)")
    failed_guaranteed = False
    for t in traces:
        status = "converged" if t.converged else "NOT CONVERGED"
        flag = "" if t.alpha_admissible else " [outside guaranteed range]"
        factor = "-" if t.theoretical_factor is None else f"{t.theoretical_factor:.6f}"
        print(f"{t.method:>8s} alpha={t.alpha:<10.6g} iters={t.n_iters:<7d} "
              f"final={t.residuals[-1]:.3e} factor<={factor} {status}{flag}")
        if t.alpha_admissible and not t.converged:
            failed_guaranteed = True
    if cfg.out_path:
        try:
            export_traces(traces, cfg.out_path, cfg.format, metadata=meta)
        except OSError as exc:
            print(f"error: cannot write {cfg.out_path}: {exc}", file=sys.stderr)
            return 1
        print(f"wrote {cfg.format} traces to {cfg.out_path}")
    return 2 if failed_guaranteed else 0


if __name__ == "__main__":
    sys.exit(main())
