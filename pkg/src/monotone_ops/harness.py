"""Seeded benchmark: instance generation, log-norm-ball projection, runs, export.

The benchmark draws a random recurrent network (Gaussian weights, standard
deviations 1/sqrt(n) and 1/sqrt(m)), projects the recurrence matrix onto the
polytope ``{A : mu_inf(A) <= rho}`` so the contraction certificate holds, and
races the equilibrium-finding iterations from the origin, exporting residual
traces as CSV or JSON.

Sampling uses ``numpy.random.Generator.normal`` (PCG64 stream, ziggurat
normal sampler), so a seed pins the instance bit-for-bit across runs of this
package; the metadata block echoes the convention that the quoted Gaussian
spreads are standard deviations.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .norms import WeightedNorm, log_norm
from .rnn import (
    RnnParams,
    forward_backward_limit,
    forward_step_limit,
    peaceman_rachford_limit,
    rnn_certificate,
    rnn_douglas_rachford,
    rnn_forward_backward,
    rnn_forward_step,
    rnn_operator,
    rnn_peaceman_rachford,
)
from .zerofind import IterationTrace, SolverConfig, cayley_solve, proximal_point_solve

METHODS = ("forward", "fb", "pr", "dr", "prox", "cayley")
DEFAULT_METHODS = ("forward", "fb", "pr")


@dataclass(frozen=True)
class BenchmarkConfig:
    """Everything that determines one benchmark run.

    The seed fully determines the instance.  ``alphas`` maps method names to
    step-size overrides; a method without an override runs at its largest
    theoretically admissible step ("pr" without an override additionally runs
    at the forward-step step size, reproducing the two published curves).
    """

    seed: int = 42
    n: int = 200
    m: int = 50
    a: float = 0.1
    rho: float = 0.99
    methods: Sequence[str] = DEFAULT_METHODS
    alphas: Dict[str, float] = field(default_factory=dict)
    tol: float = 1e-10
    max_iters: int = 200_000
    out_path: Optional[str] = None
    format: str = "csv"

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError("n and m must be positive")
        if self.rho <= 0:
            raise ValueError("rho must be positive")
        if self.format not in ("csv", "json"):
            raise ValueError("format must be 'csv' or 'json'")
        for name in self.methods:
            if name not in METHODS:
                raise ValueError(f"unknown method {name!r}; choose from {METHODS}")
        for name in self.alphas:
            if name not in METHODS:
                raise ValueError(f"alpha override for unknown method {name!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "BenchmarkConfig":
        known = {f.name for f in cls.__dataclass_fields__.values()}
        unknown = set(d) - set(known)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


def project_log_norm_ball(A, rho: float) -> np.ndarray:
    """Entrywise least-squares projection onto {A : mu_inf(A) <= rho}.

    The constraint decomposes by rows: row i must satisfy
    ``a_ii + sum_{j != i} |a_ij| <= rho``.  Each violated row is corrected by
    the unique dual multiplier lambda >= 0 that shifts the diagonal entry by
    -lambda, soft-thresholds the off-diagonal entries by lambda, and makes
    the constraint active; lambda is found exactly by walking the sorted
    breakpoints of the piecewise-linear dual function.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("A must be square")
    out = A.copy()
    n = A.shape[0]
    for i in range(n):
        out[i] = _project_row(A[i], i, rho)
    return out


def _project_row(row: np.ndarray, d: int, rho: float) -> np.ndarray:
    off = np.abs(np.delete(row, d))
    margin = row[d] + off.sum() - rho
    if margin <= 0.0:
        return row
    lam = _row_multiplier(row[d], off, rho)
    new = np.sign(row) * np.maximum(np.abs(row) - lam, 0.0)
    new[d] = row[d] - lam
    return new


def _row_multiplier(diag: float, off: np.ndarray, rho: float) -> float:
    """Root of h(lam) = (diag - lam) + sum max(|off| - lam, 0) - rho.

    h is strictly decreasing and piecewise linear with breakpoints at the
    sorted |off|; on the segment where k off-diagonal entries are still
    active the slope is -(1 + k).
    """
    b = np.sort(off)
    m = b.size
    # Candidate root on the segment [b[k-1], b[k]] (b[-1] := 0, b[m] := inf):
    # active count is m - k, active sum is the tail sum.
    tail = np.concatenate((np.cumsum(b[::-1])[::-1], [0.0]))
    for k in range(m + 1):
        lo = 0.0 if k == 0 else b[k - 1]
        hi = np.inf if k == m else b[k]
        lam = (diag + tail[k] - rho) / (1.0 + (m - k))
        if lo <= lam <= hi:
            return float(max(lam, 0.0))
    # Unreachable for infeasible rows: the last segment always brackets.
    return float(max(diag - rho, 0.0))


def generate_instance(cfg: BenchmarkConfig) -> RnnParams:
    """Draw the seeded random network and project A onto the log-norm ball.

    Entries of A, B, b are normal with standard deviation 1/sqrt(n) and u
    with standard deviation 1/sqrt(m); eta is fixed at the all-ones vector.
    """
    rng = np.random.default_rng(cfg.seed)
    sd_n = 1.0 / np.sqrt(cfg.n)
    sd_m = 1.0 / np.sqrt(cfg.m)
    A = rng.normal(0.0, sd_n, size=(cfg.n, cfg.n))
    B = rng.normal(0.0, sd_n, size=(cfg.n, cfg.m))
    b = rng.normal(0.0, sd_n, size=cfg.n)
    u = rng.normal(0.0, sd_m, size=cfg.m)
    A = project_log_norm_ball(A, cfg.rho)
    return RnnParams(A=A, B=B, b=b, u=u, a=cfg.a, eta=np.ones(cfg.n))


def default_alphas(p: RnnParams) -> Dict[str, float]:
    """Largest theoretically admissible step per method for this instance."""
    fb = forward_backward_limit(p)
    return {
        "forward": fb,
        "fb": fb,
        "pr": peaceman_rachford_limit(p),
        "dr": peaceman_rachford_limit(p),
        "prox": fb,
        "cayley": forward_step_limit(p),
    }


def _solver_config(cfg: BenchmarkConfig, alpha: float) -> SolverConfig:
    return SolverConfig(alpha=alpha, tol=cfg.tol, max_iters=cfg.max_iters)


def run_benchmark(cfg: BenchmarkConfig, instance: Optional[RnnParams] = None) -> List[IterationTrace]:
    """Generate (or accept) the instance and run every requested method.

    All methods start from the origin (both x0 and the splitting auxiliary
    z0).  Without a step override, "pr" contributes two traces: one at its
    admissible limit a/(1-a) and one at the forward-step step size, which is
    deliberately beyond the proven range.
    """
    p = generate_instance(cfg) if instance is None else instance
    x0 = np.zeros(p.n)
    defaults = default_alphas(p)
    traces: List[IterationTrace] = []
    for name in cfg.methods:
        if name == "pr" and name not in cfg.alphas:
            pairs = [("pr", defaults["pr"]), ("pr", defaults["forward"])]
        else:
            pairs = [(name, cfg.alphas.get(name, defaults[name]))]
        for label, alpha in pairs:
            start = time.perf_counter()
            trace = _run_method(p, label, alpha, cfg, x0)
            trace.wall_time = time.perf_counter() - start
            trace.method = label
            traces.append(trace)
    return traces


def _run_method(p: RnnParams, name: str, alpha: float, cfg: BenchmarkConfig, x0) -> IterationTrace:
    scfg = _solver_config(cfg, alpha)
    if name == "forward":
        return rnn_forward_step(p, x0, alpha, scfg)
    if name == "fb":
        return rnn_forward_backward(p, x0, alpha, scfg)
    if name == "pr":
        return rnn_peaceman_rachford(p, x0, alpha, scfg)
    if name == "dr":
        return rnn_douglas_rachford(p, x0, alpha, scfg)
    op = rnn_operator(p)
    cert, _ = rnn_certificate(p)
    if name == "prox":
        return proximal_point_solve(op, cert, x0, scfg)
    if name == "cayley":
        return cayley_solve(op, cert, x0, scfg, averaged=False)
    raise ValueError(f"unknown method {name!r}")


def trace_metadata(cfg: BenchmarkConfig, p: RnnParams) -> dict:
    """Instance-level facts echoed into JSON exports."""
    cert, gamma = rnn_certificate(p)
    return {
        "seed": cfg.seed,
        "n": cfg.n,
        "m": cfg.m,
        "a": cfg.a,
        "rho": cfg.rho,
        "tol": cfg.tol,
        "max_iters": cfg.max_iters,
        "gamma": gamma,
        "monotonicity_parameter": cert.c,
        "mu_2_of_A": log_norm(np.asarray(p.A), WeightedNorm.l2(p.n)),
        "gaussian_spread_convention": "standard deviation",
        "normal_sampler": "numpy Generator.normal (PCG64, ziggurat)",
    }


def export_traces(traces: Sequence[IterationTrace], path: str, format: str = "csv",
                  metadata: Optional[dict] = None) -> None:
    """Write traces to ``path`` as CSV (method,alpha,iter,residual) or JSON."""
    if format == "csv":
        with open(path, "w") as fh:
            fh.write("method,alpha,iter,residual\n")
            for t in traces:
                for k, r in enumerate(t.residuals):
                    fh.write(f"{t.method},{t.alpha!r},{k},{r:.17e}\n")
    elif format == "json":
        payload = {
            "metadata": metadata or {},
            "traces": [_trace_dict(t) for t in traces],
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=1)
            fh.write("\n")
    else:
        raise ValueError("format must be 'csv' or 'json'")


def _trace_dict(t: IterationTrace) -> dict:
    return {
        "method": t.method,
        "alpha": t.alpha,
        "converged": t.converged,
        "iterations": t.n_iters,
        "theoretical_factor": t.theoretical_factor,
        "alpha_admissible": t.alpha_admissible,
        "wall_time_s": t.wall_time,
        "final_x": None if t.final_x is None else [float(v) for v in t.final_x],
        "residuals": [float(r) for r in t.residuals],
    }


def load_traces(path: str) -> List[IterationTrace]:
    """Read back a JSON export; inverse of :func:`export_traces` (JSON only)."""
    with open(path) as fh:
        payload = json.load(fh)
    traces = []
    for d in payload["traces"]:
        t = IterationTrace(method=d["method"], alpha=d["alpha"],
                           residuals=[float(r) for r in d["residuals"]],
                           converged=d["converged"],
                           theoretical_factor=d["theoretical_factor"],
                           alpha_admissible=d["alpha_admissible"])
        t.wall_time = d.get("wall_time_s")
        if d.get("final_x") is not None:
            t.final_x = np.asarray(d["final_x"], dtype=float)
        traces.append(t)
    return traces
