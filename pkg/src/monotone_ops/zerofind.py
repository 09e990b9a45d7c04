"""Single-operator zero-finding iterations with convergence tracking.

Implements the forward step ``x - alpha F(x)``, proximal point ``J_{alpha F}``,
and Cayley ``R_{alpha F}`` fixed-point iterations, plus a generic
Krasnosel'skii-Mann loop for nonexpansive self-maps.  Every solver returns an
:class:`IterationTrace` holding per-iteration residuals, the convergence flag,
and the theoretical per-step contraction factor implied by the certificate.

Step sizes outside the guaranteed range are allowed (some experiments need
them) but the trace is flagged and a warning is emitted.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .norms import L2, WeightedNorm, vector_norm
from .operators import Certificate, OperatorSpec
from .resolvent import ResolveConfig, resolvent

# Slack used to enforce strict interiority of open step-size intervals.
_OPEN_INTERVAL_SLACK = 1e-9


@dataclass(frozen=True)
class SolverConfig:
    """Step size, averaging weight, stopping rule, and inner-solve settings."""

    alpha: float
    theta: float = 0.5
    tol: float = 1e-10
    max_iters: int = 1_000_000
    record_iterates: bool = False
    inner_tol: float = 1e-12
    inner_max_iters: int = 100_000
    inner_step: Optional[float] = None

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if not 0.0 < self.theta < 1.0:
            raise ValueError("theta must lie strictly between 0 and 1")
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")
        if self.max_iters < 1:
            raise ValueError("iteration cap must be positive")

    def resolve_config(self) -> ResolveConfig:
        return ResolveConfig(alpha=self.alpha, inner_tol=self.inner_tol,
                             inner_max_iters=self.inner_max_iters,
                             inner_step=self.inner_step)


@dataclass
class IterationTrace:
    """Per-iteration record of one solve.

    ``residuals[k]`` is the stopping residual at iterate k (so the list has
    one more entry than the number of steps taken); ``converged`` implies the
    last residual is below the configured tolerance.  ``theoretical_factor``
    is the certificate-implied per-step contraction bound, when one exists.
    ``alpha_admissible`` records whether the step size carried a guarantee.
    """

    method: str
    alpha: float
    residuals: List[float] = field(default_factory=list)
    iterates: Optional[List[np.ndarray]] = None
    converged: bool = False
    final_x: Optional[np.ndarray] = None
    theoretical_factor: Optional[float] = None
    alpha_admissible: bool = True
    km_bounds: Optional[List[float]] = None
    z_final: Optional[np.ndarray] = None
    z_iterates: Optional[List[np.ndarray]] = None
    wall_time: Optional[float] = None

    @property
    def n_iters(self) -> int:
        return max(len(self.residuals) - 1, 0)

    def iterations_to(self, level: float) -> Optional[int]:
        """First iteration index whose residual is at or below ``level``."""
        for k, r in enumerate(self.residuals):
            if r <= level:
                return k
        return None

    def measured_factor(self, last: int = 100) -> float:
        """Geometric mean of successive residual ratios over the last steps."""
        r = np.asarray(self.residuals, dtype=float)
        r = r[r > 0.0]
        if r.size < 2:
            return 0.0
        r = r[-(last + 1):]
        return float(np.exp(np.mean(np.diff(np.log(r)))))


def _weighted_kind(nrm: WeightedNorm) -> bool:
    return nrm.kind != L2


def _open_step_limit(cert: Certificate) -> float:
    """Enforced right end of the open interval ]0, 1/diag_l[."""
    if cert.diag_l <= 0:
        return math.inf
    return (1.0 - _OPEN_INTERVAL_SLACK) / cert.diag_l


def _flag_step(method: str, admissible: bool, alpha: float, reason: str) -> bool:
    if not admissible:
        warnings.warn(
            f"{method}: step size alpha={alpha:g} is outside the guaranteed "
            f"range ({reason}); running without a convergence guarantee",
            UserWarning, stacklevel=3)
    return admissible


def _run_fixed_point(step, residual_of, x0, cfg: SolverConfig, trace: IterationTrace) -> IterationTrace:
    """Drive x <- step(x) until residual_of(x) <= tol or the cap is reached.

    ``residual_of`` may reuse work by returning (residual, payload); the
    payload is handed to ``step``.
    """
    x = np.asarray(x0, dtype=float).copy()
    if trace.iterates is not None:
        trace.iterates.append(x.copy())
    for _ in range(cfg.max_iters + 1):
        res, payload = residual_of(x)
        trace.residuals.append(res)
        if res <= cfg.tol:
            trace.converged = True
            break
        if len(trace.residuals) > cfg.max_iters:
            break
        x = step(x, payload)
        if trace.iterates is not None:
            trace.iterates.append(x.copy())
    trace.final_x = x
    return trace


def forward_step_solve(op: OperatorSpec, cert: Certificate, x0, cfg: SolverConfig) -> IterationTrace:
    """Iterate x <- x - alpha F(x) until ||F(x)|| <= tol in the certificate norm.

    Guaranteed range: alpha <= 1/diag_l for strongly monotone operators,
    strictly below 1/diag_l for weakly monotone ones; both require a weighted
    l1/linf certificate.  theoretical_factor is 1 - alpha c.
    """
    alpha = cfg.alpha
    if cert.strongly_monotone:
        ok = alpha <= cert.step_limit()
    else:
        ok = alpha <= _open_step_limit(cert)
    ok = ok and _weighted_kind(cert.norm)
    admissible = _flag_step("forward step", ok, alpha,
                            "requires a weighted l1/linf certificate and alpha within 1/diag_l")
    trace = IterationTrace(
        method="forward_step", alpha=alpha,
        iterates=[] if cfg.record_iterates else None,
        theoretical_factor=1.0 - alpha * cert.c,
        alpha_admissible=admissible)

    def residual_of(x):
        f = op.evaluate(x)
        return vector_norm(f, cert.norm), f

    def step(x, f):
        return x - alpha * f

    return _run_fixed_point(step, residual_of, x0, cfg, trace)


def proximal_point_solve(op: OperatorSpec, cert: Certificate, x0, cfg: SolverConfig) -> IterationTrace:
    """Iterate x <- J_{alpha F}(x); admissible for every alpha > 0.

    theoretical_factor is 1/(1 + alpha c); for weakly monotone operators the
    convergence guarantee additionally needs a weighted l1/linf certificate.
    """
    if cert.c < 0:
        raise ValueError("proximal point requires a monotone certificate")
    ok = cert.strongly_monotone or _weighted_kind(cert.norm)
    admissible = _flag_step("proximal point", ok, cfg.alpha,
                            "weakly monotone case requires a weighted l1/linf certificate")
    rcfg = cfg.resolve_config()
    trace = IterationTrace(
        method="proximal_point", alpha=cfg.alpha,
        iterates=[] if cfg.record_iterates else None,
        theoretical_factor=1.0 / (1.0 + cfg.alpha * cert.c),
        alpha_admissible=admissible)

    def residual_of(x):
        return vector_norm(op.evaluate(x), cert.norm), None

    def step(x, _):
        return resolvent(op, cert, x, rcfg)

    return _run_fixed_point(step, residual_of, x0, cfg, trace)


def cayley_solve(op: OperatorSpec, cert: Certificate, x0, cfg: SolverConfig,
                 averaged: bool = False) -> IterationTrace:
    """Iterate the Cayley operator x <- 2 J_{alpha F}(x) - x, optionally averaged.

    The un-averaged iteration requires strong monotonicity and
    alpha <= 1/diag_l; its factor is (1 - alpha c)/(1 + alpha c).  The
    averaged variant (weight 1/2 on the identity) collapses algebraically to
    the proximal point iteration, is run as such, and is admissible for any
    monotone certificate and any alpha.
    """
    rcfg = cfg.resolve_config()
    if averaged:
        if cert.c < 0:
            raise ValueError("averaged Cayley requires a monotone certificate")
        ok = cert.strongly_monotone or _weighted_kind(cert.norm)
        admissible = _flag_step("averaged Cayley", ok, cfg.alpha,
                                "weakly monotone case requires a weighted l1/linf certificate")
        trace = IterationTrace(
            method="cayley_averaged", alpha=cfg.alpha,
            iterates=[] if cfg.record_iterates else None,
            theoretical_factor=1.0 / (1.0 + cfg.alpha * cert.c),
            alpha_admissible=admissible)

        def step(x, _):
            # (x + R(x))/2 == J(x) exactly; taking the resolvent step keeps
            # the sequence bit-identical to proximal_point_solve.
            return resolvent(op, cert, x, rcfg)
    else:
        if not cert.strongly_monotone:
            raise ValueError("un-averaged Cayley iteration requires strong monotonicity (c > 0)")
        ok = cfg.alpha <= cert.step_limit() and _weighted_kind(cert.norm)
        admissible = _flag_step("Cayley", ok, cfg.alpha,
                                "requires a weighted l1/linf certificate and alpha within 1/diag_l")
        trace = IterationTrace(
            method="cayley", alpha=cfg.alpha,
            iterates=[] if cfg.record_iterates else None,
            theoretical_factor=(1.0 - cfg.alpha * cert.c) / (1.0 + cfg.alpha * cert.c),
            alpha_admissible=admissible)

        def step(x, _):
            return 2.0 * resolvent(op, cert, x, rcfg) - x

    def residual_of(x):
        return vector_norm(op.evaluate(x), cert.norm), None

    return _run_fixed_point(step, residual_of, x0, cfg, trace)


def km_iterate(T: OperatorSpec, theta: float, x0, cfg: SolverConfig,
               nrm: WeightedNorm, x_star=None) -> IterationTrace:
    """Krasnosel'skii-Mann iteration x <- (1 - theta) x + theta T(x).

    T must be nonexpansive in ``nrm`` with a fixed point; this is asserted by
    the caller, not checked.  Residuals are the fixed-point gaps
    ``||x - T(x)||``.  When a reference fixed point is supplied, the trace
    also records the O(1/sqrt(k)) gap bound
    ``2 ||x0 - x*|| / sqrt(k pi theta (1 - theta))`` for each k >= 1.
    """
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must lie strictly between 0 and 1")
    trace = IterationTrace(
        method="krasnoselskii_mann", alpha=math.nan,
        iterates=[] if cfg.record_iterates else None)

    def residual_of(x):
        tx = T.evaluate(x)
        return vector_norm(x - tx, nrm), tx

    def step(x, tx):
        return (1.0 - theta) * x + theta * tx

    trace = _run_fixed_point(step, residual_of, x0, cfg, trace)
    if x_star is not None:
        d0 = vector_norm(np.asarray(x0, dtype=float) - np.asarray(x_star, dtype=float), nrm)
        trace.km_bounds = [
            2.0 * d0 / math.sqrt(k * math.pi * theta * (1.0 - theta))
            for k in range(1, len(trace.residuals))
        ]
    return trace
