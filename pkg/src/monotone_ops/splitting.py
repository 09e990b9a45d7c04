"""Two-operator splitting schemes for (F + G)(x) = 0.

Forward-backward alternates an explicit step on F with a resolvent step on
G; Peaceman-Rachford and Douglas-Rachford compose the two reflected
resolvents on an auxiliary variable z, reading the primal iterate out through
``x = J_{alpha G}(z)``.  All three report the residual ``||F(x) + G(x)||`` in
the problem norm when G can be evaluated directly, falling back to the
method's own fixed-point gap when it cannot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .norms import L2, WeightedNorm, vector_norm
from .operators import Certificate, OperatorSpec
from .resolvent import resolvent
from .zerofind import IterationTrace, SolverConfig, _open_step_limit


@dataclass(frozen=True, eq=False)
class SplitProblem:
    """Operator pair (F, G) with certificates in a shared norm.

    G must be certified monotone; its resolvent is the one assumed cheap
    (closed-form prox, affine solve, or inner iteration, resolved by the
    routing in :func:`monotone_ops.resolvent.resolvent`).
    """

    f_op: OperatorSpec
    f_cert: Certificate
    g_op: OperatorSpec
    g_cert: Certificate
    norm: WeightedNorm

    def __post_init__(self):
        if self.f_cert.norm != self.norm or self.g_cert.norm != self.norm:
            raise ValueError("both certificates must be stated in the problem norm")
        if self.g_cert.c < 0:
            raise ValueError("G must be certified monotone (c >= 0)")
        if self.f_op.dim != self.g_op.dim:
            raise ValueError("operator dimensions disagree")

    @property
    def dim(self) -> int:
        return self.f_op.dim

    def step_limit(self) -> float:
        """min(1/diag_l(F), 1/diag_l(G)), the shared guaranteed step bound."""
        return min(self.f_cert.step_limit(), self.g_cert.step_limit())

    def residual(self, x, rcfg, alpha: float) -> float:
        """||F(x) + G(x)|| when G evaluates; else the forward-backward gap."""
        fx = self.f_op.evaluate(x)
        if self.g_op.fn is not None:
            return vector_norm(fx + self.g_op.evaluate(x), self.norm)
        gap = x - resolvent(self.g_op, self.g_cert, x - alpha * fx, rcfg)
        return vector_norm(gap, self.norm)


def forward_backward(p: SplitProblem, x0, cfg: SolverConfig, averaged: bool = False) -> IterationTrace:
    """Iterate x <- J_{alpha G}(x - alpha F(x)), optionally with 1/2 averaging.

    The plain iteration carries a guarantee only for strongly monotone F
    (factor 1 - alpha c_F, alpha strictly below 1/diag_l(F)); for weakly
    monotone F the averaged form must be requested, since the composition of
    the two nonexpansive half-steps need not be averaged in these norms.
    """
    if not averaged and p.f_cert.c <= 0:
        raise ValueError("plain forward-backward requires strongly monotone F; "
                         "use averaged=True for the weakly monotone case")
    alpha = cfg.alpha
    admissible = (alpha <= _open_step_limit(p.f_cert)
                  and p.norm.kind != L2 and p.f_cert.c >= 0)
    rcfg = cfg.resolve_config()
    trace = IterationTrace(
        method="forward_backward_averaged" if averaged else "forward_backward",
        alpha=alpha,
        iterates=[] if cfg.record_iterates else None,
        theoretical_factor=(1.0 - alpha * p.f_cert.c) if p.f_cert.c > 0 else None,
        alpha_admissible=admissible)

    x = np.asarray(x0, dtype=float).copy()
    if trace.iterates is not None:
        trace.iterates.append(x.copy())
    for _ in range(cfg.max_iters + 1):
        res = p.residual(x, rcfg, alpha)
        trace.residuals.append(res)
        if res <= cfg.tol:
            trace.converged = True
            break
        if len(trace.residuals) > cfg.max_iters:
            break
        x_next = resolvent(p.g_op, p.g_cert, x - alpha * p.f_op.evaluate(x), rcfg)
        if averaged:
            x_next = 0.5 * x + 0.5 * x_next
        x = x_next
        if trace.iterates is not None:
            trace.iterates.append(x.copy())
    trace.final_x = x
    return trace


def _reflect_iteration(p: SplitProblem, z0, cfg: SolverConfig, douglas: bool) -> IterationTrace:
    """Shared driver for Peaceman-Rachford and Douglas-Rachford.

    One pass computes x_half = J_G(z), z_half = 2 x_half - z,
    x_next = J_F(z_half), then updates z by reflection (PR) or by the
    averaged correction z + x_next - x_half (DR).  The DR update is grouped
    as (x_next - z_half) + x_half so that a literally-identity J_F cancels
    exactly and the iteration collapses to the proximal point method in
    floating point, not just in exact arithmetic.
    """
    alpha = cfg.alpha
    c = p.f_cert.c
    pr_factor = (1.0 - alpha * c) / (1.0 + alpha * c)
    if douglas:
        method = "douglas_rachford"
        factor = 0.5 * (1.0 + pr_factor) if c > 0 else None
        admissible = alpha <= p.step_limit() and p.norm.kind != L2 and p.f_cert.c >= 0
    else:
        method = "peaceman_rachford"
        factor = pr_factor
        admissible = (alpha <= p.step_limit() and p.norm.kind != L2
                      and p.f_cert.strongly_monotone)
    rcfg = cfg.resolve_config()
    trace = IterationTrace(
        method=method, alpha=alpha,
        iterates=[] if cfg.record_iterates else None,
        z_iterates=[] if cfg.record_iterates else None,
        theoretical_factor=factor,
        alpha_admissible=admissible)

    z = np.asarray(z0, dtype=float).copy()
    x_half = None
    for _ in range(cfg.max_iters + 1):
        if trace.z_iterates is not None:
            trace.z_iterates.append(z.copy())
        x_half = resolvent(p.g_op, p.g_cert, z, rcfg)
        if trace.iterates is not None:
            trace.iterates.append(x_half.copy())
        res = p.residual(x_half, rcfg, alpha)
        trace.residuals.append(res)
        if res <= cfg.tol:
            trace.converged = True
            break
        if len(trace.residuals) > cfg.max_iters:
            break
        z_half = 2.0 * x_half - z
        x_next = resolvent(p.f_op, p.f_cert, z_half, rcfg)
        if douglas:
            z = (x_next - z_half) + x_half
        else:
            z = 2.0 * x_next - z_half
    trace.final_x = x_half
    trace.z_final = z
    return trace


def peaceman_rachford(p: SplitProblem, z0, cfg: SolverConfig) -> IterationTrace:
    """Peaceman-Rachford splitting: z <- R_{alpha F}(R_{alpha G}(z)).

    Reports x_k = J_{alpha G}(z_k).  Guaranteed for strongly monotone F with
    alpha <= min(1/diag_l(F), 1/diag_l(G)); factor (1 - alpha c)/(1 + alpha c).
    """
    return _reflect_iteration(p, z0, cfg, douglas=False)


def douglas_rachford(p: SplitProblem, z0, cfg: SolverConfig) -> IterationTrace:
    """Douglas-Rachford splitting, the 1/2-averaged Peaceman-Rachford map.

    Converges for merely monotone F (and G) on the same step range; the
    reported factor 0.5 (1 + (1 - alpha c)/(1 + alpha c)) bounds the
    contraction of the auxiliary z sequence in the strongly monotone case.
    """
    return _reflect_iteration(p, z0, cfg, douglas=True)
