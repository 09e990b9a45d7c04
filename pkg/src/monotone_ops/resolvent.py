"""Resolvents, reflected resolvents, and the built-in proximal operator.

The resolvent of ``alpha * F`` is the inverse map ``(Id + alpha F)^{-1}``; its
fixed points are exactly the zeros of F.  For affine operators it is a dense
linear solve.  For general monotone operators it is computed by an inner
forward-step iteration on the shifted map ``x -> x + alpha F(x) - u``, which
is strongly monotone with parameter ``1 + alpha c`` and therefore yields a
linearly convergent inner loop with an explicitly known factor.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .norms import vector_norm
from .operators import Certificate, OperatorSpec


class ConvergenceError(RuntimeError):
    """An iterative solve hit its iteration cap before reaching tolerance."""


@dataclass(frozen=True)
class ResolveConfig:
    """Settings for one resolvent evaluation.

    ``alpha`` is the resolvent step.  The inner forward-step solve stops when
    the shifted-map residual drops below ``inner_tol`` in the certificate's
    norm; ``inner_step`` of None selects ``1 / (1 + alpha * diag_l)``, the
    largest step the nonexpansiveness guarantee allows.
    """

    alpha: float
    inner_tol: float = 1e-12
    inner_max_iters: int = 100_000
    inner_step: Optional[float] = None

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.inner_tol <= 0:
            raise ValueError("inner tolerance must be positive")
        if self.inner_max_iters < 1:
            raise ValueError("inner iteration cap must be positive")
        if self.inner_step is not None and self.inner_step <= 0:
            raise ValueError("inner step must be positive")


def resolvent_affine(A, b, alpha: float, u) -> np.ndarray:
    """Resolvent of the affine operator x -> A x + b: solve (I + alpha A) x = u - alpha b.

    Raises ``numpy.linalg.LinAlgError`` when I + alpha A is singular, which
    cannot happen for a matrix that is monotone in any norm.
    """
    A = np.asarray(A, dtype=float)
    u = np.asarray(u, dtype=float)
    b = np.zeros_like(u) if b is None else np.asarray(b, dtype=float)
    n = A.shape[0]
    try:
        return np.linalg.solve(np.eye(n) + alpha * A, u - alpha * b)
    except np.linalg.LinAlgError:
        raise np.linalg.LinAlgError(
            "I + alpha*A is singular; the supplied operator is not monotone")


def resolvent(op: OperatorSpec, cert: Certificate, u, cfg: ResolveConfig) -> np.ndarray:
    """Evaluate x = (Id + alpha F)^{-1}(u) to the configured inner tolerance.

    Routing: affine operators get a direct dense solve; operators carrying a
    closed-form resolvent use it; everything else runs the inner forward-step
    iteration, which requires a monotone certificate (c >= 0).
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (op.dim,):
        raise ValueError("u dimension does not match the operator")
    if cert.c < 0:
        raise ValueError("resolvent requires a monotone certificate (c >= 0)")
    if op.is_affine:
        return resolvent_affine(op.A, op.b, cfg.alpha, u)
    if op.resolvent_fn is not None:
        return np.asarray(op.resolvent_fn(u, cfg.alpha), dtype=float)
    alpha = cfg.alpha
    beta = cfg.inner_step
    if beta is None:
        beta = 1.0 / (1.0 + alpha * max(cert.diag_l, 0.0))
    # Forward step on G(x) = x + alpha F(x) - u; G is strongly monotone with
    # parameter 1 + alpha c, so the loop contracts by 1 - beta (1 + alpha c).
    x = u.copy()
    for _ in range(cfg.inner_max_iters):
        g = x + alpha * op.evaluate(x) - u
        if vector_norm(g, cert.norm) <= cfg.inner_tol:
            return x
        x = x - beta * g
    g = x + alpha * op.evaluate(x) - u
    if vector_norm(g, cert.norm) <= cfg.inner_tol:
        return x
    raise ConvergenceError(
        f"resolvent inner solve did not reach {cfg.inner_tol:g} "
        f"within {cfg.inner_max_iters} iterations")


def reflected_resolvent(op: OperatorSpec, cert: Certificate, u, cfg: ResolveConfig) -> np.ndarray:
    """Cayley operator 2 (Id + alpha F)^{-1} - Id applied to u."""
    u = np.asarray(u, dtype=float)
    return 2.0 * resolvent(op, cert, u, cfg) - u


def c_theta(op: OperatorSpec, cert: Certificate, theta: float, u, cfg: ResolveConfig) -> np.ndarray:
    """Averaging complement (J_{alpha F}(u) - (1 - theta) u) / theta.

    The resolvent satisfies J = (1 - theta) Id + theta C, so nonexpansiveness
    of C exhibits J as averaged.  C is guaranteed nonexpansive once the weight
    on the identity is small enough, (1 - theta) <= 1 / (1 + alpha * diag_l);
    theta = 1/2 recovers the reflected resolvent.
    """
    if not 0.0 < theta < 1.0:
        raise ValueError("theta must lie strictly between 0 and 1")
    u = np.asarray(u, dtype=float)
    return (resolvent(op, cert, u, cfg) - (1.0 - theta) * u) / theta


def prox_leaky_penalty(x, alpha: float, a: float) -> np.ndarray:
    """Proximal operator of f(z) = (1-a)/(2a) * min(z, 0)^2, entrywise.

    Nonnegative entries are untouched; negative entries shrink by the factor
    a / (a + alpha (1 - a)).  At alpha = 1 this is exactly the leaky ReLU
    with slope a.
    """
    if not 0.0 < a < 1.0:
        raise ValueError("slope a must lie strictly between 0 and 1")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    x = np.asarray(x, dtype=float)
    shrink = a / (a + alpha * (1.0 - a))
    return np.where(x >= 0.0, x, shrink * x)
