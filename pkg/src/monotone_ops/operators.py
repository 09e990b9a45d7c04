"""Evaluatable operators F: R^n -> R^n and monotonicity certificates.

An :class:`OperatorSpec` bundles evaluation with Jacobian access (exact for
affine maps, analytic callable, or central finite differences).  A
:class:`Certificate` records the monotonicity parameter ``c``, Lipschitz
constant ``ell``, and largest-Jacobian-diagonal bound ``diag_l`` of an
operator with respect to a chosen :class:`~monotone_ops.norms.WeightedNorm`;
these three numbers drive every step-size rule in the solver modules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .norms import WeightedNorm, induced_norm, log_norm

EXACT_AFFINE = "exact-affine"
USER_SUPPLIED = "user-supplied"
SAMPLED = "sampled"
EXACT_STRUCTURAL = "exact-structural"

_DEFAULT_FD_STEP = 1e-6


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class OperatorSpec:
    """A deterministic map from R^n to R^n with Jacobian access.

    Build instances through :meth:`affine` or :meth:`from_callable`.  For
    affine operators ``fn`` evaluates ``A x + b`` exactly and the Jacobian is
    the stored ``A``; otherwise the Jacobian comes from ``jac_fn`` when given
    and central finite differences with step ``fd_step`` when not.
    ``resolvent_fn``, when present, is a closed-form resolvent
    ``(u, alpha) -> x`` solving ``x + alpha F(x) = u``.
    """

    dim: int
    fn: Optional[Callable[[np.ndarray], np.ndarray]]
    A: Optional[np.ndarray] = None
    b: Optional[np.ndarray] = None
    jac_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    fd_step: float = _DEFAULT_FD_STEP
    resolvent_fn: Optional[Callable[[np.ndarray, float], np.ndarray]] = None

    @classmethod
    def affine(cls, A, b=None) -> "OperatorSpec":
        """Operator x -> A x + b with exact Jacobian A."""
        A = _frozen(A)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("A must be square")
        n = A.shape[0]
        b = _frozen(np.zeros(n) if b is None else b)
        if b.shape != (n,):
            raise ValueError("b length must match A")
        return cls(dim=n, fn=lambda x, _A=A, _b=b: _A @ x + _b, A=A, b=b)

    @classmethod
    def from_callable(cls, fn, dim: int, jac_fn=None, fd_step: float = _DEFAULT_FD_STEP,
                      resolvent_fn=None) -> "OperatorSpec":
        """Wrap an arbitrary evaluation callable, optionally with a Jacobian."""
        if fd_step <= 0:
            raise ValueError("finite-difference step must be positive")
        return cls(dim=dim, fn=fn, jac_fn=jac_fn, fd_step=fd_step,
                   resolvent_fn=resolvent_fn)

    @property
    def is_affine(self) -> bool:
        return self.A is not None

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"vector of length {x.size} does not match operator dimension {self.dim}")
        return x

    def evaluate(self, x) -> np.ndarray:
        x = self._check(x)
        if self.fn is None:
            raise ValueError("operator has no evaluation rule (resolvent-only)")
        return np.asarray(self.fn(x), dtype=float)

    def __call__(self, x) -> np.ndarray:
        return self.evaluate(x)

    def jacobian(self, x) -> np.ndarray:
        """Jacobian at x: exact A for affine, analytic callable, or central differences."""
        x = self._check(x)
        if self.is_affine:
            return np.array(self.A)
        if self.jac_fn is not None:
            return np.asarray(self.jac_fn(x), dtype=float)
        h = self.fd_step
        J = np.empty((self.dim, self.dim))
        for j in range(self.dim):
            e = np.zeros(self.dim)
            e[j] = h
            J[:, j] = (self.evaluate(x + e) - self.evaluate(x - e)) / (2.0 * h)
        return J


@dataclass(frozen=True)
class Certificate:
    """Monotonicity/Lipschitz certificate of an operator in a given norm.

    ``c`` is the monotonicity parameter (positive means strongly monotone),
    ``ell`` the Lipschitz constant, and ``diag_l`` an upper bound on the
    Jacobian diagonal entries, which controls admissible step sizes.
    ``provenance`` records whether the numbers are exact (affine or
    structural), user asserted, or heuristic sample estimates.
    """

    norm: WeightedNorm
    c: float
    ell: float
    diag_l: float
    provenance: str = USER_SUPPLIED

    def __post_init__(self):
        if self.ell < 0:
            raise ValueError("Lipschitz constant must be nonnegative")
        if self.c > 0 and not (self.c <= self.diag_l + 1e-12 <= self.ell + 2e-12):
            raise ValueError("certificate must satisfy c <= diag_l <= ell when c > 0")

    @property
    def strongly_monotone(self) -> bool:
        return self.c > 0

    @property
    def kappa(self) -> float:
        """Condition ratio ell / c (infinite for weakly monotone operators)."""
        return self.ell / self.c if self.c > 0 else math.inf

    @property
    def kappa_inf(self) -> float:
        """Ratio diag_l / c, which sets the optimal contraction factors."""
        return self.diag_l / self.c if self.c > 0 else math.inf

    def step_limit(self) -> float:
        """Largest step with the nonexpansiveness guarantee, 1/diag_l (inf if diag_l <= 0)."""
        return 1.0 / self.diag_l if self.diag_l > 0 else math.inf


def certify_affine(A, b=None, nrm: WeightedNorm | None = None) -> Certificate:
    """Exact certificate for the affine operator x -> A x + b.

    The monotonicity parameter is ``max(0, -log_norm(-A))`` (clamped at zero:
    a negative value means the operator is not monotone in this norm, which
    the caller can detect via ``-log_norm(-A)`` directly).
    """
    if nrm is None:
        raise ValueError("a norm is required")
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("A must be square")
    c = max(0.0, -log_norm(-A, nrm))
    return Certificate(
        norm=nrm,
        c=c,
        ell=induced_norm(A, nrm),
        diag_l=float(np.max(np.diag(A))),
        provenance=EXACT_AFFINE,
    )


def sample_certificate(op: OperatorSpec, nrm: WeightedNorm, sample_points) -> Certificate:
    """Heuristic certificate from Jacobians at user-chosen sample points.

    Takes the worst case over the samples: smallest ``-log_norm(-DF)`` for
    ``c`` (clamped at zero), largest induced norm for ``ell``, largest
    Jacobian diagonal for ``diag_l``.  This estimates, and does not prove,
    the global constants; the provenance marks it as sampled.
    """
    pts = [np.asarray(p, dtype=float) for p in sample_points]
    if not pts:
        raise ValueError("sample set must be nonempty")
    c = math.inf
    ell = 0.0
    diag_l = -math.inf
    for p in pts:
        J = op.jacobian(p)
        c = min(c, -log_norm(-J, nrm))
        ell = max(ell, induced_norm(J, nrm))
        diag_l = max(diag_l, float(np.max(np.diag(J))))
    return Certificate(norm=nrm, c=max(0.0, c), ell=ell, diag_l=diag_l,
                       provenance=SAMPLED)
