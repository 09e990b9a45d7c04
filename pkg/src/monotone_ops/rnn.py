"""Equilibrium computation for leaky-ReLU recurrent networks.

The network state obeys ``xdot = -x + Phi(A x + B u + b)`` with Phi the
entrywise leaky ReLU of slope ``a``.  When ``gamma``, the weighted
l-infinity log norm of A, is below one, the negated right-hand side is
strongly monotone with parameter ``1 - phi(gamma)`` and the equilibrium is
unique.  Three iterations compute it:

* a forward step on the residual operator,
* forward-backward splitting with the closed-form leaky prox,
* Peaceman-Rachford splitting with a cached factorization of
  ``I + alpha (I - A)``.

Residual traces use the unweighted l-infinity norm of
``x - Phi(A x + B u + b)`` for all three methods, so traces from different
weightings remain directly comparable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .norms import LINF, WeightedNorm, induced_norm, log_norm
from .operators import EXACT_STRUCTURAL, Certificate, OperatorSpec, certify_affine
from .resolvent import prox_leaky_penalty
from .splitting import SplitProblem
from .zerofind import IterationTrace, SolverConfig


def leaky_relu(x, a: float) -> np.ndarray:
    """Entrywise max(x, a*x) for slope a in (0, 1)."""
    if not 0.0 < a < 1.0:
        raise ValueError("slope a must lie strictly between 0 and 1")
    x = np.asarray(x, dtype=float)
    return np.maximum(x, a * x)


def _leaky_grad(x, a: float) -> np.ndarray:
    """Derivative of the leaky penalty f(z) = (1-a)/(2a) min(z,0)^2, entrywise."""
    x = np.asarray(x, dtype=float)
    return (1.0 - a) / a * np.minimum(x, 0.0)


@dataclass(frozen=True, eq=False)
class RnnParams:
    """Weights, input, activation slope, and norm weights of one network."""

    A: np.ndarray
    B: np.ndarray
    b: np.ndarray
    u: np.ndarray
    a: float = 0.1
    eta: Optional[np.ndarray] = None

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        B = np.array(self.B, dtype=float)
        b = np.array(self.b, dtype=float)
        u = np.array(self.u, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("A must be square")
        n = A.shape[0]
        if B.shape[0] != n or B.ndim != 2:
            raise ValueError("B must have n rows")
        if b.shape != (n,) or u.shape != (B.shape[1],):
            raise ValueError("b/u dimensions inconsistent with A and B")
        if not 0.0 < self.a < 1.0:
            raise ValueError("activation slope must lie strictly between 0 and 1")
        eta = np.ones(n) if self.eta is None else np.array(self.eta, dtype=float)
        if eta.shape != (n,) or not np.all(eta > 0):
            raise ValueError("eta must be a positive vector of length n")
        for name, val in (("A", A), ("B", B), ("b", b), ("u", u), ("eta", eta)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def norm(self) -> WeightedNorm:
        return WeightedNorm.linf(self.eta)

    @property
    def gamma(self) -> float:
        """Weighted l-infinity log norm of A; below one means well posed."""
        return log_norm(self.A, self.norm)

    def drive(self) -> np.ndarray:
        """The constant input term B u + b."""
        return self.B @ self.u + self.b

    def preactivation(self, x) -> np.ndarray:
        return self.A @ x + self.drive()

    def to_json(self) -> str:
        payload = {
            "n": self.n, "m": self.m, "a": self.a,
            "A": self.A.tolist(), "B": self.B.tolist(),
            "b": self.b.tolist(), "u": self.u.tolist(),
            "eta": self.eta.tolist(),
        }
        return json.dumps(payload)

    @classmethod
    def from_json(cls, text: str) -> "RnnParams":
        d = json.loads(text)
        p = cls(A=d["A"], B=d["B"], b=d["b"], u=d["u"], a=d["a"], eta=d["eta"])
        if p.n != d["n"] or p.m != d["m"]:
            raise ValueError("declared dimensions do not match array shapes")
        return p


def rnn_residual(p: RnnParams, x) -> np.ndarray:
    """Right-hand side -x + Phi(A x + B u + b); zero exactly at equilibria."""
    x = np.asarray(x, dtype=float)
    return -x + leaky_relu(p.preactivation(x), p.a)


def _residual_inf(p: RnnParams, x) -> float:
    return float(np.max(np.abs(x - leaky_relu(p.preactivation(x), p.a))))


def _check_well_posed(p: RnnParams) -> float:
    gamma = p.gamma
    if gamma >= 1.0:
        raise ValueError(f"gamma = {gamma:.6g} >= 1: network is not certified contracting")
    return gamma


def rnn_certificate(p: RnnParams) -> tuple[Certificate, float]:
    """Certificate of the monotone residual operator x - Phi(A x + B u + b).

    Returns (certificate, gamma).  The monotonicity parameter is
    ``1 - phi(gamma)`` with phi the leaky ReLU of the instance's own slope,
    the diagonal bound is ``1 - min_i min(a A_ii, A_ii)``, and the Lipschitz
    constant is ``1 + ||A||`` in the weighted l-infinity norm.
    """
    gamma = _check_well_posed(p)
    c = 1.0 - float(leaky_relu(np.array([gamma]), p.a)[0])
    diag = np.diag(p.A)
    diag_l = 1.0 - float(np.min(np.minimum(p.a * diag, diag)))
    ell = 1.0 + induced_norm(p.A, p.norm)
    cert = Certificate(norm=p.norm, c=c, ell=ell, diag_l=diag_l,
                       provenance=EXACT_STRUCTURAL)
    return cert, gamma


def rnn_operator(p: RnnParams) -> OperatorSpec:
    """The monotone operator x -> x - Phi(A x + B u + b) as an OperatorSpec."""

    def fn(x, _p=p):
        return x - leaky_relu(_p.preactivation(x), _p.a)

    def jac(x, _p=p):
        w = _p.preactivation(x)
        slope = np.where(w >= 0.0, 1.0, _p.a)
        return np.eye(_p.n) - slope[:, None] * _p.A

    return OperatorSpec.from_callable(fn, p.n, jac_fn=jac)


def rnn_split(p: RnnParams) -> SplitProblem:
    """Equilibrium computation as the splitting problem (F + G)(x) = 0.

    F(z) = (I - A) z - (B u + b) is affine and strongly monotone with
    parameter 1 - gamma; G is the gradient of the leaky penalty, diagonal and
    monotone with Lipschitz constant (1 - a)/a, resolved by the closed-form
    prox.
    """
    _check_well_posed(p)
    n = p.n
    nrm = p.norm
    f_op = OperatorSpec.affine(np.eye(n) - p.A, -p.drive())
    f_cert = certify_affine(f_op.A, f_op.b, nrm)
    lip_g = (1.0 - p.a) / p.a

    def g_fn(x, _p=p):
        return _leaky_grad(x, _p.a)

    def g_resolvent(u, alpha, _p=p):
        return prox_leaky_penalty(u, alpha, _p.a)

    g_op = OperatorSpec.from_callable(g_fn, n, resolvent_fn=g_resolvent)
    g_cert = Certificate(norm=nrm, c=0.0, ell=lip_g, diag_l=lip_g,
                         provenance=EXACT_STRUCTURAL)
    return SplitProblem(f_op=f_op, f_cert=f_cert, g_op=g_op, g_cert=g_cert, norm=nrm)


def forward_step_limit(p: RnnParams) -> float:
    """Largest guaranteed step for the forward iteration, 1/(1 - min_i min(a A_ii, A_ii))."""
    diag = np.diag(p.A)
    return 1.0 / (1.0 - float(np.min(np.minimum(p.a * diag, diag))))


def forward_backward_limit(p: RnnParams) -> float:
    """Largest guaranteed step for forward-backward, 1/(1 - min_i A_ii)."""
    return 1.0 / (1.0 - float(np.min(np.diag(p.A))))


def peaceman_rachford_limit(p: RnnParams) -> float:
    """Largest guaranteed Peaceman-Rachford step, min of the affine bound and a/(1-a)."""
    return min(forward_backward_limit(p), p.a / (1.0 - p.a))


def _phi_gamma(p: RnnParams, gamma: float) -> float:
    return max(gamma, p.a * gamma)


def _run_rnn(p: RnnParams, x0, cfg: SolverConfig, trace: IterationTrace, step) -> IterationTrace:
    x = np.asarray(x0, dtype=float).copy()
    if trace.iterates is not None:
        trace.iterates.append(x.copy())
    for _ in range(cfg.max_iters + 1):
        res = _residual_inf(p, x)
        trace.residuals.append(res)
        if res <= cfg.tol:
            trace.converged = True
            break
        if len(trace.residuals) > cfg.max_iters:
            break
        x = step(x)
        if trace.iterates is not None:
            trace.iterates.append(x.copy())
    trace.final_x = x
    return trace


def rnn_forward_step(p: RnnParams, x0, alpha: float, cfg: SolverConfig) -> IterationTrace:
    """Iterate x <- (1 - alpha) x + alpha Phi(A x + B u + b).

    Contraction factor 1 - alpha (1 - phi(gamma)) for alpha up to
    :func:`forward_step_limit`.
    """
    gamma = _check_well_posed(p)
    trace = IterationTrace(
        method="rnn_forward_step", alpha=alpha,
        iterates=[] if cfg.record_iterates else None,
        theoretical_factor=1.0 - alpha * (1.0 - _phi_gamma(p, gamma)),
        alpha_admissible=0.0 < alpha <= forward_step_limit(p))

    def step(x):
        return (1.0 - alpha) * x + alpha * leaky_relu(p.preactivation(x), p.a)

    return _run_rnn(p, x0, cfg, trace, step)


def rnn_forward_backward(p: RnnParams, x0, alpha: float, cfg: SolverConfig) -> IterationTrace:
    """Iterate x <- prox_{alpha f}((1 - alpha) x + alpha (A x + B u + b)).

    Contraction factor 1 - alpha (1 - gamma) for alpha up to
    :func:`forward_backward_limit`; the prox is the closed-form leaky
    shrinkage.
    """
    gamma = _check_well_posed(p)
    trace = IterationTrace(
        method="rnn_forward_backward", alpha=alpha,
        iterates=[] if cfg.record_iterates else None,
        theoretical_factor=1.0 - alpha * (1.0 - gamma),
        alpha_admissible=0.0 < alpha <= forward_backward_limit(p))

    def step(x):
        return prox_leaky_penalty((1.0 - alpha) * x + alpha * p.preactivation(x), alpha, p.a)

    return _run_rnn(p, x0, cfg, trace, step)


def _rnn_reflect_solve(p: RnnParams, z0, alpha: float, cfg: SolverConfig,
                       douglas: bool) -> IterationTrace:
    """Shared Peaceman/Douglas-Rachford loop with a cached factorization.

    Each sweep solves (I + alpha (I - A)) x_half = z + alpha (B u + b) with
    the factorization computed once, reflects, applies the leaky prox, and
    closes with a reflection (PR) or the averaged correction (DR).  Residuals
    are recorded at the prox outputs.
    """
    gamma = _check_well_posed(p)
    rate = alpha * (1.0 - gamma)
    pr_factor = (1.0 - rate) / (1.0 + rate)
    trace = IterationTrace(
        method="rnn_douglas_rachford" if douglas else "rnn_peaceman_rachford",
        alpha=alpha,
        iterates=[] if cfg.record_iterates else None,
        z_iterates=[] if cfg.record_iterates else None,
        theoretical_factor=0.5 * (1.0 + pr_factor) if douglas else pr_factor,
        alpha_admissible=0.0 < alpha <= peaceman_rachford_limit(p))

    n = p.n
    lu = lu_factor(np.eye(n) + alpha * (np.eye(n) - p.A))
    drive = alpha * p.drive()
    z = np.asarray(z0, dtype=float).copy()
    x = prox_leaky_penalty(z, alpha, p.a)
    if trace.iterates is not None:
        trace.iterates.append(x.copy())
    for _ in range(cfg.max_iters + 1):
        if trace.z_iterates is not None:
            trace.z_iterates.append(z.copy())
        res = _residual_inf(p, x)
        trace.residuals.append(res)
        if res <= cfg.tol:
            trace.converged = True
            break
        if len(trace.residuals) > cfg.max_iters:
            break
        x_half = lu_solve(lu, z + drive)
        z_half = 2.0 * x_half - z
        x = prox_leaky_penalty(z_half, alpha, p.a)
        if douglas:
            z = (x - z_half) + x_half
        else:
            z = 2.0 * x - z_half
        if trace.iterates is not None:
            trace.iterates.append(x.copy())
    trace.final_x = x
    trace.z_final = z
    return trace


def rnn_peaceman_rachford(p: RnnParams, z0, alpha: float, cfg: SolverConfig) -> IterationTrace:
    """Peaceman-Rachford splitting specialized to the network equilibrium.

    The reported factor is (1 - alpha (1 - gamma))/(1 + alpha (1 - gamma))
    for alpha up to :func:`peaceman_rachford_limit`.
    """
    return _rnn_reflect_solve(p, z0, alpha, cfg, douglas=False)


def rnn_douglas_rachford(p: RnnParams, z0, alpha: float, cfg: SolverConfig) -> IterationTrace:
    """Douglas-Rachford variant of the same sweep (averaged auxiliary update).

    Converges on the same step range as Peaceman-Rachford without needing
    strong monotonicity; the z sequence contracts by at most the average of
    one and the Peaceman-Rachford factor.
    """
    return _rnn_reflect_solve(p, z0, alpha, cfg, douglas=True)
