"""Recurrent-network equilibrium operators, certificates, and iterations."""

import numpy as np
import pytest

from monotone_ops import (
    RnnParams,
    SolverConfig,
    douglas_rachford,
    forward_backward_limit,
    forward_step_limit,
    leaky_relu,
    peaceman_rachford_limit,
    prox_leaky_penalty,
    rnn_certificate,
    rnn_douglas_rachford,
    rnn_forward_backward,
    rnn_forward_step,
    rnn_operator,
    rnn_peaceman_rachford,
    rnn_residual,
    rnn_split,
    sample_certificate,
    vector_norm,
)
from monotone_ops.harness import BenchmarkConfig, generate_instance


def small_instance(seed: int, n: int = 10, m: int = 4, rho: float = 0.9) -> RnnParams:
    return generate_instance(BenchmarkConfig(seed=seed, n=n, m=m, rho=rho))


def constant_drive_params(b, a=0.1, A=None):
    b = np.asarray(b, dtype=float)
    n = b.size
    return RnnParams(A=np.zeros((n, n)) if A is None else A,
                     B=np.zeros((n, 1)), b=b, u=np.zeros(1), a=a)


class TestLeakyRelu:
    def test_nonnegative_passthrough(self):
        assert np.array_equal(leaky_relu(np.array([2.0, 0.0]), 0.1), [2.0, 0.0])

    def test_negative_scaled(self):
        assert leaky_relu(np.array([-2.0]), 0.1)[0] == pytest.approx(-0.2)
        assert leaky_relu(np.array([-4.0]), 0.5)[0] == -2.0

    def test_slope_domain(self):
        for a in (0.0, 1.0, -0.1):
            with pytest.raises(ValueError):
                leaky_relu(np.zeros(2), a)


class TestRnnResidual:
    def test_zero_everything(self):
        p = constant_drive_params([0.0, 0.0])
        assert np.array_equal(rnn_residual(p, np.zeros(2)), [0.0, 0.0])

    def test_constant_drive(self):
        p = constant_drive_params([1.0, -1.0], a=0.1)
        assert np.allclose(rnn_residual(p, np.zeros(2)), [1.0, -0.1])

    def test_vanishes_at_computed_equilibrium(self):
        p = small_instance(seed=3)
        tr = rnn_forward_backward(p, np.zeros(p.n), forward_backward_limit(p),
                                  SolverConfig(alpha=1.0, tol=1e-11, max_iters=20_000))
        assert tr.converged
        assert np.max(np.abs(rnn_residual(p, tr.final_x))) <= 1e-11


class TestRnnCertificate:
    def test_zero_recurrence(self):
        p = constant_drive_params([0.0, 0.0])
        cert, gamma = rnn_certificate(p)
        assert gamma == 0.0 and cert.c == 1.0
        assert cert.diag_l == 1.0 and cert.ell == 1.0

    def test_gamma_near_one(self):
        p = constant_drive_params([0.0, 0.0], a=0.1, A=0.99 * np.eye(2))
        cert, gamma = rnn_certificate(p)
        assert gamma == pytest.approx(0.99)
        assert cert.c == pytest.approx(0.01)

    def test_negative_gamma_uses_leaky_slope(self):
        a = 0.25
        p = constant_drive_params([0.0, 0.0], a=a, A=-2.0 * np.eye(2))
        cert, gamma = rnn_certificate(p)
        assert gamma == -2.0
        assert cert.c == pytest.approx(1.0 + 2.0 * a)
        assert cert.diag_l == pytest.approx(3.0)
        assert cert.c <= cert.diag_l <= cert.ell

    def test_not_contracting_rejected(self):
        p = constant_drive_params([0.0, 0.0], A=1.5 * np.eye(2))
        with pytest.raises(ValueError):
            rnn_certificate(p)
        with pytest.raises(ValueError):
            rnn_forward_step(p, np.zeros(2), 0.5, SolverConfig(alpha=1.0))

    def test_matches_sampled_jacobians(self):
        p = small_instance(seed=4)
        cert, _ = rnn_certificate(p)
        rng = np.random.default_rng(0)
        sampled = sample_certificate(rnn_operator(p), p.norm,
                                     [rng.normal(size=p.n) for _ in range(20)])
        # Structural bounds dominate any sampled estimate.
        assert sampled.c >= cert.c - 1e-9
        assert sampled.ell <= cert.ell + 1e-9
        assert sampled.diag_l <= cert.diag_l + 1e-9


class TestRnnSplit:
    def test_split_vanishes_at_equilibrium(self):
        p = small_instance(seed=5)
        prob = rnn_split(p)
        tr = rnn_forward_backward(p, np.zeros(p.n), forward_backward_limit(p),
                                  SolverConfig(alpha=1.0, tol=1e-12, max_iters=50_000))
        x = tr.final_x
        total = prob.f_op(x) + prob.g_op(x)
        assert vector_norm(total, prob.norm) <= 1e-10

    def test_zero_recurrence_split_solution(self):
        v = np.array([2.0, -3.0])
        p = constant_drive_params(v, a=0.1)
        prob = rnn_split(p)
        z_star = leaky_relu(v, 0.1)
        assert np.allclose(prob.f_op(z_star) + prob.g_op(z_star), 0.0, atol=1e-14)

    def test_leaky_gradient_lipschitz(self):
        p = small_instance(seed=6)
        prob = rnn_split(p)
        assert prob.g_cert.diag_l == pytest.approx((1.0 - p.a) / p.a)
        assert prob.g_cert.diag_l == pytest.approx(9.0)

    def test_g_jacobian_diagonal_and_monotone(self):
        from monotone_ops import log_norm

        p = small_instance(seed=7)
        prob = rnn_split(p)
        lip = (1.0 - p.a) / p.a
        rng = np.random.default_rng(1)
        for _ in range(50):
            x = rng.normal(size=p.n)
            x[np.abs(x) < 1e-3] = 0.5  # keep clear of the kink
            J = prob.g_op.jacobian(x)
            off = J - np.diag(np.diag(J))
            assert np.max(np.abs(off)) <= 1e-6
            assert np.all(np.diag(J) >= -1e-6)
            assert np.all(np.diag(J) <= lip + 1e-6)
            assert log_norm(-J, p.norm) <= 1e-6


class TestProxActivationIdentity:
    def test_unit_step_prox_is_activation(self):
        rng = np.random.default_rng(8)
        x = rng.normal(scale=2.0, size=1000)
        for a in (0.1, 0.3, 0.7):
            assert np.array_equal(prox_leaky_penalty(x, 1.0, a), leaky_relu(x, a))


class TestRnnForwardStep:
    def test_zero_recurrence_single_step(self):
        p = constant_drive_params([1.0, -2.0], a=0.1)
        tr = rnn_forward_step(p, np.zeros(2), 1.0, SolverConfig(alpha=1.0))
        assert tr.converged and tr.n_iters == 1
        assert np.array_equal(tr.final_x, leaky_relu(np.array([1.0, -2.0]), 0.1))

    def test_scalar_fixed_point(self):
        p = RnnParams(A=[[0.5]], B=np.zeros((1, 1)), b=[1.0], u=[0.0], a=0.1)
        tr = rnn_forward_step(p, np.zeros(1), 1.0, SolverConfig(alpha=1.0, tol=1e-12))
        assert tr.converged
        assert tr.final_x[0] == pytest.approx(2.0, abs=1e-11)

    def test_factor_and_limits(self):
        p = constant_drive_params([0.0, 0.0], a=0.1, A=0.99 * np.eye(2))
        tr = rnn_forward_step(p, np.zeros(2), 0.5, SolverConfig(alpha=1.0, max_iters=10))
        assert tr.theoretical_factor == pytest.approx(1.0 - 0.5 * 0.01)
        assert forward_step_limit(p) == pytest.approx(1.0 / (1.0 - 0.1 * 0.99))

    def test_both_diagonal_branches_in_step_limit(self):
        # Positive diagonals engage the a*A_ii branch, negative ones A_ii.
        pos = constant_drive_params([0.0, 0.0], a=0.2, A=np.diag([0.5, 0.2]))
        assert forward_step_limit(pos) == pytest.approx(1.0 / (1.0 - 0.2 * 0.2))
        neg = constant_drive_params([0.0, 0.0], a=0.2, A=np.diag([-0.5, 0.2]))
        assert forward_step_limit(neg) == pytest.approx(1.0 / (1.0 + 0.5))


class TestRnnForwardBackward:
    def test_zero_recurrence_single_step(self):
        v = np.array([1.5, -0.5])
        p = constant_drive_params(v, a=0.1)
        tr = rnn_forward_backward(p, np.zeros(2), 1.0, SolverConfig(alpha=1.0))
        assert tr.converged and tr.n_iters == 1
        assert np.array_equal(tr.final_x, leaky_relu(v, 0.1))

    def test_scalar_fixed_point_matches_forward(self):
        p = RnnParams(A=[[0.5]], B=np.zeros((1, 1)), b=[1.0], u=[0.0], a=0.1)
        cfg = SolverConfig(alpha=1.0, tol=1e-12)
        fb = rnn_forward_backward(p, np.zeros(1), 1.0, cfg)
        assert fb.converged and fb.final_x[0] == pytest.approx(2.0, abs=1e-11)


class TestRnnPeacemanRachford:
    def test_trivial_instance_stationary(self):
        p = constant_drive_params([0.0, 0.0])
        tr = rnn_peaceman_rachford(p, np.zeros(2), 0.1, SolverConfig(alpha=1.0))
        assert tr.converged and tr.n_iters == 0
        assert np.array_equal(tr.final_x, np.zeros(2))

    def test_published_factor_at_leaky_limit(self):
        p = constant_drive_params([0.0, 0.0], a=0.1, A=0.99 * np.eye(2))
        alpha = peaceman_rachford_limit(p)
        assert alpha == pytest.approx(1.0 / 9.0)
        tr = rnn_peaceman_rachford(p, np.zeros(2), alpha, SolverConfig(alpha=1.0, max_iters=5))
        assert tr.theoretical_factor == pytest.approx(0.9977802441731409, abs=1e-10)
        assert tr.theoretical_factor == pytest.approx(0.9978, abs=1e-4)

    def test_z_error_contraction(self):
        # The auxiliary sequence inherits the reflected-composition factor.
        p = small_instance(seed=9)
        alpha = peaceman_rachford_limit(p)
        cfg = SolverConfig(alpha=1.0, tol=1e-12, max_iters=50_000, record_iterates=True)
        ref = rnn_peaceman_rachford(p, np.zeros(p.n), alpha, cfg)
        assert ref.converged
        z_star = ref.z_final
        tr = rnn_peaceman_rachford(p, np.ones(p.n), alpha,
                                   SolverConfig(alpha=1.0, tol=1e-9, max_iters=50_000,
                                                record_iterates=True))
        errs = [np.max(np.abs(z - z_star)) for z in tr.z_iterates]
        f = tr.theoretical_factor
        for e0, e1 in zip(errs, errs[1:]):
            if e0 < 1e-6:
                break
            assert e1 <= f * e0 + 1e-6 * e0


class TestPerStepErrorRatios:
    def test_forward_and_backward_contract_to_reference(self):
        for seed in (10, 11):
            p = small_instance(seed=seed)
            hi = SolverConfig(alpha=1.0, tol=1e-13, max_iters=100_000)
            x_star = rnn_forward_backward(p, np.zeros(p.n), forward_backward_limit(p), hi).final_x
            for solver, alpha in ((rnn_forward_step, forward_step_limit(p)),
                                  (rnn_forward_backward, forward_backward_limit(p))):
                tr = solver(p, np.ones(p.n), alpha,
                            SolverConfig(alpha=1.0, tol=1e-10, max_iters=100_000,
                                         record_iterates=True))
                f = tr.theoretical_factor
                errs = [np.max(np.abs(x - x_star)) for x in tr.iterates]
                for e0, e1 in zip(errs, errs[1:]):
                    if e0 < 1e-6:
                        break
                    assert e1 <= f * e0 + 1e-6 * e0


class TestMethodAgreement:
    def test_all_methods_reach_common_equilibrium(self):
        for seed in (12, 13, 14):
            p = small_instance(seed=seed)
            alpha_fb = forward_backward_limit(p)
            alpha_pr = peaceman_rachford_limit(p)
            cfg = SolverConfig(alpha=1.0, tol=1e-11, max_iters=100_000)
            runs = [
                rnn_forward_step(p, np.zeros(p.n), forward_step_limit(p), cfg),
                rnn_forward_backward(p, np.zeros(p.n), alpha_fb, cfg),
                rnn_peaceman_rachford(p, np.zeros(p.n), alpha_pr, cfg),
                rnn_douglas_rachford(p, np.zeros(p.n), alpha_pr, cfg),
            ]
            prob = rnn_split(p)
            runs.append(douglas_rachford(prob, np.zeros(p.n),
                                         SolverConfig(alpha=alpha_pr, tol=1e-11,
                                                      max_iters=100_000)))
            sols = []
            for tr in runs:
                assert tr.converged
                assert np.max(np.abs(rnn_residual(p, tr.final_x))) <= 1e-9
                sols.append(tr.final_x)
            for x in sols:
                for y in sols:
                    assert np.max(np.abs(x - y)) <= 1e-9

    def test_residuals_nonincreasing_at_admissible_steps(self):
        p = small_instance(seed=15, n=20, m=6)
        cfg = SolverConfig(alpha=1.0, tol=1e-10, max_iters=100_000)
        traces = [
            rnn_forward_step(p, np.zeros(p.n), forward_step_limit(p), cfg),
            rnn_forward_backward(p, np.zeros(p.n), forward_backward_limit(p), cfg),
            rnn_peaceman_rachford(p, np.zeros(p.n), peaceman_rachford_limit(p), cfg),
        ]
        for tr in traces:
            assert tr.alpha_admissible
            r = tr.residuals
            for r0, r1 in zip(r, r[1:]):
                assert r1 <= r0 + 1e-12


class TestRnnParamsSerialization:
    def test_json_round_trip_bitwise(self):
        p = small_instance(seed=16)
        q = RnnParams.from_json(p.to_json())
        for name in ("A", "B", "b", "u", "eta"):
            assert np.array_equal(getattr(p, name), getattr(q, name))
        assert q.a == p.a

    def test_dimension_validation(self):
        with pytest.raises(ValueError):
            RnnParams(A=np.zeros((2, 2)), B=np.zeros((3, 1)), b=np.zeros(2),
                      u=np.zeros(1), a=0.1)
        with pytest.raises(ValueError):
            RnnParams(A=np.zeros((2, 2)), B=np.zeros((2, 1)), b=np.zeros(2),
                      u=np.zeros(1), a=1.0)
        with pytest.raises(ValueError):
            RnnParams(A=np.zeros((2, 2)), B=np.zeros((2, 1)), b=np.zeros(2),
                      u=np.zeros(1), a=0.1, eta=[1.0, -1.0])
