"""Monotone-operator zero finding in diagonally weighted l1/linf geometries.

Log norms certify monotonicity, resolvents and reflected resolvents supply
the implicit steps, and the solver modules race forward-step, proximal-point,
Cayley, and splitting iterations, with a seeded recurrent-network equilibrium
benchmark on top.
"""

from .norms import (
    WeightedNorm,
    induced_norm,
    log_norm,
    log_norm_limit,
    lower_bound_gain,
    vector_norm,
)
from .operators import Certificate, OperatorSpec, certify_affine, sample_certificate
from .resolvent import (
    ConvergenceError,
    ResolveConfig,
    c_theta,
    prox_leaky_penalty,
    reflected_resolvent,
    resolvent,
    resolvent_affine,
)
from .zerofind import (
    IterationTrace,
    SolverConfig,
    cayley_solve,
    forward_step_solve,
    km_iterate,
    proximal_point_solve,
)
from .splitting import SplitProblem, douglas_rachford, forward_backward, peaceman_rachford
from .rnn import (
    RnnParams,
    forward_backward_limit,
    forward_step_limit,
    leaky_relu,
    peaceman_rachford_limit,
    rnn_certificate,
    rnn_douglas_rachford,
    rnn_forward_backward,
    rnn_forward_step,
    rnn_operator,
    rnn_peaceman_rachford,
    rnn_residual,
    rnn_split,
)
from .harness import (
    BenchmarkConfig,
    default_alphas,
    export_traces,
    generate_instance,
    load_traces,
    project_log_norm_ball,
    run_benchmark,
    trace_metadata,
)

__all__ = [
    "WeightedNorm", "vector_norm", "induced_norm", "log_norm", "log_norm_limit",
    "lower_bound_gain",
    "OperatorSpec", "Certificate", "certify_affine", "sample_certificate",
    "ResolveConfig", "ConvergenceError", "resolvent", "resolvent_affine",
    "reflected_resolvent", "c_theta", "prox_leaky_penalty",
    "SolverConfig", "IterationTrace", "forward_step_solve", "proximal_point_solve",
    "cayley_solve", "km_iterate",
    "SplitProblem", "forward_backward", "peaceman_rachford", "douglas_rachford",
    "RnnParams", "leaky_relu", "rnn_residual", "rnn_certificate", "rnn_operator",
    "rnn_split", "rnn_forward_step", "rnn_forward_backward", "rnn_peaceman_rachford",
    "rnn_douglas_rachford", "forward_step_limit", "forward_backward_limit",
    "peaceman_rachford_limit",
    "BenchmarkConfig", "generate_instance", "project_log_norm_ball", "run_benchmark",
    "default_alphas", "export_traces", "load_traces", "trace_metadata",
]

__version__ = "0.1.0"
