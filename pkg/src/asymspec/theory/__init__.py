from .dyson import DysonConvergenceWarning, DysonSolution, dyson_solve, pseudospectrum_member
from .fluctuation import FluctuationSpec, KernelSingularError, fluct_variance, qf_covariance
from .identities import det_sum_expansion, secular_value, signal_frame
from .limits import (
    TheoryError,
    null_edge,
    threshold,
    trace_moment_limit,
    trace_moment_pairing_limit,
    trace_variance_limit,
    trace_variance_pairing_limit,
)

__all__ = [
    "DysonConvergenceWarning",
    "DysonSolution",
    "FluctuationSpec",
    "KernelSingularError",
    "TheoryError",
    "det_sum_expansion",
    "dyson_solve",
    "fluct_variance",
    "null_edge",
    "pseudospectrum_member",
    "qf_covariance",
    "secular_value",
    "signal_frame",
    "threshold",
    "trace_moment_limit",
    "trace_moment_pairing_limit",
    "trace_variance_limit",
    "trace_variance_pairing_limit",
]
