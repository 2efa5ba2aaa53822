"""Signal detection in spiked and heavy-tailed noise from two independent
samples, through the eigenvalues of the asymmetrized product H1 H2^T."""
from .detector import DetectionReport, compare_baseline, detect, lambda_max_s, resolve_N
from .linalg import (
    EigenPair,
    EigenSolverError,
    LinalgError,
    SingularShiftError,
    eig_general,
    op_norm,
    solve_shifted,
    svd_values,
)
from .model import (
    ExperimentConfig,
    ModelError,
    NoiseDistribution,
    SigmaSpec,
    SignalSpec,
    VarianceProfile,
    sigma_matrix,
    signal_matrix,
    standard_basis_sigma,
    standard_basis_signal,
)
from .sampler import SamplePair, assemble_pair, sample_noise, stream, truncate
from .spectrum import (
    ProjectionEstimate,
    SpectrumResult,
    build_linearization,
    eigs_asym,
    eigvec_projection,
    singular_baseline,
)

__version__ = "0.1.0"
