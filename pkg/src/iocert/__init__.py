"""Certificates, norms and ideal decoders for linear inverse problems.

Given a measurement matrix ``M`` and a low-dimensional signal model, the
package computes the optimal l2 null space constant, restricted isometry
constants and dimension bounds, evaluates the M-norm and atomic norm, and
runs the ideal decoders together with an empirical instance-optimality check.
"""

__version__ = "0.1.0"

from .certify import (
    CertReport,
    certify,
    frame_constant,
    io_constant_lower_bound,
    lowrank_correlation_estimate,
    min_measurements,
    nsp_check,
    nsp_constant_l2,
    rip_constants,
)
from .constructions import (
    adversarial_pair,
    decoder_ratios,
    fourier_rank1_onb,
    hyperbola_demo,
    spd_sparse_inverse_onb,
)
from .decoders import (
    DecodeResult,
    IOReport,
    decode_noise_aware,
    decode_noiseless,
    decode_robust,
    io_harness,
    measure_noise_aware_constants,
)
from .exceptions import (
    ComponentOverflowError,
    ConvergenceError,
    DimensionMismatchError,
    NotOntoError,
    UnsupportedModelError,
)
from .linalg import (
    Subspace,
    kernel_basis,
    nearest_in_affine,
    orthonormalize,
    principal_correlation,
    principal_vectors,
)
from .models import (
    BlockSparse,
    KSparse,
    LowRank,
    PointCloud,
    UnionOfSubspaces,
    difference_components,
    enumerate_components,
    project_model,
)
from .norms import (
    L1,
    L2,
    Atomic,
    MNorm,
    Task,
    atomic_norm,
    eval_norm,
    greedy_decomposition,
    m_distance_to_model,
    sigma_norm_sandwich,
)
