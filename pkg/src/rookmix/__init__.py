"""Exact mixing-time analysis of the Rook's Walk via its Hamming-shell birth-death chain."""

__version__ = "0.1.0"

from .core import (
    ChainParams,
    DomainError,
    PreconditionError,
    ResourceLimitError,
    ShellDistribution,
    shell_size,
    stationary_lumped,
    tv_distance,
)
from .lumped import (
    HorizonExceeded,
    TVCurve,
    TridiagonalKernel,
    build_kernel,
    mixing_time,
    spectral_tv_curve,
    step,
    tv_curve,
)
from .krawtchouk import KrawtchoukTable, generalized_binom, krawtchouk_eval, krawtchouk_table, weighted_inner
from .spectral import (
    SpectralData,
    eigen_residual,
    eigenvalues,
    l2_identity_check,
    orthonormalize,
    self_adjoint_check,
    spectral_data,
)
from .bounds import (
    BoundsReport,
    CutoffProfile,
    bounds_report,
    cutoff_constants,
    cutoff_profile,
    kim_bounds,
    l2_upper_orthonormal,
    l2_upper_paper,
    mcleman_upper,
    wilson_lower,
    wilson_variance,
)
