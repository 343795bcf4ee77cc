"""Correlated random walks on a path: operators, Jacobi-matrix spectra,
the complete eigendecomposition of the one-step operator, and simulation."""

from .errors import (
    AssumptionViolated,
    ComplexRoots,
    ConvergenceFailure,
    CRWError,
    DegenerateCoin,
    DimensionMismatch,
    InconsistentLemma,
    NearDegenerate,
    NonIsospectral,
    NotAProbabilityState,
    OutOfRange,
    Overflow,
    ParseError,
    ValidationError,
)
from .estimator import CorrelatedWalkSampler, CorrelatedWalkSpectrum
from .jacobi import build_B, build_J, build_pi, coin_spectral_data, eigs_B, eigs_symmetric_tridiagonal
from .model import (
    CoinFamily,
    CoinParams,
    PathCRWModel,
    apply_coin,
    apply_shift,
    apply_U,
    basis_state,
    dense_U,
    homogeneous,
    load_config,
    marginal,
    validate_model,
)
from .simulate import SimConfig, WalkerState, empirical_distribution, evolve_dense, step
from .spectral import (
    SpectralDecomposition,
    alternating_pair,
    build_Q,
    check_assumption2,
    check_linear_dependence,
    evolve_spectral,
    full_decomposition,
    limiting_distribution,
    make_ab,
    mu_pair,
    pairs_from_B,
    stationary_pair,
)

__version__ = "0.1.0"
