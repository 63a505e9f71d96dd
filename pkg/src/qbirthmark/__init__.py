"""Return-probability enhancement of Haar-random states in GOE/GUE systems."""

from .birthmark import (
    EnhancementReport,
    analytic_cross_overlap,
    analytic_ratio,
    analytic_self_overlap,
    dilation,
    estimate_enhancement,
    long_time_overlap,
)
from .dynamics import (
    TimeAverageCurve,
    convergence_curve,
    finite_time_average,
    overlap_at_time,
    spectral_limit,
)
from .ensembles import (
    QuantumState,
    RandomMatrix,
    SymmetryClass,
    WeightVector,
    sample_dirichlet,
    sample_haar_state,
    sample_matrix,
    weights_from_state,
)
from .moments import (
    MomentTable,
    TensorFit,
    analytic_moments,
    estimate_fourth_tensor,
    estimate_fourth_tensor_sliced,
    estimate_moments,
    pairing_ratio,
)
from .sectors import (
    SectorLayout,
    analytic_sector_ratio,
    build_block_hamiltonian,
    estimate_sector_ratio,
    sample_restricted_state,
)
from .spectral import HamiltonianSpectrum, decompose, eigen_weights
from .stats import EstimatorResult, merge

__version__ = "0.1.0"
