"""Coherent information of the lossy bosonic channel with additive Gaussian noise.

Closed forms for thermal, general Gaussian and first-order perturbed inputs,
together with covariance-matrix and truncated Fock-space oracles that check
them.
"""

from .channel import ChannelParams, apply_to_cov, char_transform, compose, joint_output_cov, output_mean_photon
from .coherent import (
    Asymptotics,
    CoherentInfoReport,
    JointSpectrum,
    argmax_over_x,
    capacity_conjecture,
    dIc_dx,
    f_terms,
    gaussian_coherent_info,
    gaussian_symplectic,
    joint_spectrum,
    large_E_asymptotics,
    thermal_coherent_info,
    thermal_optimal_threshold,
)
from .errors import (
    ConditioningError,
    ConvergenceError,
    CutoffError,
    DomainError,
    GausscapError,
    SingularityError,
    ValidationError,
)
from .gaussian import (
    CovarianceMatrix,
    GaussianInputParams,
    ThermalSpec,
    bosonic_entropy,
    gaussian_entropy,
    is_physical,
    make_gaussian_input,
    symplectic_eigenvalues,
    thermal_cov,
    tmsv_cov,
)
from .perturbation import (
    PerturbationSpec,
    ShiftReport,
    c_zero,
    coherent_info_shift,
    cross_term,
    input_entropy_shift,
    joint_entropy_shift,
    moment_trace,
    normalized_sum,
    output_entropy_shift,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
