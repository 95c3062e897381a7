from .eigen import (
    SpectralData,
    eigendecompose,
    biorthogonality_residual,
    zero_mode,
    pseudo_inverse_matrix,
    pseudo_inverse_apply,
    kernel_component,
    relaxation_propagator,
    drift_coefficient,
    psi0,
    diffusion_coefficient,
)
from .conditions import ConditionChecker, check_conditions, is_metzler, metzler_witness
