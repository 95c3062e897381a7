from .advection import KERNELS, advect, shift_profile
from .reference import SplitStepper, solve_reference, step_bounds
from .convergence import self_convergence
