from .loader import load_problem, load_problem_file, dump_problem, spec_hash
from .initial import (
    mode_profile,
    mode_derivative,
    sample_initial,
    validate_initial_decay,
    truncation_window,
    window_grid,
)
