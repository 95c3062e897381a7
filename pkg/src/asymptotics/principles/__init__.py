from .triangle import characteristic_triangle
from .transport import (
    GaussianData,
    TransportInstance,
    TriangleSolution,
    quadratic_damping,
    solve_on_triangle,
)
from .lemmas import (
    BoundEstimate,
    NonlinearBound,
    bound_ratio,
    lemma1_comparison,
    lemma2_positivity,
    lemma3_barrier,
    lemma4_bound,
    lemma4_grid_stability,
    lemma4_ratio,
    lemma5_nonlinear_bound,
    relaxation_ratio,
)
from .sampling import (
    SuiteReport,
    nonlinear_instance,
    lemma2_counterexample_search,
    random_metzler,
    run_suites,
)
