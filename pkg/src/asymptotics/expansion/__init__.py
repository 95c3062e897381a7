from .profiles import Profile, ProjectedNonlinearity, solve_phi0, solve_phi1
from .terms import (
    SurgeTerm,
    BoundaryTerms,
    build_surge_terms,
    build_boundary_terms,
    phi1_source,
    phi1_initial,
    projected_nonlinearity,
)
from .assemble import (
    ExpansionSet,
    build_expansion,
    required_zeta_range,
    assemble_UN,
    assemble_field,
)
