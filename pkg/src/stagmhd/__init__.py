"""Structure-preserving semi-implicit finite-volume solver for viscous and
resistive magnetohydrodynamics on staggered Cartesian grids.

The magnetic field lives on cell edges and is transported by a constrained
curl update, so the node divergence of B is conserved to round-off.  The
convective and diffusive fluxes are integrated explicitly; the magnetic
tension/resistive and pressure subsystems are solved implicitly with a
matrix-free conjugate gradient inside nested Picard iterations, which lifts
the CFL restriction to the material velocity alone.
"""

from .grid import (
    AXES,
    Boundary,
    EDGE_LOCS,
    FACE_LOCS,
    GridError,
    Location,
    StaggeredGrid,
    StaggerError,
    make_grid,
)
from .fields import (
    EdgeField,
    EigenSet,
    FaceField,
    FieldError,
    FOUR_PI,
    IdealGas,
    Params,
    PositivityError,
    State,
    wave_speeds,
)
from .explicit import compute_dt, explicit_step
from .driver import (
    DiagnosticsRecord,
    JacobianReport,
    RunResult,
    jacobian_spectral,
    run,
    step,
)
from .cases import (
    CASE_NAMES,
    CaseSpec,
    UnknownCaseError,
    init_case,
    reference,
    reference_state,
    stability_equilibrium,
)

__version__ = "0.1.0"

__all__ = [
    "AXES", "Boundary", "EDGE_LOCS", "FACE_LOCS", "GridError", "Location",
    "StaggeredGrid", "StaggerError", "make_grid",
    "EdgeField", "EigenSet", "FaceField", "FieldError", "FOUR_PI", "IdealGas",
    "Params", "PositivityError", "State", "wave_speeds",
    "compute_dt", "explicit_step",
    "DiagnosticsRecord", "JacobianReport", "RunResult", "jacobian_spectral",
    "run", "step",
    "CASE_NAMES", "CaseSpec", "UnknownCaseError", "init_case", "reference",
    "reference_state", "stability_equilibrium",
    "__version__",
]
