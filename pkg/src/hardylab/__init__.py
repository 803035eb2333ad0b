"""Hardy-Poincare constants for planar domains with the singular point on the boundary."""

from .analysis import (
    ConcentrationProfile,
    HardyResult,
    LambdaStarResult,
    MeshRecipe,
    certify_attained,
    compute_mu,
    concentration_profile,
    phi_delta_integral,
    radial_reduction,
    scan_lambda,
    verify_remainder,
)
from .assembly import AssembledPencil, assemble_pencil, rayleigh_quotient
from .cone1d import (
    CapEigenResult,
    ConeSpec,
    arc_lambda1,
    bessel_disc_lambda1,
    cap_lambda1,
    cone_hardy_constant,
    emden_fowler_check,
    mu_plus,
)
from .eigensolve import EigResult, dense_oracle, smallest_eigenpair, solve_spd
from .geometry import DomainSpec, Grading, Mesh, diameter, generate_mesh, refine_mesh
from .io import load_mesh, save_mesh

__version__ = "0.1.0"
