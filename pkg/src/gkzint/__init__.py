"""gkzint: the GKZ hypergeometric system of an exponential-of-polynomial integral.

Given a polynomial S(x) by its support and coefficients, this package
constructs the attached hypergeometric system (toric relations indexed by
the integer kernel lattice of the exponent matrix, Euler relations with
right-hand side -Z) and verifies numerically that Z(c) = int exp(S(x)) dx,
taken over an admissible decay contour, satisfies it.
"""

from .integrator import (
    Contour,
    ContourError,
    FdPerturbationError,
    IntegralResult,
    MomentTable,
    UnconvergedError,
    admissible_contour,
    compute_moments,
    fd_derivative,
    integrate_Z,
    moment,
)
from .lattice import (
    AlphaParameter,
    EulerRow,
    LatticeBasis,
    euler_rows,
    kernel_basis,
    lattice_membership,
    random_lattice_vector,
)
from .operators import (
    EulerOperator,
    MomentSymbol,
    ToricPair,
    euler_operator,
    euler_residual,
    moment_index,
    toric_pair,
)
from .oracle import GaussianForm, gaussian_Z, gaussian_moment, monomial_Z, monomial_moment
from .support import (
    CoefficientVector,
    ExponentIndex,
    InputError,
    PolynomialSupport,
    check_spanning,
    parse_polynomial,
    serialize_polynomial,
)
from .verifier import RunConfig, VerificationReport, verify_all, verify_euler, verify_toric

__version__ = "0.1.0"

__all__ = [
    "AlphaParameter",
    "CoefficientVector",
    "Contour",
    "ContourError",
    "EulerOperator",
    "EulerRow",
    "ExponentIndex",
    "FdPerturbationError",
    "GaussianForm",
    "InputError",
    "IntegralResult",
    "LatticeBasis",
    "MomentSymbol",
    "MomentTable",
    "PolynomialSupport",
    "RunConfig",
    "ToricPair",
    "UnconvergedError",
    "VerificationReport",
    "admissible_contour",
    "check_spanning",
    "compute_moments",
    "euler_operator",
    "euler_residual",
    "euler_rows",
    "fd_derivative",
    "gaussian_Z",
    "gaussian_moment",
    "integrate_Z",
    "kernel_basis",
    "lattice_membership",
    "moment",
    "moment_index",
    "monomial_Z",
    "monomial_moment",
    "parse_polynomial",
    "random_lattice_vector",
    "serialize_polynomial",
    "toric_pair",
    "verify_all",
    "verify_euler",
    "verify_toric",
]
