from .classical import CLASSICAL_CONSTANT, HOMOGENEOUS_GBAR, bessel_potential_kernel
from .models import (
    ExitIdentityReport,
    FTermPoint,
    PotentialEstimate,
    PotentialMethod,
    PuncturedIdentityReport,
)
from .services import (
    check_corollary23,
    check_lemma22_identity,
    f_term_estimate,
    potential_column,
    potential_green_difference,
    potential_time_integral,
    richardson_extrapolate,
)

__all__ = [
    "CLASSICAL_CONSTANT",
    "HOMOGENEOUS_GBAR",
    "ExitIdentityReport",
    "FTermPoint",
    "PotentialEstimate",
    "PotentialMethod",
    "PuncturedIdentityReport",
    "bessel_potential_kernel",
    "check_corollary23",
    "check_lemma22_identity",
    "f_term_estimate",
    "potential_column",
    "potential_green_difference",
    "potential_time_integral",
    "richardson_extrapolate",
]
