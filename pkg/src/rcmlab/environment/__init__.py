from .models import (
    ConductanceLaw,
    MomentReport,
    PositiveLaw,
    ShiftedEnvironment,
    Speed,
    StaticEnvironment,
)
from .services import check_moment_condition, mu, sample_environment, shift

__all__ = [
    "ConductanceLaw",
    "MomentReport",
    "PositiveLaw",
    "ShiftedEnvironment",
    "Speed",
    "StaticEnvironment",
    "check_moment_condition",
    "mu",
    "sample_environment",
    "shift",
]
