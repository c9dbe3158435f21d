from .models import GaussianReport, HeatKernelSlice, Propagation
from .services import (
    advance,
    auto_radius,
    gaussian_diagnostic,
    gaussian_onset,
    geometric_grid,
    heat_domain,
    llt_curve,
    max_rate,
    propagate,
    transition_density,
)

__all__ = [
    "GaussianReport",
    "HeatKernelSlice",
    "Propagation",
    "advance",
    "auto_radius",
    "gaussian_diagnostic",
    "gaussian_onset",
    "geometric_grid",
    "heat_domain",
    "llt_curve",
    "max_rate",
    "propagate",
    "transition_density",
]
