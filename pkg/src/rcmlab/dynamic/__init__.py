from .models import (
    AnnealedKernelEstimate,
    AnnealedMethod,
    DynamicEnvironment,
    DynamicKernel,
    DynamicLaw,
    DynamicMomentReport,
    GradientSlope,
    InterfaceField,
    InterfacePotential,
    PiecewiseEnvironment,
    PotentialKind,
    VarianceRow,
    VarianceTable,
    check_frame,
    log_slope_expected,
    max_edge_gradient,
)
from .services import (
    InterfaceDrivenEnvironment,
    InterfaceDriver,
    annealed_density,
    annealed_gradient_slope,
    annealed_potential,
    check_dynamic_moment_condition,
    fit_log_slope,
    gaussian_variance_oracle,
    hs_conductances,
    interface_step,
    quenched_dynamic_density,
    run_interface,
    simulate_inhomogeneous,
    simulate_inhomogeneous_endpoints,
    variance_scaling,
)

__all__ = [
    "AnnealedKernelEstimate",
    "AnnealedMethod",
    "DynamicEnvironment",
    "DynamicKernel",
    "DynamicLaw",
    "DynamicMomentReport",
    "GradientSlope",
    "InterfaceDrivenEnvironment",
    "InterfaceDriver",
    "InterfaceField",
    "InterfacePotential",
    "PiecewiseEnvironment",
    "PotentialKind",
    "VarianceRow",
    "VarianceTable",
    "annealed_density",
    "annealed_gradient_slope",
    "annealed_potential",
    "check_dynamic_moment_condition",
    "check_frame",
    "fit_log_slope",
    "gaussian_variance_oracle",
    "hs_conductances",
    "interface_step",
    "log_slope_expected",
    "max_edge_gradient",
    "quenched_dynamic_density",
    "run_interface",
    "simulate_inhomogeneous",
    "simulate_inhomogeneous_endpoints",
    "variance_scaling",
]
