from .annealed import (
    annealed_density,
    annealed_gradient_slope,
    annealed_potential,
    check_dynamic_moment_condition,
    quenched_dynamic_density,
)
from .inhomogeneous import simulate_inhomogeneous, simulate_inhomogeneous_endpoints
from .interface import (
    InterfaceDrivenEnvironment,
    InterfaceDriver,
    fit_log_slope,
    gaussian_variance_oracle,
    hs_conductances,
    interface_step,
    run_interface,
    variance_scaling,
)

__all__ = [
    "InterfaceDrivenEnvironment",
    "InterfaceDriver",
    "annealed_density",
    "annealed_gradient_slope",
    "annealed_potential",
    "check_dynamic_moment_condition",
    "fit_log_slope",
    "gaussian_variance_oracle",
    "hs_conductances",
    "interface_step",
    "quenched_dynamic_density",
    "run_interface",
    "simulate_inhomogeneous",
    "simulate_inhomogeneous_endpoints",
    "variance_scaling",
]
