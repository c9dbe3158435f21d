from .models import Boundary, Generator, SiteField, SolverMethod, SolveReport
from .services import (
    apply,
    assemble,
    component_within,
    expected_exit_time,
    exit_functional,
    harmonic_extension,
    harmonic_measure,
    killed_green,
    solve_spd,
)

__all__ = [
    "Boundary",
    "Generator",
    "SiteField",
    "SolveReport",
    "SolverMethod",
    "apply",
    "assemble",
    "component_within",
    "expected_exit_time",
    "exit_functional",
    "harmonic_extension",
    "harmonic_measure",
    "killed_green",
    "solve_spd",
]
