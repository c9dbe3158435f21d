from .models import (
    ChiSquareResult,
    EndpointBatch,
    ExitStatistics,
    GbarEstimate,
    SigmaEstimate,
    Trajectory,
)
from .services import (
    chi_square_test,
    estimate_sigma,
    exit_statistics,
    gbar_from,
    occupation_fractions,
    sample_cluster_starts,
    simulate,
    simulate_endpoints,
)

__all__ = [
    "ChiSquareResult",
    "EndpointBatch",
    "ExitStatistics",
    "GbarEstimate",
    "SigmaEstimate",
    "Trajectory",
    "chi_square_test",
    "estimate_sigma",
    "exit_statistics",
    "gbar_from",
    "occupation_fractions",
    "sample_cluster_starts",
    "simulate",
    "simulate_endpoints",
]
