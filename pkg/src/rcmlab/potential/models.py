"""Potential-kernel estimates and identity reports."""

from dataclasses import dataclass, field
from enum import StrEnum

from rcmlab.lattice import Site


class PotentialMethod(StrEnum):
    GREEN_DIFFERENCE = "green_difference"
    TIME_INTEGRAL = "time_integral"


@dataclass(frozen=True)
class PotentialEstimate:
    """
    An estimate of a(x, y).

    cutoff is the ball radius n (green_difference) or the horizon T
    (time_integral); error is the change from n/2 to n, or the contribution
    of the last decade of the time integral.
    """

    value: float
    method: PotentialMethod
    cutoff: float
    error: float
    residual: float = 0.0
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ExitIdentityReport:
    """
    g_A(x, y) against E_x[a(X_tau, y)] - a(x, y).

    cutoff_residual uses the a-values of the reference ball and is exact up
    to solver tolerance; residual uses Richardson-extrapolated a-values.
    """

    x: Site
    y: Site
    n_ref: int
    green: float
    exit_term: float
    potential: float
    cutoff_residual: float
    residual: float


@dataclass(frozen=True)
class PuncturedIdentityReport:
    """
    g_A(x, y) for A = (B(0, n) on the cluster) minus the origin, against
    a(0, y) - a(x, y) + a(x, 0), plus the table g_A(x, y_k) -> a(x, 0).
    """

    x: Site
    y: Site
    n_outer: int
    green: float
    combination: float
    residual: float
    green_at_origin: float
    a_x0: float
    limit_table: tuple[tuple[Site, float], ...] = ()


@dataclass(frozen=True)
class FTermPoint:
    n: int
    probability: float
    value: float
