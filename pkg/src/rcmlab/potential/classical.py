"""Potential kernel of the homogeneous lattice (all conductances 1, VSRW)."""

import math
from functools import lru_cache

import numpy as np
from scipy import integrate, special

HOMOGENEOUS_GBAR = 1 / (2 * math.pi)

# lim (a(0, x) - gbar ln|x|) for the VSRW on the homogeneous lattice
CLASSICAL_CONSTANT = (2 * np.euler_gamma + math.log(8)) / (4 * math.pi)


@lru_cache(maxsize=1024)
def _kernel(x1: int, x2: int, horizon_factor: float) -> float:
    r2 = x1 * x1 + x2 * x2
    if r2 == 0:
        return 0.0

    def integrand(t):
        # p_t(0, x) = exp(-4t) I_x1(2t) I_x2(2t)
        return special.ive(0, 2 * t) ** 2 - special.ive(x1, 2 * t) * special.ive(x2, 2 * t)

    horizon = horizon_factor * max(1.0, r2)
    breaks = [0.0, *np.geomspace(1e-2, horizon, 8 + 4 * int(math.log10(horizon) + 1))]
    total = 0.0
    for a, b in zip(breaks, breaks[1:], strict=False):
        value, _ = integrate.quad(integrand, a, b, limit=200, epsabs=1e-14, epsrel=1e-12)
        total += value
    # p_t(0, 0) - p_t(0, x) ~ |x|^2 / (16 pi t^2) for t >> |x|^2
    return total + r2 / (16 * math.pi * horizon)


def bessel_potential_kernel(x, horizon_factor: float = 1e4) -> float:
    """
    a(0, x) for the homogeneous VSRW by quadrature of the Bessel-function
    heat kernel, with an analytic tail beyond horizon_factor * |x|^2.

    a(0, e1) = 1/4 and a(0, x) - ln|x| / (2 pi) tends to CLASSICAL_CONSTANT.
    """
    x1, x2 = sorted((abs(int(x[0])), abs(int(x[1]))))
    return _kernel(x1, x2, float(horizon_factor))
