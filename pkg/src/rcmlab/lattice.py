"""
Finite-window geometry of the square lattice.

Balls and spheres use the graph (l1) distance; annuli and scaled targets
live in the plane and use the Euclidean norm.
"""

import math
from collections.abc import Iterator
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from rcmlab.exceptions import ConfigurationError, DomainError

DEFAULT_MESH_RADII = 16
DEFAULT_MESH_ANGLES = 64


class Site(NamedTuple):
    x: int
    y: int

    def __add__(self, other):  # type: ignore[override]
        return Site(self.x + other[0], self.y + other[1])

    def __sub__(self, other):
        return Site(self.x - other[0], self.y - other[1])

    def __neg__(self):
        return Site(-self.x, -self.y)


ORIGIN = Site(0, 0)

# east, west, north, south
DIRECTIONS = (Site(1, 0), Site(-1, 0), Site(0, 1), Site(0, -1))


def l1_distance(a, b) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def euclidean_norm(point) -> float:
    return math.hypot(point[0], point[1])


def neighbors(s) -> list[Site]:
    """The four lattice neighbours of s in the order east, west, north, south."""
    return [Site(s[0] + d.x, s[1] + d.y) for d in DIRECTIONS]


@dataclass(frozen=True, slots=True)
class Edge:
    """An unordered nearest-neighbour bond, stored with its smaller endpoint first."""

    a: Site
    b: Site

    def __post_init__(self):
        a, b = Site(*self.a), Site(*self.b)
        if l1_distance(a, b) != 1:
            raise DomainError(f"Sites {a} and {b} are not nearest neighbours")
        if b < a:
            a, b = b, a
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def horizontal(self) -> bool:
        return self.a.y == self.b.y

    def shifted(self, z) -> "Edge":
        return Edge(self.a + z, self.b + z)


def ball(center, r: int) -> set[Site]:
    """B(center, r) = {y : |y - center|_1 < r}. Note ball(c, 1) is {c}."""
    if r < 0:
        raise DomainError(f"Ball radius must be nonnegative, got {r}")
    cx, cy = center
    sites = set()
    for dx in range(-(r - 1), r):
        span = r - 1 - abs(dx)
        for dy in range(-span, span + 1):
            sites.add(Site(cx + dx, cy + dy))
    return sites


def sphere(center, r: int) -> set[Site]:
    """Sites at l1 distance exactly r from center."""
    if r < 1:
        raise DomainError(f"Sphere radius must be positive, got {r}")
    cx, cy = center
    sites = set()
    for dx in range(-r, r + 1):
        rest = r - abs(dx)
        sites.add(Site(cx + dx, cy + rest))
        sites.add(Site(cx + dx, cy - rest))
    return sites


@dataclass(frozen=True, slots=True)
class Window:
    """The box [-L, L]^2. Arrays over the window are indexed [x + L, y + L]."""

    half_width: int

    def __post_init__(self):
        if self.half_width < 1:
            raise ConfigurationError(
                f"Window half-width must be positive, got {self.half_width}"
            )

    @property
    def side(self) -> int:
        return 2 * self.half_width + 1

    @property
    def shape(self) -> tuple[int, int]:
        return (self.side, self.side)

    @property
    def num_sites(self) -> int:
        return self.side**2

    @property
    def num_edges(self) -> int:
        return 2 * self.side * (self.side - 1)

    def contains(self, s) -> bool:
        L = self.half_width
        return -L <= s[0] <= L and -L <= s[1] <= L

    def interior(self, s) -> bool:
        """True when all four neighbours of s are in the window."""
        L = self.half_width - 1
        return -L <= s[0] <= L and -L <= s[1] <= L

    def index(self, s) -> tuple[int, int]:
        if not self.contains(s):
            raise DomainError(
                f"Site {tuple(s)} lies outside window of half-width {self.half_width}"
            )
        return (s[0] + self.half_width, s[1] + self.half_width)

    def flat_index(self, s) -> int:
        i, j = self.index(s)
        return i * self.side + j

    def site_of(self, flat: int) -> Site:
        i, j = divmod(int(flat), self.side)
        return Site(i - self.half_width, j - self.half_width)

    def sites(self) -> Iterator[Site]:
        L = self.half_width
        for x in range(-L, L + 1):
            for y in range(-L, L + 1):
                yield Site(x, y)

    def edges(self) -> Iterator[Edge]:
        L = self.half_width
        for s in self.sites():
            if s.x < L:
                yield Edge(s, Site(s.x + 1, s.y))
            if s.y < L:
                yield Edge(s, Site(s.x, s.y + 1))

    def box(self, center, r: int) -> set[Site]:
        """The l-infinity box of radius r around center, clipped to the window."""
        cx, cy = center
        L = self.half_width
        return {
            Site(x, y)
            for x in range(max(-L, cx - r), min(L, cx + r) + 1)
            for y in range(max(-L, cy - r), min(L, cy + r) + 1)
        }

    def coordinates(self) -> tuple[np.ndarray, np.ndarray]:
        """Coordinate arrays X, Y of window shape."""
        axis = np.arange(-self.half_width, self.half_width + 1)
        return np.meshgrid(axis, axis, indexing="ij")


@dataclass(frozen=True, slots=True)
class Annulus:
    """K = {x in R^2 : k1 <= |x| <= k2}."""

    k1: float
    k2: float

    def __post_init__(self):
        if not 0 < self.k1 < self.k2 < math.inf:
            raise ConfigurationError(
                f"Annulus needs 0 < k1 < k2 < inf, got k1={self.k1}, k2={self.k2}"
            )

    def contains(self, point) -> bool:
        r = euclidean_norm(point)
        return self.k1 <= r <= self.k2


def annulus_targets(
    K: Annulus,
    n: int,
    radii: int = DEFAULT_MESH_RADII,
    angles: int = DEFAULT_MESH_ANGLES,
) -> list[tuple[float, float]]:
    """
    Deterministic polar mesh of K.

    The points are unscaled members of K; callers multiply by n to get the
    targets nx whose nearest cluster site is lambda_n(x). Radii are evenly
    spaced from k1 to k2 inclusive and angles start at 0.

    Raises:
        DomainError: if n < 1
        ConfigurationError: if the mesh resolution is empty
    """
    if n < 1:
        raise DomainError(f"Scale n must be at least 1, got {n}")
    if radii < 1 or angles < 1:
        raise ConfigurationError(
            f"Mesh of {radii} radii x {angles} angles over annulus [{K.k1}, {K.k2}] is empty"
        )
    rs = [K.k1] if radii == 1 else np.linspace(K.k1, K.k2, radii).tolist()
    points = []
    for r in rs:
        for j in range(angles):
            phi = 2 * math.pi * j / angles
            points.append((r * math.cos(phi), r * math.sin(phi)))
    return points
