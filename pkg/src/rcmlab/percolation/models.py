"""Cluster structure of the open edges."""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.spatial import cKDTree

from rcmlab.lattice import Site, Window


class UnionFind:
    """
    Disjoint sets over 0..size-1 with path halving.

    Union always hangs the larger root under the smaller one, so the root of
    every set is its smallest member.
    """

    def __init__(self, size: int):
        self._parent = list(range(size))

    def find(self, i: int) -> int:
        parent = self._parent
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if rb < ra:
            ra, rb = rb, ra
        self._parent[rb] = ra
        return ra

    def roots(self) -> np.ndarray:
        return np.fromiter((self.find(i) for i in range(len(self._parent))), dtype=np.int64)


@dataclass(frozen=True, eq=False)
class ClusterGeometry:
    """
    Component labels of a window.

    A label is the smallest flat site index of its component. The giant
    component stands in for the infinite cluster.
    """

    window: Window
    labels: np.ndarray
    giant_id: int
    sizes: dict[int, int] = field(repr=False)
    tie: bool = False
    spans: bool = False

    @property
    def trivial(self) -> bool:
        return self.sizes[self.giant_id] == 1

    @property
    def giant_size(self) -> int:
        return self.sizes[self.giant_id]

    @property
    def num_components(self) -> int:
        return len(self.sizes)

    def label(self, s) -> int:
        return int(self.labels[self.window.index(s)])

    @cached_property
    def giant_mask(self) -> np.ndarray:
        mask = self.labels == self.giant_id
        mask.flags.writeable = False
        return mask

    def contains(self, s) -> bool:
        return self.window.contains(s) and bool(self.giant_mask[self.window.index(s)])

    def giant_sites(self) -> list[Site]:
        L = self.window.half_width
        return [Site(int(i) - L, int(j) - L) for i, j in np.argwhere(self.giant_mask)]

    def giant_fraction(self, interior_half_width: int | None = None) -> float:
        """Fraction of sites in the giant component, optionally over a central box."""
        mask = self.giant_mask
        if interior_half_width is not None:
            L, r = self.window.half_width, interior_half_width
            mask = mask[L - r : L + r + 1, L - r : L + r + 1]
        return float(mask.mean())

    @cached_property
    def tree(self) -> cKDTree:
        """KD-tree over giant-component sites in lattice coordinates."""
        return cKDTree(np.argwhere(self.giant_mask) - self.window.half_width)


@dataclass(frozen=True)
class ThetaEstimate:
    theta_hat: float
    std_error: float
    num_seeds: int
    per_seed: tuple[float, ...] = ()
    spanning_fraction: float = 1.0


@dataclass(frozen=True)
class HolesReport:
    """Ratios |lambda_n(x)| / n over a mesh, for the sandwich c6 n <= |lambda_n| <= c7 n."""

    n: int
    ratios: tuple[float, ...]

    @property
    def min_ratio(self) -> float:
        return min(self.ratios)

    @property
    def max_ratio(self) -> float:
        return max(self.ratios)
