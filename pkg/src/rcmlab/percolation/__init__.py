from .models import ClusterGeometry, HolesReport, ThetaEstimate, UnionFind
from .services import (
    bfs_labels,
    chemical_distance,
    clusters,
    component_in_ball,
    estimate_theta,
    holes_sandwich,
    nearest_cluster_point,
)

__all__ = [
    "ClusterGeometry",
    "HolesReport",
    "ThetaEstimate",
    "UnionFind",
    "bfs_labels",
    "chemical_distance",
    "clusters",
    "component_in_ball",
    "estimate_theta",
    "holes_sandwich",
    "nearest_cluster_point",
]
