"""Great-circle distance between location-node centroids."""

from __future__ import annotations

import math

from .errors import DataError
from .hierarchy import HierarchyNode

EARTH_RADIUS_KM = 6371.0


def haversine_km(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    phi1, phi2 = math.radians(lat1), math.radians(lat2)
    dphi = math.radians(lat2 - lat1)
    dlam = math.radians(lon2 - lon1)
    a = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2) ** 2
    return 2 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(a)))


def geo_distance(a: HierarchyNode, b: HierarchyNode) -> float:
    """Distance in kilometers between two location nodes' centroids."""
    for node in (a, b):
        if node.centroid is None:
            raise DataError(f"location node {node.node_id} ({node.label}) has no centroid")
    if a.centroid == b.centroid:
        return 0.0
    return haversine_km(a.lat, a.lon, b.lat, b.lon)
