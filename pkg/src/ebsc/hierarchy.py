"""Dimension hierarchies: rooted trees of multi-granularity values.

Each of the five event dimensions (location Z, time T, disease D, host H,
source S) is backed by a tree whose root is the catch-all value for that
dimension. Location nodes additionally carry a centroid and an
administrative level so that spatial scales and distances are available.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterator, Optional

from .errors import ConfigError, DataError

DIMENSIONS = ("Z", "T", "D", "H", "S")

# Coarse-to-fine administrative levels for the spatial hierarchy.
ADMIN_LEVELS = ("world", "continent", "country", "region", "subregion", "city")


@dataclass(frozen=True)
class HierarchyNode:
    node_id: str
    label: str
    depth: int
    parent_id: Optional[str]
    admin_level: Optional[str] = None
    lat: Optional[float] = None
    lon: Optional[float] = None

    @property
    def centroid(self):
        if self.lat is None or self.lon is None:
            return None
        return (self.lat, self.lon)


class Hierarchy:
    """A validated rooted tree over one dimension's domain values."""

    def __init__(self, dimension_id: str, nodes):
        if dimension_id not in DIMENSIONS:
            raise ConfigError(f"unknown dimension id {dimension_id!r}")
        self.dimension_id = dimension_id
        nodes = list(nodes)
        self._nodes = {n.node_id: n for n in nodes}
        if len(self._nodes) != len(nodes):
            raise DataError(f"duplicate node ids in hierarchy {dimension_id}")
        roots = [n for n in self._nodes.values() if n.parent_id is None]
        if len(roots) != 1:
            raise DataError(
                f"hierarchy {dimension_id} must have exactly one root, found {len(roots)}"
            )
        self.root = roots[0]
        if self.root.depth != 0:
            raise DataError(f"root {self.root.node_id} must have depth 0")
        self._children = {nid: [] for nid in self._nodes}
        self._validate()

    def _validate(self):
        seen_labels = {}
        for node in self._nodes.values():
            key = node.label.casefold()
            if key in seen_labels:
                raise DataError(
                    f"duplicate label {node.label!r} in hierarchy {self.dimension_id} "
                    f"(nodes {seen_labels[key]} and {node.node_id})"
                )
            seen_labels[key] = node.node_id
            if node.parent_id is None:
                continue
            parent = self._nodes.get(node.parent_id)
            if parent is None:
                raise DataError(
                    f"node {node.node_id} references unknown parent {node.parent_id}"
                )
            if node.depth != parent.depth + 1:
                raise DataError(
                    f"node {node.node_id} has depth {node.depth}, "
                    f"parent {parent.node_id} has depth {parent.depth}"
                )
            self._children[node.parent_id].append(node.node_id)
            if node.admin_level is not None and parent.admin_level is not None:
                if ADMIN_LEVELS.index(node.admin_level) < ADMIN_LEVELS.index(parent.admin_level):
                    raise DataError(
                        f"admin level of {node.node_id} ({node.admin_level}) is coarser "
                        f"than its parent's ({parent.admin_level})"
                    )
        self._labels = {n.label.casefold(): n for n in self._nodes.values()}
        # Walking parent pointers from every node must terminate at the root.
        for node in self._nodes.values():
            hops, cur = 0, node
            while cur.parent_id is not None:
                cur = self._nodes[cur.parent_id]
                hops += 1
                if hops > len(self._nodes):
                    raise DataError(f"cycle detected at node {node.node_id}")

    def __contains__(self, node_id: str) -> bool:
        return node_id in self._nodes

    def __iter__(self) -> Iterator[HierarchyNode]:
        return iter(self._nodes.values())

    def __len__(self) -> int:
        return len(self._nodes)

    def node(self, node_id: str) -> HierarchyNode:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise DataError(
                f"unknown node {node_id!r} in hierarchy {self.dimension_id}"
            ) from None

    def by_label(self, label: str) -> Optional[HierarchyNode]:
        return self._labels.get(label.casefold())

    def children(self, node_id: str):
        return [self._nodes[c] for c in self._children[node_id]]

    def ancestors(self, node_id: str):
        """Chain from the node up to (and including) the root."""
        chain = [self.node(node_id)]
        while chain[-1].parent_id is not None:
            chain.append(self._nodes[chain[-1].parent_id])
        return chain

    def proper_ancestors(self, node_id: str, include_root: bool = False):
        chain = self.ancestors(node_id)[1:]
        if not include_root:
            chain = [n for n in chain if n.parent_id is not None]
        return chain

    def is_ancestor_or_self(self, ancestor_id: str, node_id: str) -> bool:
        return any(n.node_id == ancestor_id for n in self.ancestors(node_id))

    def linked(self, x_id: str, y_id: str) -> bool:
        """True when one node lies on the other's root path (or equal)."""
        return self.is_ancestor_or_self(x_id, y_id) or self.is_ancestor_or_self(y_id, x_id)

    def common_ancestor_depth(self, x_id: str, y_id: str) -> int:
        x_chain = {n.node_id for n in self.ancestors(x_id)}
        for n in self.ancestors(y_id):
            if n.node_id in x_chain:
                return n.depth
        return 0

    def ancestor_at_admin_level(self, node_id: str, admin_level: str) -> Optional[HierarchyNode]:
        """Nearest ancestor-or-self whose admin level matches exactly."""
        if admin_level not in ADMIN_LEVELS:
            raise ConfigError(f"unknown admin level {admin_level!r}")
        for n in self.ancestors(node_id):
            if n.admin_level == admin_level:
                return n
        return None

    def ancestor_at_depth(self, node_id: str, depth: int) -> Optional[HierarchyNode]:
        for n in self.ancestors(node_id):
            if n.depth == depth:
                return n
        return None


def load_hierarchy(path, dimension_id: str) -> Hierarchy:
    """Load a hierarchy from CSV.

    Expected columns: node_id,label,depth,parent_id with optional
    admin_level,lat,lon. Rows violating the tree invariants are rejected
    with the offending line number.
    """
    nodes = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"node_id", "label", "depth", "parent_id"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise DataError("missing required columns node_id,label,depth,parent_id", path=path)
        for lineno, row in enumerate(reader, start=2):
            try:
                depth = int(row["depth"])
            except ValueError:
                raise DataError(f"invalid depth {row['depth']!r}", path=path, line=lineno)
            parent = row["parent_id"].strip() or None
            admin = (row.get("admin_level") or "").strip() or None
            if admin is not None and admin not in ADMIN_LEVELS:
                raise DataError(f"invalid admin level {admin!r}", path=path, line=lineno)
            lat = lon = None
            if (row.get("lat") or "").strip():
                try:
                    lat = float(row["lat"])
                    lon = float(row["lon"])
                except (ValueError, KeyError):
                    raise DataError("invalid lat/lon", path=path, line=lineno)
                if not (-90.0 <= lat <= 90.0):
                    raise DataError(f"latitude {lat} out of range", path=path, line=lineno)
                if not (-180.0 <= lon <= 180.0):
                    raise DataError(f"longitude {lon} out of range", path=path, line=lineno)
            nodes.append(
                HierarchyNode(
                    node_id=row["node_id"].strip(),
                    label=row["label"].strip(),
                    depth=depth,
                    parent_id=parent,
                    admin_level=admin,
                    lat=lat,
                    lon=lon,
                )
            )
    return Hierarchy(dimension_id, nodes)
