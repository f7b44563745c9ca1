"""Event similarity over hierarchical attributes.

Two attribute values agree when they are identical or one generalizes the
other; their score is then twice the common-ancestor depth over the sum of
their depths. Unlinked values get a flat penalty. Dates score linearly in
their day gap relative to a window L, and the event score is the sum over
the location, date, disease and host dimensions (the source dimension is
ignored).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigError, EbscError
from .events import Event, Dimensions
from .hierarchy import Hierarchy


@dataclass(frozen=True)
class SimilarityParams:
    # Penalty per dimension for hierarchically unlinked value pairs.
    penalties: dict = field(default_factory=lambda: {"Z": 1.0, "D": 1.0, "H": 1.0})
    date_window_days: float = 21.0

    def __post_init__(self):
        if self.date_window_days <= 0:
            raise ConfigError("date window L must be positive")
        for dim, sigma in self.penalties.items():
            if sigma <= 0:
                raise ConfigError(f"penalty for dimension {dim} must be positive")

    def penalty(self, dim: str) -> float:
        return self.penalties.get(dim, 1.0)


def semantic_similarity(hier: Hierarchy, x_id: str, y_id: str, penalty: float = 1.0) -> float:
    """Ontology similarity of two nodes of the same hierarchy.

    2*depth(common ancestor) / (depth(x)+depth(y)) when linked, else
    ``-penalty``. Symmetric by construction.
    """
    if x_id not in hier or y_id not in hier:
        raise EbscError(
            f"nodes {x_id!r}, {y_id!r} must both belong to hierarchy {hier.dimension_id}"
        )
    if not hier.linked(x_id, y_id):
        return -penalty
    x, y = hier.node(x_id), hier.node(y_id)
    if x.depth + y.depth == 0:
        return 1.0  # both are the root
    shared = hier.common_ancestor_depth(x_id, y_id)
    return 2.0 * shared / (x.depth + y.depth)


def date_similarity(t1, t2, window_days: float) -> float:
    """1 - |gap|/L; negative for gaps beyond the window (no clamping)."""
    if window_days <= 0:
        raise ConfigError("date window L must be positive")
    gap = abs((t2 - t1).days)
    return 1.0 - gap / window_days


def event_similarity(e1: Event, e2: Event, dims: Dimensions, params: SimilarityParams) -> float:
    """Sum of the four per-dimension similarity components."""
    return (
        semantic_similarity(dims.location, e1.location, e2.location, params.penalty("Z"))
        + date_similarity(e1.date.day, e2.date.day, params.date_window_days)
        + semantic_similarity(dims.disease, e1.disease, e2.disease, params.penalty("D"))
        + semantic_similarity(dims.host, e1.host, e2.host, params.penalty("H"))
    )
