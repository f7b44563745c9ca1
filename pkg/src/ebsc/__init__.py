"""Descriptive comparison of event-based surveillance databases.

The package normalizes epidemiological event records into hierarchical
multi-granularity events and compares a candidate database against a
reference along spatial, temporal, thematic and source dimensions.
"""

__version__ = "0.1.0"

from .errors import ConfigError, DataError, EbscError, UnresolvedLocationError
from .events import (
    Dimensions,
    Event,
    EventDatabase,
    ScaledEventDatabase,
    fix_scale,
    load_events_csv,
    load_events_jsonl,
)
from .hierarchy import Hierarchy, HierarchyNode, load_hierarchy
from .matching import Matching, match_events
from .metrics import (
    EvaluationConfig,
    normalized_precision,
    normalized_recall,
    periodicity_final,
    ranking_f,
    representativeness,
    source_consistency,
    thematic_score,
    timeliness,
)
from .mining import MiningParams, PatternResult, mine_multidimensional, mine_spatial
from .similarity import SimilarityParams, event_similarity, semantic_similarity
from .timescale import DateValue

__all__ = [
    "ConfigError",
    "DataError",
    "DateValue",
    "Dimensions",
    "EbscError",
    "EvaluationConfig",
    "Event",
    "EventDatabase",
    "Hierarchy",
    "HierarchyNode",
    "Matching",
    "MiningParams",
    "PatternResult",
    "ScaledEventDatabase",
    "SimilarityParams",
    "UnresolvedLocationError",
    "event_similarity",
    "fix_scale",
    "load_events_csv",
    "load_events_jsonl",
    "load_hierarchy",
    "match_events",
    "mine_multidimensional",
    "mine_spatial",
    "normalized_precision",
    "normalized_recall",
    "periodicity_final",
    "ranking_f",
    "representativeness",
    "semantic_similarity",
    "source_consistency",
    "thematic_score",
    "timeliness",
]
