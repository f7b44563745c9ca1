"""Event matching as a maximum-weight rectangular assignment.

The full pairwise similarity matrix is solved exactly with the Hungarian
method (scipy's linear_sum_assignment), then pairs at or below the score
threshold are discarded, leaving a partial bijection of putatively
associated events.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ConfigError
from .events import EventDatabase
from .similarity import SimilarityParams, event_similarity


@dataclass(frozen=True)
class MatchedPair:
    index1: int  # event index in db1
    index2: int  # event index in db2
    score: float


@dataclass(frozen=True)
class Matching:
    db1_name: str
    db2_name: str
    pairs: tuple
    threshold: float
    objective: float  # assignment objective before thresholding
    transposed: bool  # True when db1 was the larger side

    def __post_init__(self):
        left = [p.index1 for p in self.pairs]
        right = [p.index2 for p in self.pairs]
        if len(set(left)) != len(left) or len(set(right)) != len(right):
            raise ValueError("matching is not a partial bijection")

    def __len__(self):
        return len(self.pairs)


def similarity_matrix(db1: EventDatabase, db2: EventDatabase, params: SimilarityParams) -> np.ndarray:
    dims = db1.dimensions
    S = np.empty((len(db1), len(db2)))
    for i, e1 in enumerate(db1.events):
        for j, e2 in enumerate(db2.events):
            S[i, j] = event_similarity(e1, e2, dims, params)
    return S


def match_events(
    db1: EventDatabase,
    db2: EventDatabase,
    params: SimilarityParams | None = None,
    threshold: float = 0.0,
) -> Matching:
    """Optimal assignment between two event databases, thresholded.

    The smaller side is injected into the larger one; pairs with score
    <= threshold are dropped afterwards.
    """
    if len(db1) == 0 or len(db2) == 0:
        raise ConfigError("both event databases must be non-empty")
    params = params or SimilarityParams()
    transposed = len(db1) > len(db2)
    a, b = (db2, db1) if transposed else (db1, db2)
    S = similarity_matrix(a, b, params)
    rows, cols = linear_sum_assignment(S, maximize=True)
    objective = float(S[rows, cols].sum())
    pairs = []
    for i, j in sorted(zip(rows.tolist(), cols.tolist())):
        score = float(S[i, j])
        if score > threshold:
            if transposed:
                pairs.append(MatchedPair(index1=j, index2=i, score=score))
            else:
                pairs.append(MatchedPair(index1=i, index2=j, score=score))
    pairs.sort(key=lambda p: (p.index1, p.index2))
    return Matching(
        db1_name=db1.name,
        db2_name=db2.name,
        pairs=tuple(pairs),
        threshold=threshold,
        objective=objective,
        transposed=transposed,
    )


def write_matching_csv(matching: Matching, db1: EventDatabase, db2: EventDatabase, path):
    """Export pairs as CSV preceded by a one-line JSON metadata header."""
    meta = {
        "db1": matching.db1_name,
        "db2": matching.db2_name,
        "threshold": matching.threshold,
        "n_pairs": len(matching.pairs),
        "n_db1": len(db1),
        "n_db2": len(db2),
    }
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("#" + json.dumps(meta, sort_keys=True) + "\n")
        writer = csv.writer(fh)
        writer.writerow(["db1_record", "db2_record", "score"])
        for p in matching.pairs:
            e1 = db1.events[p.index1]
            e2 = db2.events[p.index2]
            writer.writerow([e1.record_id, e2.record_id, f"{p.score:.6f}"])
