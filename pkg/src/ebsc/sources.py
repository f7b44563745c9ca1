"""News-outlet networks: who reports together, and who reports first.

Two views are built from the per-event outlet reports. The co-report
graph weights an edge i -> j by the fraction of i's events that j also
covers, and is ranked by weighted PageRank. The cascade view records,
per event, each outlet's delay behind the first report, and is ranked by
greedy penalty-reduction maximization (CELF lazy re-evaluation, valid
because the objective is monotone submodular).
"""

from __future__ import annotations

import csv
import heapq
import logging
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, EbscError
from .events import EventDatabase

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Ranking:
    order: tuple  # outlet ids, best first
    scores: dict  # outlet -> score (full vector / selection gains)

    def __iter__(self):
        return iter(self.order)

    def __len__(self):
        return len(self.order)


@dataclass(frozen=True)
class CoReportGraph:
    outlets: tuple  # sorted outlet ids
    events_of: dict  # outlet -> frozenset of event keys
    weights: dict  # (i, j) -> b_ij for positive entries only


@dataclass(frozen=True)
class CascadeSet:
    cascades: dict  # event key -> tuple of (outlet, delay days), time-ordered
    outlets: tuple
    t_max: float
    n_excluded: int


def _event_reports(db: EventDatabase, blocklist):
    """(event key, [(outlet, day), ...]) with blocklisted outlets removed."""
    blocklist = frozenset(blocklist)
    out = []
    for e in db.events:
        reports = [(outlet, day) for outlet, day in e.reports if outlet not in blocklist]
        out.append(((e.system, e.record_id), reports))
    return out


def build_coreport_graph(db: EventDatabase, blocklist=frozenset(), symmetrize: bool = False) -> CoReportGraph:
    """Outlet graph weighted by shared-event fractions.

    b_ij = |E_i and E_j| / |E_i|; zero-denominator entries are zero, and
    ``symmetrize`` replaces each pair by the mean of b_ij and b_ji.
    """
    events_of: dict = {}
    for key, reports in _event_reports(db, blocklist):
        for outlet, _day in reports:
            events_of.setdefault(outlet, set()).add(key)
    empty = [o for o in events_of if not events_of[o]]
    for o in empty:
        log.warning("outlet %s reports no events; dropped from the graph", o)
        del events_of[o]
    outlets = tuple(sorted(events_of))
    events_of = {o: frozenset(s) for o, s in events_of.items()}
    weights = {}
    for i in outlets:
        for j in outlets:
            shared = len(events_of[i] & events_of[j])
            if shared:
                weights[(i, j)] = shared / len(events_of[i])
    if symmetrize:
        sym = {}
        for i in outlets:
            for j in outlets:
                w = (weights.get((i, j), 0.0) + weights.get((j, i), 0.0)) / 2.0
                if w:
                    sym[(i, j)] = w
        weights = sym
    return CoReportGraph(outlets=outlets, events_of=events_of, weights=weights)


def pagerank(
    graph: CoReportGraph,
    k: int,
    damping: float = 0.85,
    tol: float = 1e-9,
    max_iter: int = 10000,
) -> Ranking:
    """Weighted PageRank over the co-report graph; top-k, ties by id."""
    n = len(graph.outlets)
    if n == 0:
        raise ConfigError("co-report graph has no outlets")
    index = {o: i for i, o in enumerate(graph.outlets)}
    W = np.zeros((n, n))
    for (i, j), w in graph.weights.items():
        W[index[i], index[j]] = w
    out_sum = W.sum(axis=1)
    dangling = out_sum == 0
    T = np.divide(W, out_sum[:, None], out=np.zeros_like(W), where=out_sum[:, None] != 0)
    x = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        new = damping * (x @ T + x[dangling].sum() / n) + (1 - damping) / n
        residual = float(np.abs(new - x).max())
        x = new
        if residual < tol:
            break
    else:
        raise EbscError(f"PageRank did not converge (residual {residual:.3e} after {max_iter} iterations)")
    scores = {o: float(x[index[o]]) for o in graph.outlets}
    order = sorted(graph.outlets, key=lambda o: (-scores[o], o))[: min(k, n)]
    return Ranking(order=tuple(order), scores=scores)


def build_cascades(db: EventDatabase, blocklist=frozenset(), t_max=None) -> CascadeSet:
    """Per-event reporting delays behind the earliest report.

    Events with no (non-blocklisted) reports are excluded and counted.
    The horizon defaults to the largest observed delay plus one day.
    """
    cascades = {}
    outlets = set()
    excluded = 0
    max_delay = 0
    for key, reports in _event_reports(db, blocklist):
        if not reports:
            excluded += 1
            continue
        first = {}
        for outlet, day in reports:
            if outlet not in first or day < first[outlet]:
                first[outlet] = day
        t0 = min(first.values())
        chain = sorted(((o, (d - t0).days) for o, d in first.items()), key=lambda r: (r[1], r[0]))
        cascades[key] = tuple(chain)
        outlets.update(first)
        max_delay = max(max_delay, chain[-1][1])
    if t_max is None:
        t_max = max_delay + 1
    elif t_max <= max_delay:
        raise ConfigError(f"horizon {t_max} must exceed the largest observed delay {max_delay}")
    return CascadeSet(
        cascades=cascades,
        outlets=tuple(sorted(outlets)),
        t_max=float(t_max),
        n_excluded=excluded,
    )


def penalty_reduction(cascades: CascadeSet, selected) -> float:
    """R(A): summed horizon slack of the earliest selected reporter per
    event; outlets absent from a cascade count as reporting at the
    horizon."""
    selected = set(selected)
    total = 0.0
    for chain in cascades.cascades.values():
        best = min((d for o, d in chain if o in selected), default=cascades.t_max)
        total += cascades.t_max - best
    return total


def celf(cascades: CascadeSet, k: int) -> Ranking:
    """Greedy selection of the k outlets maximizing penalty reduction.

    Lazy re-evaluation: stale heap gains are recomputed only when an
    outlet reaches the top. Ties break toward the smaller outlet id.
    """
    if k > len(cascades.outlets):
        raise ConfigError(f"k={k} exceeds the {len(cascades.outlets)} available outlets")
    delay_of = {
        outlet: {key: d for key, chain in cascades.cascades.items() for o, d in chain if o == outlet}
        for outlet in cascades.outlets
    }
    # current earliest selected delay per event
    best = {key: cascades.t_max for key in cascades.cascades}

    def gain(outlet) -> float:
        return sum(
            max(0.0, best[key] - d) for key, d in delay_of[outlet].items()
        )

    heap = [(-gain(o), o, 0) for o in cascades.outlets]
    heapq.heapify(heap)
    order = []
    gains = {}
    round_no = 0
    while len(order) < k and heap:
        neg, outlet, stamp = heapq.heappop(heap)
        if stamp < round_no:
            heapq.heappush(heap, (-gain(outlet), outlet, round_no))
            continue
        order.append(outlet)
        gains[outlet] = -neg
        for key, d in delay_of[outlet].items():
            if d < best[key]:
                best[key] = d
        round_no += 1
    return Ranking(order=tuple(order), scores=gains)


def write_ranking_csv(ranking: Ranking, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rank", "outlet", "score"])
        for rank, outlet in enumerate(ranking.order, start=1):
            writer.writerow([rank, outlet, f"{ranking.scores[outlet]:.9f}"])


def load_blocklist(path) -> frozenset:
    """Newline-separated outlet ids; blank lines and #-comments skipped."""
    out = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                out.add(line)
    return frozenset(out)
