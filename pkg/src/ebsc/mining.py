"""Periodic-frequent pattern mining over scale-fixed event databases.

Spatial mode enumerates sets of spatially close zones ECLAT-style over
per-zone occurrence lists; multidimensional mode treats each
hierarchy-expanded (location, disease, host) tuple as an item. The
period-support of a pattern counts its consecutive inter-arrival gaps
that do not exceed the maximum inter-arrival time; a pattern is fully
periodic when additionally the gaps from the horizon boundaries to its
first and last occurrences stay within that bound.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import Optional

from .errors import ConfigError
from .events import EventDatabase, ScaledEventDatabase
from .geo import geo_distance

INFINITE = math.inf


@dataclass(frozen=True)
class MiningParams:
    max_gap: float = 2.0  # maximum inter-arrival time, in temporal-scale units
    min_period_support: float = 2.0
    rho_is_fraction: bool = False
    alpha_km: float = 1000.0
    mode: str = "spatial"

    def __post_init__(self):
        if self.max_gap < 1:
            raise ConfigError("maximum inter-arrival time must be >= 1 (or infinity)")
        if self.min_period_support <= 0:
            raise ConfigError("minimum period-support must be positive")
        if self.alpha_km <= 0:
            raise ConfigError("distance threshold must be positive")
        if self.mode not in ("spatial", "multidimensional"):
            raise ConfigError(f"unknown mining mode {self.mode!r}")

    @property
    def static(self) -> bool:
        return math.isinf(self.max_gap)

    def support_floor(self, n_transactions: int) -> int:
        """Resolve rho to an absolute count. Fractions are taken of the
        gap count (transactions - 1), or of the transaction count in
        static mode, rounded half-up."""
        if not self.rho_is_fraction:
            return max(1, int(math.ceil(self.min_period_support - 0.5)))
        base = n_transactions if self.static else max(0, n_transactions - 1)
        return max(1, math.floor(self.min_period_support * base + 0.5))


@dataclass(frozen=True)
class PatternResult:
    items: tuple  # sorted zone labels, or one (location, disease, host) tuple
    support: int
    period_support: int
    occurrences: tuple  # strictly increasing interval ordinals
    full_periodic: bool

    def __post_init__(self):
        if list(self.occurrences) != sorted(set(self.occurrences)):
            raise ValueError("occurrences must be strictly increasing")
        if self.period_support > max(0, self.support - 1):
            raise ValueError("period-support cannot exceed the gap count")


def period_support(occurrences, max_gap: float) -> int:
    """Count of consecutive inter-arrival gaps <= max_gap."""
    occ = list(occurrences)
    if not occ:
        raise ConfigError("occurrence list must be non-empty")
    return sum(1 for a, b in zip(occ, occ[1:]) if b - a <= max_gap)


def is_full_periodic(occurrences, max_gap: float, horizon) -> bool:
    """All consecutive gaps and both boundary gaps within max_gap."""
    occ = list(occurrences)
    if not occ:
        return False
    start, end = horizon
    if not (start <= occ[0] and occ[-1] <= end):
        raise ConfigError("horizon must cover all occurrences")
    if occ[0] - start > max_gap or end - occ[-1] > max_gap:
        return False
    return all(b - a <= max_gap for a, b in zip(occ, occ[1:]))


def closeness_from_centroids(stdb: ScaledEventDatabase, db: EventDatabase, alpha_km: float):
    """Zone pairs whose centroids lie within alpha kilometres."""
    hz = db.dimensions.location
    nodes = {}
    for label in stdb.zones():
        node = hz.by_label(label)
        if node is None:
            raise ConfigError(f"zone {label!r} not found in the location hierarchy")
        nodes[label] = node
    close: dict = {label: set() for label in nodes}
    labels = sorted(nodes)
    for i, a in enumerate(labels):
        for b in labels[i + 1:]:
            if geo_distance(nodes[a], nodes[b]) <= alpha_km:
                close[a].add(b)
                close[b].add(a)
    return close


def load_closeness_csv(path):
    """Explicit closeness relation: CSV entity_a,entity_b, symmetric closure."""
    close: dict = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or row[0].startswith("#") or row[0] == "entity_a":
                continue
            a, b = row[0].strip(), row[1].strip()
            close.setdefault(a, set()).add(b)
            close.setdefault(b, set()).add(a)
    return close


def mine_spatial(
    stdb: ScaledEventDatabase,
    params: MiningParams,
    closeness: Optional[dict] = None,
    db: Optional[EventDatabase] = None,
) -> list:
    """All partial periodic spatial patterns of a scale-fixed database.

    ``closeness`` maps a zone to the set of zones it is spatially close
    to; when omitted it is derived from centroids and params.alpha_km
    (which requires the source database for the hierarchy).
    """
    if closeness is None:
        if db is None:
            raise ConfigError("either a closeness relation or the source database is required")
        closeness = closeness_from_centroids(stdb, db, params.alpha_km)
    if not stdb.transactions:
        return []

    tidlists: dict = {}
    for t in stdb.transactions:
        for zone in t.zones:
            tidlists.setdefault(zone, []).append(t.ordinal)
    horizon = (stdb.transactions[0].ordinal, stdb.transactions[-1].ordinal)
    floor = params.support_floor(len(stdb.transactions))

    # Deterministic candidate order: support desc, then label.
    items = sorted(tidlists, key=lambda z: (-len(tidlists[z]), z))
    results = []

    def emit(members, occ):
        psup = period_support(occ, params.max_gap)
        if psup < floor:
            return False
        results.append(
            PatternResult(
                items=tuple(sorted(members)),
                support=len(occ),
                period_support=psup,
                occurrences=tuple(occ),
                full_periodic=is_full_periodic(occ, params.max_gap, horizon),
            )
        )
        return True

    def extend(members, occ, start):
        # period-support is anti-monotone, so branches below the floor
        # cannot produce qualifying supersets and are cut here.
        for idx in range(start, len(items)):
            cand = items[idx]
            if any(cand not in closeness.get(m, ()) for m in members):
                continue
            merged = [o for o in occ if o in cand_set[cand]]
            if not merged or period_support(merged, params.max_gap) < floor:
                continue
            new_members = members + [cand]
            emit(new_members, merged)
            extend(new_members, merged, idx + 1)

    cand_set = {z: set(tids) for z, tids in tidlists.items()}
    for idx, zone in enumerate(items):
        occ = tidlists[zone]
        if emit([zone], occ):
            extend([zone], occ, idx + 1)

    results.sort(key=lambda p: (-p.period_support, p.items))
    return results


def expand_hierarchies(db: EventDatabase) -> list:
    """Per-event transactions of (location, disease, host) label tuples,
    expanded with every combination of proper non-root ancestors."""
    hz, hd, hh = db.dimensions.location, db.dimensions.disease, db.dimensions.host
    transactions = []
    for e in db.events:
        options = []
        for hier, node_id in ((hz, e.location), (hd, e.disease), (hh, e.host)):
            chain = [hier.node(node_id)] + hier.proper_ancestors(node_id)
            options.append([n.label for n in chain])
        tuples = frozenset(
            (z, d, h) for z in options[0] for d in options[1] for h in options[2]
        )
        transactions.append((e.date.day.toordinal(), tuples))
    transactions.sort(key=lambda t: t[0])
    return transactions


def mine_multidimensional(db: EventDatabase, params: MiningParams) -> list:
    """Frequent (static) or partial periodic (temporal) multidimensional
    patterns over the hierarchy-expanded database."""
    transactions = expand_hierarchies(db)
    support: dict = {}
    occurrences: dict = {}
    for ordinal, tuples in transactions:
        for item in tuples:
            support[item] = support.get(item, 0) + 1
            occurrences.setdefault(item, set()).add(ordinal)
    if not transactions:
        return []
    floor = params.support_floor(len(transactions))
    horizon = (transactions[0][0], transactions[-1][0])
    results = []
    for item, sup in support.items():
        occ = tuple(sorted(occurrences[item]))
        psup = period_support(occ, params.max_gap)
        # Static mode filters on plain support; every gap qualifies at
        # an infinite maximum inter-arrival time.
        if (sup if params.static else psup) < floor:
            continue
        results.append(
            PatternResult(
                items=item,
                support=sup,
                period_support=psup,
                occurrences=occ,
                full_periodic=is_full_periodic(occ, params.max_gap, horizon),
            )
        )
    results.sort(key=lambda p: (-p.support, -p.period_support, p.items))
    return results


def write_patterns(results, csv_path, json_path=None):
    """Pattern export: CSV summary plus optional JSON with occurrences."""
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["items", "support", "period_support", "full_periodic"])
        for p in results:
            writer.writerow(["|".join(p.items), p.support, p.period_support, p.full_periodic])
    if json_path is not None:
        payload = [
            {
                "items": list(p.items),
                "support": p.support,
                "period_support": p.period_support,
                "full_periodic": p.full_periodic,
                "occurrences": list(p.occurrences),
            }
            for p in results
        ]
        with open(json_path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
