"""Quantitative comparison scores between event databases.

Five score families: ranking agreement between two ordered lists
(normalized recall/precision and their harmonic mean), spatio-temporal
representativeness of a candidate against a reference, reporting
timeliness of matched event pairs, periodicity agreement between mined
spatial pattern rankings (continuous and seasonal), and thematic
agreement between multidimensional pattern rankings. The source-network
consistency score lives here too, composed from the network module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import ConfigError
from .events import EventDatabase, ScaledEventDatabase, fix_scale
from .matching import Matching
from .mining import MiningParams, mine_multidimensional, mine_spatial
from .timescale import season_key


# ---------------------------------------------------------------------------
# Ranked-list agreement
# ---------------------------------------------------------------------------

def _relevant_ranks(candidate, reference):
    """Ranks (1-based, within the reference) of the candidate items that
    occur in the reference, taken in candidate order."""
    candidate = list(candidate)
    reference = list(reference)
    for lst, which in ((candidate, "candidate"), (reference, "reference")):
        if len(set(lst)) != len(lst):
            raise ConfigError(f"{which} ranked list contains duplicates")
    ref_rank = {item: i + 1 for i, item in enumerate(reference)}
    return [ref_rank[x] for x in candidate if x in ref_rank], len(reference)


def normalized_recall(candidate, reference) -> float:
    """1 - (sum of reference ranks - best possible sum) / (N*R + N^2),
    where N counts shared items and R is the reference size; 0 when the
    lists share nothing."""
    ranks, n_ref = _relevant_ranks(candidate, reference)
    n = len(ranks)
    if n == 0:
        return 0.0
    numerator = sum(ranks) - n * (n + 1) // 2
    return 1.0 - numerator / (n * n_ref + n * n)


def normalized_precision(candidate, reference) -> float:
    """Log-rank analogue of normalized_recall, denominator log C(R, N)."""
    ranks, n_ref = _relevant_ranks(candidate, reference)
    n = len(ranks)
    if n == 0:
        return 0.0
    numerator = sum(math.log(r) for r in ranks) - sum(math.log(i) for i in range(1, n + 1))
    denominator = math.log(math.comb(n_ref, n))
    if denominator == 0.0:
        return 1.0 if abs(numerator) < 1e-12 else 0.0
    return 1.0 - numerator / denominator


def ranking_f(candidate, reference) -> float:
    """Harmonic mean of normalized recall and precision; 0 at 0+0."""
    r = normalized_recall(candidate, reference)
    p = normalized_precision(candidate, reference)
    if p + r == 0.0:
        return 0.0
    return 2.0 * p * r / (p + r)


# ---------------------------------------------------------------------------
# Configuration shared by the multi-scale evaluators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EvaluationConfig:
    spatial_scales: tuple = ("country",)
    temporal_scales: tuple = ("week",)
    iotas: tuple = (2.0,)
    rhos: tuple = (2.0,)
    rho_is_fraction: bool = False
    alpha_km: float = 1000.0
    decay_days: float = 21.0
    advance_threshold_days: int = 30
    top_k: int = 10
    closeness: Optional[dict] = None  # explicit spatial closeness relation

    def __post_init__(self):
        for name in ("spatial_scales", "temporal_scales", "iotas", "rhos"):
            if not getattr(self, name):
                raise ConfigError(f"{name} must be non-empty")
        if self.decay_days <= 0:
            raise ConfigError("decay window L must be positive")
        if self.top_k < 1:
            raise ConfigError("top_k must be at least 1")


# ---------------------------------------------------------------------------
# Spatio-temporal representativeness
# ---------------------------------------------------------------------------

def _presence(stdb: ScaledEventDatabase) -> dict:
    return {t.ordinal: t.zones for t in stdb.transactions}


def representativeness(
    candidate: EventDatabase,
    reference: EventDatabase,
    spatial_scale: str,
    temporal_scale: str,
):
    """Per-zone coverage of the reference's active (zone, interval) cells.

    A reference cell counts as covered when the candidate reports the
    zone in the same calendar interval or an adjacent one (one interval
    earlier or later). Returns ({zone: score}, mean over zones).
    """
    ref_st = fix_scale(reference, spatial_scale, temporal_scale)
    cand_st = fix_scale(candidate, spatial_scale, temporal_scale)
    if not ref_st.transactions:
        raise ConfigError("reference database is empty at the requested scales")
    ref_at = _presence(ref_st)
    cand_at = _presence(cand_st)
    intervals = ref_st.intervals()
    per_zone = {}
    for zone in sorted(ref_st.zones()):
        miss = 0
        for t in intervals:
            in_ref = zone in ref_at.get(t, ())
            covered = any(zone in cand_at.get(o, ()) for o in (t - 1, t, t + 1))
            miss += max(0, int(in_ref) - int(covered))
        per_zone[zone] = 1.0 - miss / len(intervals)
    mean = sum(per_zone.values()) / len(per_zone)
    return per_zone, mean


def representativeness_multiscale(candidate, reference, config: EvaluationConfig):
    """Mean of the representativeness score over all requested scale
    pairs; returns (per-(l_Z,l_T) detail, overall mean)."""
    detail = {}
    for lz in config.spatial_scales:
        for lt in config.temporal_scales:
            per_zone, mean = representativeness(candidate, reference, lz, lt)
            detail[(lz, lt)] = {"per_zone": per_zone, "mean": mean}
    overall = sum(cell["mean"] for cell in detail.values()) / len(detail)
    return detail, overall


# ---------------------------------------------------------------------------
# Timeliness
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TimelinessResult:
    delay_score: float  # grows with delay; 0 = candidate never late
    timeliness: float  # 1 - delay_score, higher = more timely
    pairs: tuple  # (gold record, cand record, gold date, cand date, lag days, delta)
    n_pairs: int
    n_candidate_earlier: int
    n_earlier_by_threshold: int
    mean_delay_late: float  # average delta over late pairs only (0 if none)


def timeliness(
    matching: Matching,
    gold: EventDatabase,
    candidate: EventDatabase,
    decay_days: float = 21.0,
    advance_threshold_days: int = 30,
) -> TimelinessResult:
    """Exponential-decay delay score over matched event pairs.

    ``matching`` must pair gold (db1) against candidate (db2). Delay is
    clamped at zero: an early candidate report neither scores nor costs.
    """
    if decay_days <= 0:
        raise ConfigError("decay window L must be positive")
    if not matching.pairs:
        raise ConfigError("matching has no pairs to evaluate")
    if (matching.db1_name, matching.db2_name) != (gold.name, candidate.name):
        raise ConfigError("matching does not pair the given databases in this order")
    rows = []
    total = 0.0
    n_early = 0
    n_early_thr = 0
    late = []
    for p in matching.pairs:
        g = gold.events[p.index1]
        c = candidate.events[p.index2]
        lag = (c.date.day - g.date.day).days
        delta = max(0, lag)
        total += 1.0 - math.exp(-delta / decay_days)
        if lag < 0:
            n_early += 1
            if -lag >= advance_threshold_days:
                n_early_thr += 1
        elif lag > 0:
            late.append(delta)
        rows.append((g.record_id, c.record_id, g.date.isoformat(), c.date.isoformat(), lag, delta))
    psi = total / len(matching.pairs)
    return TimelinessResult(
        delay_score=psi,
        timeliness=1.0 - psi,
        pairs=tuple(rows),
        n_pairs=len(matching.pairs),
        n_candidate_earlier=n_early,
        n_earlier_by_threshold=n_early_thr,
        mean_delay_late=(sum(late) / len(late)) if late else 0.0,
    )


# ---------------------------------------------------------------------------
# Periodicity
# ---------------------------------------------------------------------------

def _pattern_list(stdb, db, iota, rho, config: EvaluationConfig):
    params = MiningParams(
        max_gap=iota,
        min_period_support=rho,
        rho_is_fraction=config.rho_is_fraction,
        alpha_km=config.alpha_km,
    )
    patterns = mine_spatial(stdb, params, closeness=config.closeness, db=db)
    return [p.items for p in patterns]


def periodicity_continuous(candidate, reference, config: EvaluationConfig):
    """Mean ranking agreement of the full-horizon spatial pattern lists
    over every (l_Z, l_T, iota, rho) cell. Cells where the reference
    yields no patterns are skipped; returns (per-cell detail, mean)."""
    detail = {}
    scores = []
    for lz in config.spatial_scales:
        for lt in config.temporal_scales:
            cand_st = fix_scale(candidate, lz, lt)
            ref_st = fix_scale(reference, lz, lt)
            for iota in config.iotas:
                for rho in config.rhos:
                    ref_list = _pattern_list(ref_st, reference, iota, rho, config)
                    key = (lz, lt, iota, rho)
                    if not ref_list:
                        detail[key] = None
                        continue
                    cand_list = _pattern_list(cand_st, candidate, iota, rho, config)
                    score = ranking_f(cand_list, ref_list)
                    detail[key] = score
                    scores.append(score)
    if not scores:
        raise ConfigError("reference produced no patterns in any evaluation cell")
    return detail, sum(scores) / len(scores)


def _seasonal_slices(stdb: ScaledEventDatabase) -> dict:
    """Transactions pooled by position in the calendar cycle (all
    Januaries together, all ISO week 13s together, ...). Keys map to
    sub-databases keeping only the pooled transactions."""
    groups: dict = {}
    for t in stdb.transactions:
        groups.setdefault(season_key(t.day, stdb.temporal_scale), []).append(t)
    out = {}
    for key, txs in groups.items():
        out[key] = ScaledEventDatabase(
            name=stdb.name,
            spatial_scale=stdb.spatial_scale,
            temporal_scale=stdb.temporal_scale,
            transactions=tuple(txs),
            excluded=stdb.excluded,
        )
    return out


def _season_neighbors(key: str):
    """The same-cycle keys one position earlier and later (clamped at the
    cycle ends, no wraparound)."""
    if key == "year":  # yearly pooling has a single slice
        return [key]
    prefix, num = key[0], int(key[1:])
    width = len(key) - 1
    limits = {"M": (1, 12), "B": (1, 27), "W": (1, 53), "D": (1, 366), "Y": (1, 1)}
    lo, hi = limits.get(prefix, (1, 10 ** width))
    out = [key]
    if num - 1 >= lo:
        out.append(f"{prefix}{num - 1:0{width}d}")
    if num + 1 <= hi:
        out.append(f"{prefix}{num + 1:0{width}d}")
    return out


def periodicity_seasonal(candidate, reference, config: EvaluationConfig):
    """Fraction of per-season reference patterns the candidate recovers
    in the same season or an adjacent one, averaged over seasons and all
    (l_Z, l_T, iota, rho) cells. Seasons where the reference mines no
    pattern are skipped."""
    detail = {}
    scores = []
    for lz in config.spatial_scales:
        for lt in config.temporal_scales:
            cand_slices = _seasonal_slices(fix_scale(candidate, lz, lt))
            ref_slices = _seasonal_slices(fix_scale(reference, lz, lt))
            for iota in config.iotas:
                for rho in config.rhos:
                    cand_patterns = {
                        key: set(_pattern_list(slc, candidate, iota, rho, config))
                        for key, slc in cand_slices.items()
                    }
                    for key in sorted(ref_slices):
                        x = _pattern_list(ref_slices[key], reference, iota, rho, config)
                        cell = (lz, lt, iota, rho, key)
                        if not x:
                            detail[cell] = None
                            continue
                        neighbors = _season_neighbors(key)
                        found = sum(
                            1
                            for pat in x
                            if any(pat in cand_patterns.get(n, ()) for n in neighbors)
                        )
                        score = found / len(x)
                        detail[cell] = score
                        scores.append(score)
    if not scores:
        raise ConfigError("reference produced no seasonal patterns in any cell")
    return detail, sum(scores) / len(scores)


def periodicity_final(candidate, reference, config: EvaluationConfig):
    """Average of the continuous and seasonal periodicity scores."""
    detail_f, f_score = periodicity_continuous(candidate, reference, config)
    detail_s, s_score = periodicity_seasonal(candidate, reference, config)
    return {
        "continuous": {"detail": detail_f, "score": f_score},
        "seasonal": {"detail": detail_s, "score": s_score},
        "score": (f_score + s_score) / 2.0,
    }


# ---------------------------------------------------------------------------
# Thematic agreement
# ---------------------------------------------------------------------------

def thematic_score(candidate, reference, config: EvaluationConfig):
    """Mean ranking agreement of the hierarchy-expanded multidimensional
    pattern lists over (iota, rho) cells, the static (infinite iota)
    setting included. Empty-reference cells are skipped."""
    iotas = tuple(config.iotas)
    if not any(math.isinf(i) for i in iotas):
        iotas = iotas + (math.inf,)
    detail = {}
    scores = []
    for iota in iotas:
        for rho in config.rhos:
            params = MiningParams(
                max_gap=iota,
                min_period_support=rho,
                rho_is_fraction=config.rho_is_fraction,
                alpha_km=config.alpha_km,
                mode="multidimensional",
            )
            ref_list = [p.items for p in mine_multidimensional(reference, params)]
            key = (iota, rho)
            if not ref_list:
                detail[key] = None
                continue
            cand_list = [p.items for p in mine_multidimensional(candidate, params)]
            score = ranking_f(cand_list, ref_list)
            detail[key] = score
            scores.append(score)
    if not scores:
        raise ConfigError("reference produced no multidimensional patterns")
    return detail, sum(scores) / len(scores)


# ---------------------------------------------------------------------------
# Source consistency
# ---------------------------------------------------------------------------

def source_consistency(db: EventDatabase, k: int, blocklist=frozenset()):
    """Ranking agreement between the importance ordering (PageRank over
    the co-report graph) and the timeliness ordering (greedy influence
    selection over reporting cascades, used as the reference)."""
    from .sources import build_cascades, build_coreport_graph, celf, pagerank

    graph = build_coreport_graph(db, blocklist=blocklist)
    cascades = build_cascades(db, blocklist=blocklist)
    k = min(k, len(graph.outlets))
    if k == 0:
        raise ConfigError("no outlets left after blocklist filtering")
    important = pagerank(graph, k)
    timely = celf(cascades, k)
    return {
        "pagerank": list(important),
        "celf": list(timely),
        "score": ranking_f(list(important), list(timely)),
    }
