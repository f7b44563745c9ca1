import datetime as dt
import math
import random

import pytest

from ebsc.errors import ConfigError
from ebsc.events import Event, EventDatabase, fix_scale
from ebsc.matching import match_events
from ebsc.metrics import (
    EvaluationConfig,
    normalized_precision,
    normalized_recall,
    periodicity_continuous,
    periodicity_final,
    periodicity_seasonal,
    ranking_f,
    representativeness,
    representativeness_multiscale,
    thematic_score,
    timeliness,
)
from ebsc.timescale import DateValue

from conftest import CLOSENESS, TABLE3_WEEKS, weekly_events
from oracles import (
    normalized_precision_oracle,
    normalized_recall_oracle,
    representativeness_oracle,
)


# ---------------------------------------------------------------------------
# Ranked-list agreement
# ---------------------------------------------------------------------------

def test_identical_lists_score_one():
    for lst in (["a"], ["a", "b", "c"], list("abcdefgh")):
        assert normalized_recall(lst, lst) == pytest.approx(1.0)
        assert normalized_precision(lst, lst) == pytest.approx(1.0)
        assert ranking_f(lst, lst) == pytest.approx(1.0)


def test_disjoint_lists_score_zero():
    assert normalized_recall(["x", "y"], ["a", "b"]) == 0.0
    assert normalized_precision(["x", "y"], ["a", "b"]) == 0.0
    assert ranking_f(["x", "y"], ["a", "b"]) == 0.0


def test_reversed_pair_still_perfect_recall():
    # relevant ranks (2, 1) sum to the best possible sum
    assert normalized_recall(["b", "a"], ["a", "b", "c", "d"]) == pytest.approx(1.0)


def test_precision_worked_example():
    expected = 1.0 - math.log(1.5) / math.log(3.0)
    assert normalized_precision(["a", "c"], ["a", "b", "c"]) == pytest.approx(expected, abs=1e-9)
    assert expected == pytest.approx(0.6309, abs=1e-4)


def test_f_is_harmonic_mean():
    r = normalized_recall(["a", "c"], ["a", "b", "c"])
    p = normalized_precision(["a", "c"], ["a", "b", "c"])
    assert ranking_f(["a", "c"], ["a", "b", "c"]) == pytest.approx(2 * p * r / (p + r))


def test_shuffling_non_relevant_items_never_changes_recall():
    rng = random.Random(3)
    reference = ["a", "b", "c", "d"]
    base_candidate = ["b", "x1", "d", "x2", "a", "x3", "x4"]
    base = normalized_recall(base_candidate, reference)
    for _ in range(500):
        shuffled = base_candidate[:]
        extras = [i for i, x in enumerate(shuffled) if x.startswith("x")]
        values = [shuffled[i] for i in extras]
        rng.shuffle(values)
        for i, v in zip(extras, values):
            shuffled[i] = v
        assert normalized_recall(shuffled, reference) == pytest.approx(base, abs=1e-12)


def test_matches_independent_oracle_on_random_lists():
    rng = random.Random(9)
    universe = [f"i{k}" for k in range(12)]
    for _ in range(100):
        ref = rng.sample(universe, rng.randint(1, 10))
        cand = rng.sample(universe, rng.randint(1, 10))
        assert normalized_recall(cand, ref) == pytest.approx(
            normalized_recall_oracle(cand, ref), abs=1e-12)
        assert normalized_precision(cand, ref) == pytest.approx(
            normalized_precision_oracle(cand, ref), abs=1e-12)


def test_duplicate_items_rejected():
    with pytest.raises(ConfigError):
        normalized_recall(["a", "a"], ["a", "b"])


# ---------------------------------------------------------------------------
# Representativeness
# ---------------------------------------------------------------------------

def _cells(db):
    stdb = fix_scale(db, "country", "week")
    return {(z, t.ordinal) for t in stdb.transactions for z in t.zones}


def test_identity_gives_one_everywhere(table3_db):
    per_zone, mean = representativeness(table3_db, table3_db, "country", "week")
    assert mean == pytest.approx(1.0)
    assert all(v == pytest.approx(1.0) for v in per_zone.values())


def test_removing_one_zone_zeroes_exactly_that_zone(dims, table3_db):
    no_india = {w: tuple(c for c in cs if c != "India") for w, cs in TABLE3_WEEKS.items()}
    candidate = weekly_events(dims, weeks=no_india, system="cand")
    per_zone, mean = representativeness(candidate, table3_db, "country", "week")
    assert per_zone["India"] == pytest.approx(0.0)
    for zone, score in per_zone.items():
        if zone != "India":
            assert score == pytest.approx(1.0)
    assert mean == pytest.approx(7 / 8)


def test_neighbor_tolerance_pinned_value(dims, table3_db):
    # candidate reports France only in week 2; reference has France in
    # weeks 1, 2 and 4. Week 1 is rescued by its calendar neighbor, week 4
    # is not (weeks 3 and 5 are empty), leaving one miss over 8 intervals.
    weeks = {
        w: tuple(c for c in cs if c != "France") if w != 2 else cs
        for w, cs in TABLE3_WEEKS.items()
    }
    candidate = weekly_events(dims, weeks=weeks, system="cand")
    per_zone, _ = representativeness(candidate, table3_db, "country", "week")
    assert per_zone["France"] == pytest.approx(7 / 8)


def test_matches_double_loop_oracle_on_random_databases(dims):
    rng = random.Random(21)
    countries = ("France", "Italy", "Spain", "Portugal", "China", "India", "Nepal", "Pakistan")
    for _ in range(25):
        ref_weeks = {
            w: tuple(rng.sample(countries, rng.randint(1, 4)))
            for w in sorted(rng.sample(range(1, 20), rng.randint(2, 8)))
        }
        cand_weeks = {
            w: tuple(rng.sample(countries, rng.randint(1, 4)))
            for w in sorted(rng.sample(range(1, 20), rng.randint(1, 8)))
        }
        reference = weekly_events(dims, weeks=ref_weeks, system="ref")
        candidate = weekly_events(dims, weeks=cand_weeks, system="cand")
        per_zone, _ = representativeness(candidate, reference, "country", "week")
        assert per_zone == pytest.approx(
            representativeness_oracle(_cells(reference), _cells(candidate)))


def test_monotone_in_candidate(dims, table3_db):
    rng = random.Random(5)
    weeks = {w: tuple(c for c in cs if rng.random() < 0.5) for w, cs in TABLE3_WEEKS.items()}
    weeks = {w: cs for w, cs in weeks.items() if cs}
    small = weekly_events(dims, weeks=weeks, system="cand")
    grown_weeks = dict(weeks)
    grown_weeks[6] = tuple(set(grown_weeks.get(6, ())) | {"India", "Spain"})
    grown = weekly_events(dims, weeks=grown_weeks, system="cand")
    before, _ = representativeness(small, table3_db, "country", "week")
    after, _ = representativeness(grown, table3_db, "country", "week")
    for zone in before:
        assert after[zone] >= before[zone] - 1e-12


def test_empty_reference_is_an_error(dims, table3_db):
    empty = EventDatabase("ref", dims, [])
    with pytest.raises(ConfigError):
        representativeness(table3_db, empty, "country", "week")


def test_multiscale_averages(dims, table3_db):
    config = EvaluationConfig(spatial_scales=("country", "continent"),
                              temporal_scales=("week", "month"))
    detail, overall = representativeness_multiscale(table3_db, table3_db, config)
    assert len(detail) == 4
    assert overall == pytest.approx(1.0)


# ---------------------------------------------------------------------------
# Timeliness
# ---------------------------------------------------------------------------

def _single_pair_dbs(dims, delay_days):
    gold = EventDatabase("gold", dims, [
        Event("fr", DateValue(dt.date(2021, 3, 1)), "ai", "bird", "out1", "gold", "g1")
    ])
    cand = EventDatabase("cand", dims, [
        Event("fr", DateValue(dt.date(2021, 3, 1) + dt.timedelta(days=delay_days)),
              "ai", "bird", "out1", "cand", "c1")
    ])
    return gold, cand


def test_identity_matching_has_zero_delay(table3_db):
    m = match_events(table3_db, table3_db)
    result = timeliness(m, table3_db, table3_db)
    assert result.delay_score == pytest.approx(0.0)
    assert result.timeliness == pytest.approx(1.0)


def test_single_pair_at_window_delay(dims):
    gold, cand = _single_pair_dbs(dims, 21)
    m = match_events(gold, cand)
    result = timeliness(m, gold, cand, decay_days=21)
    assert result.delay_score == pytest.approx(1 - math.exp(-1), abs=1e-12)


def test_early_candidate_is_not_rewarded(dims):
    gold, cand = _single_pair_dbs(dims, -5)
    m = match_events(gold, cand)
    result = timeliness(m, gold, cand)
    assert result.delay_score == pytest.approx(0.0)
    assert result.n_candidate_earlier == 1
    assert result.n_earlier_by_threshold == 0


def test_summary_counts_with_hand_set_delays(dims):
    days = [0, -2, -40, 3, 10]  # candidate lag per pair, in days
    base = dt.date(2021, 5, 1)
    gold_events, cand_events = [], []
    for i, lag in enumerate(days):
        day = base + dt.timedelta(days=30 * i)  # far apart so matching is 1:1
        gold_events.append(Event("fr", DateValue(day), "ai", "bird", "out1", "gold", f"g{i}"))
        cand_events.append(Event("fr", DateValue(day + dt.timedelta(days=lag)),
                                 "ai", "bird", "out1", "cand", f"c{i}"))
    gold = EventDatabase("gold", dims, gold_events)
    cand = EventDatabase("cand", dims, cand_events)
    m = match_events(gold, cand)
    result = timeliness(m, gold, cand, decay_days=21, advance_threshold_days=30)
    assert result.n_pairs == 5
    assert result.n_candidate_earlier == 2
    assert result.n_earlier_by_threshold == 1
    assert result.mean_delay_late == pytest.approx((3 + 10) / 2)
    expected = sum(1 - math.exp(-max(0, d) / 21) for d in days) / 5
    assert result.delay_score == pytest.approx(expected, abs=1e-12)


def test_empty_matching_is_an_error(dims):
    gold, cand = _single_pair_dbs(dims, 0)
    m = match_events(gold, cand, threshold=10.0)
    with pytest.raises(ConfigError):
        timeliness(m, gold, cand)


def test_database_order_is_checked(dims):
    gold, cand = _single_pair_dbs(dims, 2)
    m = match_events(gold, cand)
    with pytest.raises(ConfigError):
        timeliness(m, cand, gold)


# ---------------------------------------------------------------------------
# Periodicity
# ---------------------------------------------------------------------------

TABLE3_CONFIG = EvaluationConfig(
    spatial_scales=("country",), temporal_scales=("week",),
    iotas=(2.0,), rhos=(2.0,), closeness=CLOSENESS,
)


def test_continuous_identity_is_one(table3_db):
    detail, score = periodicity_continuous(table3_db, table3_db, TABLE3_CONFIG)
    assert score == pytest.approx(1.0)


def test_continuous_india_removed_pinned_by_composition(dims, table3_db):
    no_india = {w: tuple(c for c in cs if c != "India") for w, cs in TABLE3_WEEKS.items()}
    candidate = weekly_events(dims, weeks=no_india, system="cand")
    _detail, score = periodicity_continuous(candidate, table3_db, TABLE3_CONFIG)
    reference_list = [("India",), ("Portugal",), ("Spain",), ("France",),
                      ("India", "Pakistan"), ("Pakistan",), ("Portugal", "Spain")]
    candidate_list = [("Portugal",), ("Spain",), ("France",), ("Pakistan",),
                      ("Portugal", "Spain")]
    r = normalized_recall_oracle(candidate_list, reference_list)
    p = normalized_precision_oracle(candidate_list, reference_list)
    assert score == pytest.approx(2 * p * r / (p + r), abs=1e-12)
    assert 0.0 < score < 1.0


def test_continuous_disjoint_candidate_is_zero(dims, table3_db):
    # a candidate sharing no mined patterns with the reference
    weeks = {1: ("China",), 3: ("China",), 5: ("China",)}
    candidate = weekly_events(dims, weeks=weeks, system="cand")
    _detail, score = periodicity_continuous(candidate, table3_db, TABLE3_CONFIG)
    assert score == 0.0


def test_continuous_without_reference_patterns_errors(dims):
    sparse = weekly_events(dims, weeks={1: ("France",), 9: ("France",)}, system="ref")
    with pytest.raises(ConfigError):
        periodicity_continuous(sparse, sparse, TABLE3_CONFIG)


def _seasonal_db(dims, system, france_month):
    """India every month, France only in the given month, 2019-2021."""
    events = []
    for year in (2019, 2020, 2021):
        for month in range(1, 13):
            day = dt.date(year, month, 15)
            events.append(Event("in", DateValue(day), "ai", "bird", "out1",
                                system, f"{system}-{year}-{month:02d}-in"))
            if month == france_month:
                events.append(Event("fr", DateValue(day), "ai", "bird", "out1",
                                    system, f"{system}-{year}-{month:02d}-fr"))
    return EventDatabase(system, dims, events)


SEASONAL_CONFIG = EvaluationConfig(
    spatial_scales=("country",), temporal_scales=("month",),
    iotas=(12.0,), rhos=(1.0,), closeness=CLOSENESS,
)


def test_seasonal_identity_is_one(dims):
    ref = _seasonal_db(dims, "ref", france_month=1)
    _detail, score = periodicity_seasonal(ref, ref, SEASONAL_CONFIG)
    assert score == pytest.approx(1.0)


def test_seasonal_neighbor_tolerance(dims):
    ref = _seasonal_db(dims, "ref", france_month=1)
    shifted = _seasonal_db(dims, "cand", france_month=2)
    _detail, score = periodicity_seasonal(shifted, ref, SEASONAL_CONFIG)
    assert score == pytest.approx(1.0)  # found at the adjacent season


def test_seasonal_missing_zone_lowers_score(dims):
    ref = _seasonal_db(dims, "ref", france_month=1)
    far = _seasonal_db(dims, "cand", france_month=7)
    _detail, score = periodicity_seasonal(far, ref, SEASONAL_CONFIG)
    assert score < 1.0
    # only the January slice lost its France pattern: 11 full slices plus
    # one slice scoring 1/2
    assert score == pytest.approx((11 + 0.5) / 12)


def test_final_periodicity_averages(dims):
    ref = _seasonal_db(dims, "ref", france_month=1)
    result = periodicity_final(ref, ref, SEASONAL_CONFIG)
    assert result["score"] == pytest.approx(
        (result["continuous"]["score"] + result["seasonal"]["score"]) / 2)
    assert result["score"] == pytest.approx(1.0)


# ---------------------------------------------------------------------------
# Thematic
# ---------------------------------------------------------------------------

THEMATIC_CONFIG = EvaluationConfig(iotas=(10.0,), rhos=(1.0,))


def test_thematic_identity_is_one(table6_db):
    detail, score = thematic_score(table6_db, table6_db, THEMATIC_CONFIG)
    assert score == pytest.approx(1.0)
    assert (math.inf, 1.0) in detail  # the static setting is always included


def test_thematic_generalized_candidate_drops(dims6, table6_db):
    events = list(table6_db.events)
    generalized = Event("es", events[2].date, "hpai", "wild-bird", "out1", "toy", "t3")
    candidate = EventDatabase("toy", dims6, events[:2] + [generalized])
    _detail, score = thematic_score(candidate, table6_db, THEMATIC_CONFIG)
    assert 0.0 < score < 1.0


def test_thematic_disjoint_taxonomies_score_zero(dims):
    reference = EventDatabase("ref", dims, [
        Event("fr", DateValue(dt.date(2021, 2, 1)), "ai", "bird", "out1", "ref", "r1"),
    ])
    candidate = EventDatabase("cand", dims, [
        Event("in", DateValue(dt.date(2021, 2, 1)), "wnv", "mosquito", "out1", "cand", "c1"),
    ])
    _detail, score = thematic_score(candidate, reference, THEMATIC_CONFIG)
    assert score == 0.0


def test_evaluation_config_validation():
    with pytest.raises(ConfigError):
        EvaluationConfig(spatial_scales=())
    with pytest.raises(ConfigError):
        EvaluationConfig(decay_days=0)
    with pytest.raises(ConfigError):
        EvaluationConfig(top_k=0)
