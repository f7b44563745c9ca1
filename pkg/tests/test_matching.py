import datetime as dt
import random

import numpy as np
import pytest

from ebsc.errors import ConfigError
from ebsc.events import Event, EventDatabase
from ebsc.matching import Matching, MatchedPair, match_events, similarity_matrix, write_matching_csv
from ebsc.similarity import SimilarityParams
from ebsc.timescale import DateValue

from conftest import weekly_events
from oracles import brute_force_assignment


def _db(dims, spec, system):
    """spec: list of (location, day, disease, host)."""
    events = [
        Event(loc, DateValue(day), dis, host, "out1", system, f"{system}-{i}")
        for i, (loc, day, dis, host) in enumerate(spec)
    ]
    return EventDatabase(system, dims, events)


def test_self_match_is_identity(dims, table3_db):
    m = match_events(table3_db, table3_db)
    assert len(m) == len(table3_db)
    for p in m.pairs:
        assert p.index1 == p.index2
        assert p.score == pytest.approx(4.0)


def test_transposition_when_first_is_larger(dims):
    big = weekly_events(dims, system="big")
    small = weekly_events(dims, weeks={1: ("France",), 2: ("India",)}, system="small")
    m = match_events(big, small)
    assert m.transposed
    assert len(m) <= len(small)
    m2 = match_events(small, big)
    assert not m2.transposed
    # the pairings agree up to orientation
    assert {(p.index2, p.index1) for p in m.pairs} == {(p.index1, p.index2) for p in m2.pairs}


def test_threshold_is_strict(dims):
    d1 = _db(dims, [("fr", dt.date(2021, 1, 1), "ai", "bird")], "a")
    d2 = _db(dims, [("fr", dt.date(2021, 1, 22), "ai", "bird")], "b")
    # score = 1 + 0 + 1 + 1 = 3
    assert len(match_events(d1, d2, threshold=3.0)) == 0
    assert len(match_events(d1, d2, threshold=2.999)) == 1


def test_negative_scores_dropped_at_default_threshold(dims):
    d1 = _db(dims, [("fr", dt.date(2021, 1, 1), "wnv", "human")], "a")
    d2 = _db(dims, [("in", dt.date(2022, 1, 1), "h7n9", "bird")], "b")
    m = match_events(d1, d2)
    assert len(m) == 0
    assert m.objective < 0  # the assignment itself is recorded pre-threshold


def test_empty_database_rejected(dims):
    db = weekly_events(dims)
    empty = EventDatabase("empty", dims, [])
    with pytest.raises(ConfigError):
        match_events(db, empty)


def test_partial_bijection_enforced():
    with pytest.raises(ValueError):
        Matching("a", "b", (MatchedPair(0, 1, 1.0), MatchedPair(0, 2, 1.0)), 0.0, 2.0, False)


def test_assignment_matches_brute_force_on_random_matrices():
    rng = random.Random(42)
    from scipy.optimize import linear_sum_assignment

    for _ in range(200):
        n = rng.randint(1, 8)
        m = rng.randint(n, 10)
        S = [[rng.uniform(-2, 4) for _ in range(m)] for _ in range(n)]
        best_score, _cols = brute_force_assignment(S)
        arr = np.array(S)
        rows, cols = linear_sum_assignment(arr, maximize=True)
        assert arr[rows, cols].sum() == pytest.approx(best_score, abs=1e-9)


def test_match_events_objective_is_optimal(dims):
    rng = random.Random(7)
    locations = ["fr", "it", "es", "pt", "in", "pk", "cn", "np", "paris", "uk"]
    diseases = ["ai", "hpai", "h7n9", "h5n1", "wnv"]
    hosts = ["bird", "wild-bird", "captive-bird", "human"]
    for trial in range(20):
        n1 = rng.randint(1, 5)
        n2 = rng.randint(n1, 6)
        mk = lambda n, s: _db(dims, [
            (rng.choice(locations),
             dt.date(2021, 1, 1) + dt.timedelta(days=rng.randint(0, 60)),
             rng.choice(diseases), rng.choice(hosts))
            for _ in range(n)
        ], s)
        d1, d2 = mk(n1, f"a{trial}"), mk(n2, f"b{trial}")
        S = similarity_matrix(d1, d2, SimilarityParams())
        best_score, _ = brute_force_assignment(S.tolist())
        m = match_events(d1, d2)
        assert m.objective == pytest.approx(best_score, abs=1e-9)


def test_matching_csv_export(tmp_path, dims, table3_db):
    m = match_events(table3_db, table3_db)
    path = tmp_path / "matching.csv"
    write_matching_csv(m, table3_db, table3_db, path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("#{")
    assert lines[1] == "db1_record,db2_record,score"
    assert len(lines) == 2 + len(m)
