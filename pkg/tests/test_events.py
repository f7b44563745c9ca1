import datetime as dt

import pytest

from ebsc.errors import ConfigError, DataError
from ebsc.events import (
    Event,
    EventDatabase,
    fix_scale,
    load_events_csv,
    load_events_jsonl,
    parse_date,
    write_events_csv,
)
from ebsc.timescale import DateValue

from conftest import TABLE3_WEEKS, iso_monday, weekly_events


def test_parse_date_precisions():
    assert parse_date("2021-03-31") == DateValue(dt.date(2021, 3, 31), "day")
    assert parse_date("2021-03") == DateValue(dt.date(2021, 3, 1), "month")
    assert parse_date("2021") == DateValue(dt.date(2021, 1, 1), "year")
    with pytest.raises(DataError):
        parse_date("31-03-2021")


def test_database_validates_references(dims):
    with pytest.raises(DataError):
        EventDatabase("x", dims, [
            Event("nowhere", DateValue(dt.date(2021, 1, 1)), "ai", "bird", "out1", "x", "r1")
        ])


def test_active_domains(table3_db):
    countries = table3_db.active_domain("Z", "country")
    assert countries == frozenset(
        {"France", "Italy", "Spain", "Portugal", "China", "India", "Nepal", "Pakistan"}
    )
    weeks = table3_db.active_domain("T", "week")
    assert weeks == frozenset(f"2021-W{w:02d}" for w in TABLE3_WEEKS)
    assert table3_db.active_domain("D") == frozenset({"avian influenza"})
    with pytest.raises(ConfigError):
        table3_db.active_domain("Q")


def test_select_by_zone_matches_ancestors(dims, table3_db):
    asia = table3_db.select(zone_filter={"Asia"})
    labels = {dims.location.node(e.location).label for e in asia}
    assert labels == {"China", "India", "Nepal", "Pakistan"}
    # filtering is the identity with empty filters
    assert len(table3_db.select()) == len(table3_db)


def test_select_by_time(table3_db):
    week2 = table3_db.select(time_filter={"2021-W02"})
    assert len(week2) == len(TABLE3_WEEKS[2])
    jan = table3_db.select(time_filter={"2021-01"})
    assert {e.date.day.month for e in jan} == {1}


def test_fix_scale_reproduces_weekly_transactions(table3_db):
    stdb = fix_scale(table3_db, "country", "week")
    assert len(stdb) == len(TABLE3_WEEKS)
    assert stdb.excluded == 0
    by_label = {t.label: t.zones for t in stdb.transactions}
    for week, countries in TABLE3_WEEKS.items():
        assert by_label[f"2021-W{week:02d}"] == frozenset(countries)
    ordinals = stdb.intervals()
    assert ordinals == sorted(ordinals)
    # consecutive ISO weeks differ by one ordinal step
    assert ordinals[1] - ordinals[0] == 1  # weeks 1 -> 2
    assert ordinals[2] - ordinals[1] == 2  # weeks 2 -> 4


def test_fix_scale_excludes_imprecise_and_coarse(dims):
    events = [
        Event("fr", DateValue(dt.date(2021, 2, 1), "month"), "ai", "bird", "out1", "x", "r1"),
        Event("europe", DateValue(dt.date(2021, 2, 1)), "ai", "bird", "out1", "x", "r2"),
        Event("paris", DateValue(dt.date(2021, 2, 1)), "ai", "bird", "out1", "x", "r3"),
    ]
    db = EventDatabase("x", dims, events)
    stdb = fix_scale(db, "country", "week")
    # r1 is month-precision (no week), r2 has no country ancestor
    assert stdb.excluded == 2
    assert stdb.zones() == frozenset({"France"})
    by_month = fix_scale(db, "country", "month")
    assert by_month.excluded == 1  # only the continent-level event drops


def test_scaled_select_filters(table3_db):
    stdb = fix_scale(table3_db, "country", "week")
    only_india = stdb.select(zone_filter={"India"})
    assert only_india.zones() == frozenset({"India"})
    assert len(only_india) == 8
    one_week = stdb.select(time_filter={"2021-W06"})
    assert len(one_week) == 1


def test_csv_round_trip(tmp_path, dims, table3_db):
    path = tmp_path / "events.csv"
    write_events_csv(table3_db, path)
    again = load_events_csv(path, dims, name="ref")
    assert len(again) == len(table3_db)
    assert {e.record_id for e in again} == {e.record_id for e in table3_db}


def test_csv_merges_multi_report_rows(tmp_path, dims):
    path = tmp_path / "events.csv"
    path.write_text(
        "system,record_id,location_id,date,disease_id,host_id,source_id,report_source,report_date\n"
        "x,r1,fr,2021-01-04,ai,bird,out1,out1,2021-01-04\n"
        "x,r1,fr,2021-01-04,ai,bird,out1,out2,2021-01-06\n"
    )
    db = load_events_csv(path, dims)
    assert len(db) == 1
    assert db.events[0].reports == (("out1", dt.date(2021, 1, 4)), ("out2", dt.date(2021, 1, 6)))


def test_jsonl_loading(tmp_path, dims):
    path = tmp_path / "events.jsonl"
    path.write_text(
        '{"system":"x","record_id":"r1","location_id":"fr","date":"2021-01-04",'
        '"disease_id":"ai","host_id":"bird","source_id":"out1",'
        '"reports":[{"source_id":"out2","date":"2021-01-05"}]}\n'
    )
    db = load_events_jsonl(path, dims)
    assert db.events[0].reports == (("out2", dt.date(2021, 1, 5)),)


def test_loader_errors_carry_location(tmp_path, dims):
    path = tmp_path / "events.csv"
    path.write_text("system,record_id\nx,r1\n")
    with pytest.raises(DataError):
        load_events_csv(path, dims)


def test_weekly_builder_counts(table3_db):
    assert len(table3_db) == sum(len(v) for v in TABLE3_WEEKS.values())
    assert iso_monday(2021, 1) == dt.date(2021, 1, 4)
