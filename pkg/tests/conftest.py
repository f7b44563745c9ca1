import datetime as dt

import pytest

from ebsc.events import Dimensions, Event, EventDatabase
from ebsc.hierarchy import Hierarchy, HierarchyNode
from ebsc.timescale import DateValue


def _n(node_id, label, depth, parent, admin=None, lat=None, lon=None):
    return HierarchyNode(
        node_id=node_id, label=label, depth=depth, parent_id=parent,
        admin_level=admin, lat=lat, lon=lon,
    )


def location_hierarchy() -> Hierarchy:
    nodes = [
        _n("ALL_Z", "ALL_Z", 0, None, "world"),
        _n("europe", "Europe", 1, "ALL_Z", "continent", 54.0, 15.0),
        _n("asia", "Asia", 1, "ALL_Z", "continent", 34.0, 100.0),
        _n("fr", "France", 2, "europe", "country", 46.2, 2.2),
        _n("it", "Italy", 2, "europe", "country", 42.8, 12.8),
        _n("es", "Spain", 2, "europe", "country", 40.4, -3.7),
        _n("pt", "Portugal", 2, "europe", "country", 39.5, -8.0),
        _n("uk", "United Kingdom", 2, "europe", "country", 54.0, -2.0),
        _n("cn", "China", 2, "asia", "country", 35.0, 103.0),
        _n("in", "India", 2, "asia", "country", 21.0, 78.0),
        _n("np", "Nepal", 2, "asia", "country", 28.4, 84.1),
        _n("pk", "Pakistan", 2, "asia", "country", 30.4, 69.3),
        _n("idf", "Ile-de-France", 3, "fr", "region", 48.7, 2.5),
        _n("paris", "Paris", 4, "idf", "city", 48.86, 2.35),
        _n("england", "England", 3, "uk", "region", 52.5, -1.5),
        _n("lancashire", "Lancashire", 4, "england", "subregion", 53.8, -2.7),
        _n("west-lancashire", "West Lancashire", 5, "lancashire", "subregion", 53.6, -2.8),
        _n("skelmersdale", "Skelmersdale", 6, "west-lancashire", "city", 53.55, -2.77),
    ]
    return Hierarchy("Z", nodes)


def disease_hierarchy() -> Hierarchy:
    nodes = [
        _n("ALL_D", "ALL_D", 0, None),
        _n("ai", "avian influenza", 1, "ALL_D"),
        _n("hpai", "highly pathogenic avian influenza", 2, "ai"),
        _n("lpai", "low pathogenic avian influenza", 2, "ai"),
        _n("h7n9", "H7N9", 3, "hpai"),
        _n("h5n1", "H5N1", 3, "hpai"),
        _n("wnv", "West Nile virus", 1, "ALL_D"),
    ]
    return Hierarchy("D", nodes)


def host_hierarchy() -> Hierarchy:
    nodes = [
        _n("ALL_H", "ALL_H", 0, None),
        _n("bird", "bird", 1, "ALL_H"),
        _n("captive-bird", "captive bird", 2, "bird"),
        _n("wild-bird", "wild bird", 2, "bird"),
        _n("human", "human", 1, "ALL_H"),
        _n("mosquito", "mosquito", 1, "ALL_H"),
    ]
    return Hierarchy("H", nodes)


def source_hierarchy() -> Hierarchy:
    nodes = [_n("ALL_S", "ALL_S", 0, None)] + [
        _n(f"out{i}", f"Outlet {i}", 1, "ALL_S") for i in range(1, 7)
    ] + [_n("woah", "WOAH", 1, "ALL_S")]
    return Hierarchy("S", nodes)


@pytest.fixture(scope="session")
def dims() -> Dimensions:
    return Dimensions(
        location=location_hierarchy(),
        disease=disease_hierarchy(),
        host=host_hierarchy(),
        source=source_hierarchy(),
    )


# Weekly country fixture: who reports an event in which ISO week of 2021.
TABLE3_WEEKS = {
    1: ("France", "Italy", "China", "India"),
    2: ("France", "Italy", "Spain", "China", "India", "Nepal"),
    4: ("France", "Spain", "Portugal", "India", "Nepal"),
    6: ("Spain", "Portugal", "India"),
    7: ("Spain", "Portugal", "India"),
    8: ("Portugal", "India", "Pakistan"),
    10: ("India", "Pakistan"),
    11: ("Italy", "India", "Pakistan"),
}

# Border-sharing relation used with the weekly country fixture.
CLOSENESS = {
    "France": {"Italy", "Spain", "Switzerland", "Germany", "Belgium", "Luxembourg"},
    "Italy": {"France", "Switzerland", "Germany", "Slovenia", "Austria", "Liechtenstein"},
    "Spain": {"France", "Portugal"},
    "Portugal": {"Spain"},
    "China": {"Mongolia", "Russia", "Afghanistan", "Tajikistan", "Kyrgyzstan",
              "Nepal", "India", "North Korea"},
    "India": {"China", "Pakistan", "Nepal", "Bhutan", "Bangladesh"},
    "Nepal": {"China", "India"},
    "Pakistan": {"Iran", "Afghanistan", "China", "India"},
}


def iso_monday(year: int, week: int) -> dt.date:
    return dt.date.fromisocalendar(year, week, 1)


def weekly_events(dims, weeks=TABLE3_WEEKS, system="ref", year=2021,
                  disease="ai", host="bird", source="out1"):
    hz = dims.location
    events = []
    for week in sorted(weeks):
        day = iso_monday(year, week)
        for country in weeks[week]:
            node = hz.by_label(country)
            events.append(
                Event(
                    location=node.node_id,
                    date=DateValue(day),
                    disease=disease,
                    host=host,
                    source=source,
                    system=system,
                    record_id=f"{system}-{week:02d}-{node.node_id}",
                )
            )
    return EventDatabase(system, dims, events)


@pytest.fixture()
def table3_db(dims) -> EventDatabase:
    return weekly_events(dims)


def table6_dimensions() -> Dimensions:
    location = Hierarchy("Z", [
        _n("ALL_Z", "ALL_Z", 0, None, "world"),
        _n("fr", "France", 1, "ALL_Z", "country", 46.2, 2.2),
        _n("it", "Italy", 1, "ALL_Z", "country", 42.8, 12.8),
        _n("es", "Spain", 1, "ALL_Z", "country", 40.4, -3.7),
        _n("idf", "Ile de France", 2, "fr", "region", 48.7, 2.5),
        _n("paris", "Paris", 3, "idf", "city", 48.86, 2.35),
    ])
    disease = Hierarchy("D", [
        _n("ALL_D", "ALL_D", 0, None),
        _n("ai", "AI", 1, "ALL_D"),
        _n("hpai", "HPAI", 2, "ai"),
        _n("h5n1", "H5N1", 3, "hpai"),
    ])
    host = Hierarchy("H", [
        _n("ALL_H", "ALL_H", 0, None),
        _n("bird", "bird", 1, "ALL_H"),
        _n("wild-bird", "wild bird", 2, "bird"),
    ])
    return Dimensions(location=location, disease=disease, host=host, source=source_hierarchy())


@pytest.fixture()
def dims6() -> Dimensions:
    return table6_dimensions()


@pytest.fixture()
def table6_db(dims6) -> EventDatabase:
    events = [
        Event("paris", DateValue(dt.date(2021, 1, 4)), "ai", "bird", "out1", "toy", "t1"),
        Event("it", DateValue(dt.date(2021, 1, 11)), "ai", "wild-bird", "out1", "toy", "t2"),
        Event("es", DateValue(dt.date(2021, 1, 18)), "h5n1", "wild-bird", "out1", "toy", "t3"),
    ]
    return EventDatabase("toy", dims6, events)
