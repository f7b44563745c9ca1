"""Event databases, scale fixing, selection and active domains.

An event is a five-dimensional record (location, date, disease, host,
source) whose attributes reference nodes in the dimension hierarchies.
Databases are immutable after construction; scale fixing projects a
database onto a spatial admin level and a temporal granularity, yielding
the time-ordered transaction view used by the pattern miners.
"""

from __future__ import annotations

import csv
import datetime as dt
import json
import logging
from dataclasses import dataclass, replace
from typing import Optional

from .errors import ConfigError, DataError
from .hierarchy import ADMIN_LEVELS, Hierarchy
from .timescale import DateValue, check_scale, interval_label, interval_ordinal

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Event:
    location: str  # node id in H_Z
    date: DateValue
    disease: str  # node id in H_D
    host: str  # node id in H_H
    source: str  # node id in H_S
    system: str
    record_id: str
    # (source node id, publication day) per reporting document; used by the
    # source-network analyses. Defaults to the event's own source and date.
    reports: tuple = ()


@dataclass(frozen=True)
class Dimensions:
    location: Hierarchy
    disease: Hierarchy
    host: Hierarchy
    source: Hierarchy

    def __post_init__(self):
        expected = {"location": "Z", "disease": "D", "host": "H", "source": "S"}
        for attr, dim in expected.items():
            h = getattr(self, attr)
            if h.dimension_id != dim:
                raise ConfigError(f"{attr} hierarchy has dimension {h.dimension_id}, expected {dim}")


class EventDatabase:
    """A finite set of events plus the hierarchies they resolve in."""

    def __init__(self, name: str, dimensions: Dimensions, events):
        self.name = name
        self.dimensions = dimensions
        events = tuple(events)
        for e in events:
            dimensions.location.node(e.location)
            dimensions.disease.node(e.disease)
            dimensions.host.node(e.host)
            dimensions.source.node(e.source)
            for outlet, _day in e.reports:
                dimensions.source.node(outlet)
        self.events = events

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def active_domain(self, dim: str, level=None) -> frozenset:
        """Labels of all hierarchy nodes of dimension ``dim`` occurring in
        the database, optionally restricted to one level.

        For Z the level is an admin level name or a depth; for T it is a
        temporal scale (values are interval labels); for D/H/S a depth.
        """
        if dim == "T":
            scale = check_scale(level or "day")
            return frozenset(
                e.date.label(scale) for e in self.events if e.date.supports(scale)
            )
        hier = {
            "Z": self.dimensions.location,
            "D": self.dimensions.disease,
            "H": self.dimensions.host,
            "S": self.dimensions.source,
        }.get(dim)
        if hier is None:
            raise ConfigError(f"unknown dimension {dim!r}")
        attr = {"Z": "location", "D": "disease", "H": "host", "S": "source"}[dim]
        values = set()
        for e in self.events:
            node = hier.node(getattr(e, attr))
            if level is None:
                values.add(node.label)
            elif dim == "Z" and isinstance(level, str) and level in ADMIN_LEVELS:
                anc = hier.ancestor_at_admin_level(node.node_id, level)
                if anc is not None and anc.node_id == node.node_id:
                    values.add(node.label)
            elif node.depth == int(level):
                values.add(node.label)
        return frozenset(values)

    def select(self, zone_filter=frozenset(), time_filter=frozenset()) -> "EventDatabase":
        """Selection operator: keep events matching every supplied filter.

        A zone value matches an event when it labels the event's location
        or any of its ancestors; a time value matches when it equals the
        event's interval label at any supported scale. Empty filters are
        the identity.
        """
        zone_filter = frozenset(zone_filter)
        time_filter = frozenset(time_filter)
        _warn_unknown_filters(self, zone_filter, time_filter)
        kept = []
        for e in self.events:
            if zone_filter:
                chain = {n.label for n in self.dimensions.location.ancestors(e.location)}
                if not (chain & zone_filter):
                    continue
            if time_filter:
                labels = {
                    e.date.label(s)
                    for s in ("year", "month", "biweek", "week", "day")
                    if e.date.supports(s)
                }
                labels.add(e.date.isoformat())
                if not (labels & time_filter):
                    continue
            kept.append(e)
        return EventDatabase(self.name, self.dimensions, kept)


@dataclass(frozen=True)
class Transaction:
    ordinal: int
    label: str
    day: dt.date  # first day of the interval, for season pooling
    zones: frozenset


@dataclass(frozen=True)
class ScaledEventDatabase:
    """Scale-fixed view: one transaction per active time interval."""

    name: str
    spatial_scale: str
    temporal_scale: str
    transactions: tuple
    excluded: int = 0

    def __post_init__(self):
        ordinals = [t.ordinal for t in self.transactions]
        if ordinals != sorted(set(ordinals)):
            raise DataError("transactions must be strictly time-ordered and distinct")

    def __len__(self):
        return len(self.transactions)

    def zones(self) -> frozenset:
        out = set()
        for t in self.transactions:
            out |= t.zones
        return frozenset(out)

    def intervals(self):
        return [t.ordinal for t in self.transactions]

    def select(self, zone_filter=frozenset(), time_filter=frozenset()) -> "ScaledEventDatabase":
        zone_filter = frozenset(zone_filter)
        time_filter = frozenset(time_filter)
        unknown_z = zone_filter - self.zones()
        if unknown_z:
            log.warning("zone filter values not in active domain: %s", sorted(unknown_z))
        labels = {t.label for t in self.transactions}
        unknown_t = time_filter - labels
        if unknown_t:
            log.warning("time filter values not in active domain: %s", sorted(unknown_t))
        kept = []
        for t in self.transactions:
            if time_filter and t.label not in time_filter:
                continue
            zones = t.zones & zone_filter if zone_filter else t.zones
            if zones:
                kept.append(replace(t, zones=frozenset(zones)))
        return replace(self, transactions=tuple(kept))


def _warn_unknown_filters(db: EventDatabase, zone_filter, time_filter):
    if zone_filter:
        known = {
            n.label
            for e in db.events
            for n in db.dimensions.location.ancestors(e.location)
        }
        unknown = zone_filter - known
        if unknown:
            log.warning("zone filter values not in active domain: %s", sorted(unknown))


def fix_scale(db: EventDatabase, spatial_scale: str, temporal_scale: str) -> ScaledEventDatabase:
    """Discretize the spatial and temporal dimensions of ``db``.

    Every event is mapped to its location ancestor at ``spatial_scale``
    (an admin level) and its date truncated to ``temporal_scale``; events
    lacking an ancestor at exactly that level, or whose date is too coarse
    for the temporal scale, are excluded and counted.
    """
    if spatial_scale not in ADMIN_LEVELS:
        raise ConfigError(f"unknown spatial scale {spatial_scale!r}")
    check_scale(temporal_scale)
    hz = db.dimensions.location
    buckets: dict = {}
    excluded = 0
    for e in db.events:
        if not e.date.supports(temporal_scale):
            excluded += 1
            continue
        anc = hz.ancestor_at_admin_level(e.location, spatial_scale)
        if anc is None:
            excluded += 1
            continue
        ordinal = e.date.ordinal(temporal_scale)
        label = e.date.label(temporal_scale)
        key = (ordinal, label)
        buckets.setdefault(key, (set(), e.date.day))[0].add(anc.label)
    transactions = []
    for (ordinal, label), (zones, day) in sorted(buckets.items()):
        transactions.append(Transaction(ordinal, label, day, frozenset(zones)))
    return ScaledEventDatabase(
        name=db.name,
        spatial_scale=spatial_scale,
        temporal_scale=temporal_scale,
        transactions=tuple(transactions),
        excluded=excluded,
    )


def parse_date(text: str) -> DateValue:
    """Parse an ISO-8601 day, month (YYYY-MM) or year (YYYY) string."""
    text = text.strip()
    try:
        if len(text) == 4:
            return DateValue(dt.date(int(text), 1, 1), "year")
        if len(text) == 7:
            year, month = text.split("-")
            return DateValue(dt.date(int(year), int(month), 1), "month")
        return DateValue(dt.date.fromisoformat(text), "day")
    except ValueError:
        raise DataError(f"invalid ISO date {text!r}") from None


_EVENT_FIELDS = ("system", "record_id", "location_id", "date", "disease_id", "host_id", "source_id")


def _finish_event(dims: Dimensions, rec: dict, reports) -> Event:
    date = parse_date(rec["date"])
    if not reports:
        reports = [(rec["source_id"], date.day)]
    reports = tuple(sorted(set(reports), key=lambda r: (r[1], r[0])))
    return Event(
        location=rec["location_id"],
        date=date,
        disease=rec["disease_id"],
        host=rec["host_id"],
        source=rec["source_id"],
        system=rec["system"],
        record_id=rec["record_id"],
        reports=reports,
    )


def load_events_csv(path, dimensions: Dimensions, name: Optional[str] = None) -> EventDatabase:
    """Load an event database from CSV.

    Columns: system,record_id,location_id,date,disease_id,host_id,source_id
    with an optional report_date column. Rows sharing (system, record_id)
    merge into one event with multiple outlet reports; the first row wins
    for the event attributes.
    """
    grouped: dict = {}
    order = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not set(_EVENT_FIELDS).issubset(reader.fieldnames):
            raise DataError(f"missing required columns {','.join(_EVENT_FIELDS)}", path=path)
        for lineno, row in enumerate(reader, start=2):
            try:
                key = (row["system"], row["record_id"])
                report_day = parse_date(row.get("report_date") or row["date"]).day
                report_source = row.get("report_source") or row["source_id"]
                if key not in grouped:
                    grouped[key] = (dict(row), [])
                    order.append(key)
                grouped[key][1].append((report_source, report_day))
            except DataError as exc:
                raise DataError(str(exc), path=path, line=lineno) from None
    events = []
    for key in order:
        rec, reports = grouped[key]
        try:
            events.append(_finish_event(dimensions, rec, reports))
        except DataError as exc:
            raise DataError(f"record {key[1]}: {exc}", path=path) from None
    db_name = name or (events[0].system if events else str(path))
    return EventDatabase(db_name, dimensions, events)


def load_events_jsonl(path, dimensions: Dimensions, name: Optional[str] = None) -> EventDatabase:
    """Load events from JSON-lines; same keys as the CSV, with an optional
    ``reports`` list of {source_id, date} objects."""
    events = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"invalid JSON: {exc}", path=path, line=lineno) from None
            missing = [k for k in _EVENT_FIELDS if k not in rec]
            if missing:
                raise DataError(f"missing keys {missing}", path=path, line=lineno)
            try:
                reports = [
                    (r["source_id"], parse_date(r["date"]).day)
                    for r in rec.get("reports", [])
                ]
                events.append(_finish_event(dimensions, rec, reports))
            except DataError as exc:
                raise DataError(str(exc), path=path, line=lineno) from None
    db_name = name or (events[0].system if events else str(path))
    return EventDatabase(db_name, dimensions, events)


def write_events_csv(db: EventDatabase, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_EVENT_FIELDS + ("report_source", "report_date"))
        for e in db.events:
            for outlet, day in e.reports or ((e.source, e.date.day),):
                writer.writerow(
                    [e.system, e.record_id, e.location, e.date.isoformat(),
                     e.disease, e.host, e.source, outlet, day.isoformat()]
                )
