"""Raw news documents to normalized corpus events.

The pipeline has four stages: lexicon-driven entity extraction over
sentences, head-sentence event completion with a bounded refinement
window, location/date normalization (gazetteer disambiguation by country
hints, day-month order inference over the corpus), and overlapping
clustering with attribute fusion that collapses near-duplicate document
events into corpus events. Records that cannot be resolved are
quarantined with a reason, never dropped silently.
"""

from __future__ import annotations

import datetime as dt
import json
import logging
import re
import urllib.parse
import urllib.request
from dataclasses import dataclass
from typing import Optional

from .errors import ConfigError, DataError, UnresolvedLocationError
from .events import Dimensions, Event, EventDatabase, parse_date
from .hierarchy import Hierarchy
from .similarity import SimilarityParams, event_similarity
from .timescale import DateValue

log = logging.getLogger(__name__)

LEXICON_KINDS = ("disease", "host", "location", "nationality")


@dataclass(frozen=True)
class RawDocument:
    doc_id: str
    title: str
    body: str
    publication_date: dt.date
    outlet_id: str
    outlet_country: Optional[str] = None


@dataclass(frozen=True)
class Lexicon:
    kind: str
    entries: dict  # case-folded surface form -> hierarchy node id

    def __post_init__(self):
        if self.kind not in LEXICON_KINDS:
            raise ConfigError(f"unknown lexicon kind {self.kind!r}")


@dataclass(frozen=True)
class GazetteerEntry:
    name: str
    country: str
    admin_level: str
    lat: float
    lon: float
    rank: int


@dataclass(frozen=True)
class EntityMention:
    kind: str  # lexicon kind, or "date"
    surface: str
    start: int  # token offset within the sentence
    length: int  # surface length in tokens
    node_id: Optional[str] = None  # resolved for lexicon hits; None for gazetteer-only locations


@dataclass
class Quarantined:
    doc_id: str
    reason: str
    detail: str

    def as_json(self) -> str:
        return json.dumps(
            {"doc_id": self.doc_id, "reason": self.reason, "detail": self.detail},
            sort_keys=True,
        )


# ---------------------------------------------------------------------------
# Resource loading
# ---------------------------------------------------------------------------

def load_lexicons(path) -> dict:
    """CSV surface_form,node_id,kind -> {kind: Lexicon}."""
    import csv

    by_kind: dict = {k: {} for k in LEXICON_KINDS}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"surface_form", "node_id", "kind"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise DataError("lexicon file needs columns surface_form,node_id,kind", path=path)
        for lineno, row in enumerate(reader, start=2):
            kind = row["kind"].strip()
            if kind not in LEXICON_KINDS:
                raise DataError(f"unknown lexicon kind {kind!r}", path=path, line=lineno)
            surface = row["surface_form"].strip().casefold()
            if surface in by_kind[kind]:
                raise DataError(f"duplicate surface form {surface!r}", path=path, line=lineno)
            by_kind[kind][surface] = row["node_id"].strip()
    return {k: Lexicon(kind=k, entries=v) for k, v in by_kind.items()}


class Gazetteer:
    """Ranked place-name lookup: offline CSV first, optional HTTP second.

    The offline file has columns name,country,admin_level,lat,lon; the
    rank of an entry is its file order among same-name rows. The remote
    service (base URL from the caller, typically the EBSC_GAZETTEER_URL
    environment variable) must answer GET <base>?name=<q> with a JSON
    array of objects using the same field names.
    """

    def __init__(self, path=None, base_url: Optional[str] = None):
        self._local: dict = {}
        self.base_url = base_url
        if path is not None:
            self._load(path)

    def _load(self, path):
        import csv

        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            required = {"name", "country", "admin_level", "lat", "lon"}
            if reader.fieldnames is None or not required.issubset(reader.fieldnames):
                raise DataError("gazetteer file needs columns name,country,admin_level,lat,lon", path=path)
            for lineno, row in enumerate(reader, start=2):
                key = row["name"].strip().casefold()
                entries = self._local.setdefault(key, [])
                try:
                    entries.append(
                        GazetteerEntry(
                            name=row["name"].strip(),
                            country=row["country"].strip(),
                            admin_level=row["admin_level"].strip(),
                            lat=float(row["lat"]),
                            lon=float(row["lon"]),
                            rank=len(entries) + 1,
                        )
                    )
                except ValueError:
                    raise DataError("invalid coordinates", path=path, line=lineno) from None

    def lookup(self, name: str) -> list:
        key = name.strip().casefold()
        hits = list(self._local.get(key, ()))
        if hits or not self.base_url:
            return hits
        url = f"{self.base_url}?name={urllib.parse.quote(name)}"
        try:
            with urllib.request.urlopen(url, timeout=10) as resp:
                payload = json.loads(resp.read().decode("utf-8"))
        except Exception as exc:  # network failure falls back to no hits
            log.warning("remote gazetteer lookup failed for %r: %s", name, exc)
            return []
        out = []
        for i, row in enumerate(payload, start=1):
            out.append(
                GazetteerEntry(
                    name=row["name"],
                    country=row["country"],
                    admin_level=row["admin_level"],
                    lat=float(row["lat"]),
                    lon=float(row["lon"]),
                    rank=i,
                )
            )
        return out

    def known_names(self):
        return self._local.keys()


# ---------------------------------------------------------------------------
# Sentence splitting and entity extraction
# ---------------------------------------------------------------------------

_SENTENCE_RE = re.compile(r"(?<=[.!?])\s+(?=[\"'(]?[A-Z0-9])")
_TOKEN_RE = re.compile(r"[\w'-]+")

_DATE_PATTERNS = (
    re.compile(r"\b\d{4}-\d{2}-\d{2}\b"),
    re.compile(r"\b\d{1,2}[-/]\d{1,2}[-/]\d{4}\b"),
    re.compile(r"\b\d{4}-\d{2}\b"),
    re.compile(r"\b(?:19|20)\d{2}\b"),
)


def split_sentences(text: str) -> list:
    text = text.strip()
    if not text:
        return []
    return [s for s in _SENTENCE_RE.split(text) if s.strip()]


def _tokenize(sentence: str):
    return [(m.group(0), m.start()) for m in _TOKEN_RE.finditer(sentence)]


def extract_entities(doc: RawDocument, lexicons: dict, gazetteer: Optional[Gazetteer] = None) -> list:
    """Entity mentions per sentence (title first), longest match wins.

    Surfaces come from the lexicons; additionally, any gazetteer name
    qualifies as an unresolved location mention. Date expressions are
    matched by pattern and reported with kind "date".
    """
    surface_map: dict = {}  # token tuple -> (kind, node_id)
    for kind in LEXICON_KINDS:
        lex = lexicons.get(kind)
        if lex is None:
            continue
        for surface, node_id in lex.entries.items():
            key = tuple(surface.split())
            surface_map.setdefault(key, (kind, node_id))
    if gazetteer is not None:
        for name in gazetteer.known_names():
            key = tuple(name.split())
            surface_map.setdefault(key, ("location", None))
    max_len = max((len(k) for k in surface_map), default=1)

    sentences = [doc.title] + split_sentences(doc.body)
    out = []
    for sentence in sentences:
        tokens = _tokenize(sentence)
        folded = [t.casefold() for t, _pos in tokens]
        mentions = []
        i = 0
        while i < len(folded):
            hit = None
            for width in range(min(max_len, len(folded) - i), 0, -1):
                key = tuple(folded[i : i + width])
                if key in surface_map:
                    kind, node_id = surface_map[key]
                    hit = EntityMention(
                        kind=kind,
                        surface=" ".join(t for t, _p in tokens[i : i + width]),
                        start=i,
                        length=width,
                        node_id=node_id,
                    )
                    break
            if hit is not None:
                mentions.append(hit)
                i += hit.length
            else:
                i += 1
        for pattern in _DATE_PATTERNS:
            for m in pattern.finditer(sentence):
                if any(d.kind == "date" and d.surface.find(m.group(0)) >= 0 for d in mentions):
                    continue
                if any(other.search(m.group(0)) and other is not pattern
                       for other in _DATE_PATTERNS[: _DATE_PATTERNS.index(pattern)]):
                    continue
                mentions.append(EntityMention(kind="date", surface=m.group(0), start=-1, length=0))
        out.append(mentions)
    return out


# ---------------------------------------------------------------------------
# Date normalization
# ---------------------------------------------------------------------------

def infer_date_format(raw_dates) -> str:
    """Corpus-level day/month order hint: "DM" or "MD".

    Counts the rows where one reading is impossible (a field above 12
    forces the interpretation); the majority wins, default "DM".
    """
    dm = md = 0
    for raw in raw_dates:
        m = re.fullmatch(r"(\d{1,2})[-/](\d{1,2})[-/]\d{4}", raw.strip())
        if not m:
            continue
        a, b = int(m.group(1)), int(m.group(2))
        if a > 12 and b <= 12:
            dm += 1
        elif b > 12 and a <= 12:
            md += 1
    return "MD" if md > dm else "DM"


def normalize_date(raw: str, format_hint: str = "DM") -> DateValue:
    """Free-text date to a day/month/year-precision value."""
    raw = raw.strip()
    if format_hint not in ("DM", "MD"):
        raise ConfigError(f"format hint must be DM or MD, not {format_hint!r}")
    if re.fullmatch(r"\d{4}(-\d{2}(-\d{2})?)?", raw):
        return parse_date(raw)
    m = re.fullmatch(r"(\d{1,2})[-/](\d{1,2})[-/](\d{4})", raw)
    if m:
        a, b, year = int(m.group(1)), int(m.group(2)), int(m.group(3))
        if a > 12 and b > 12:
            raise DataError(f"impossible date {raw!r}")
        if a > 12:
            day, month = a, b
        elif b > 12:
            day, month = b, a
        elif format_hint == "DM":
            day, month = a, b
        else:
            day, month = b, a
        try:
            return DateValue(dt.date(year, month, day), "day")
        except ValueError:
            raise DataError(f"invalid calendar date {raw!r}") from None
    raise DataError(f"unparseable date {raw!r}")


# ---------------------------------------------------------------------------
# Geocoding
# ---------------------------------------------------------------------------

def _country_label(hierarchy: Hierarchy, node_id: str) -> Optional[str]:
    node = hierarchy.ancestor_at_admin_level(node_id, "country")
    return node.label if node else None


def geocode(
    name: str,
    doc: RawDocument,
    gazetteer: Gazetteer,
    hierarchy: Hierarchy,
    lexicons: dict,
    title_mentions=(),
    country: Optional[str] = None,
):
    """Resolve a place name to a location-hierarchy node.

    Homonyms are disambiguated by a country hint, tried in order:
    explicitly supplied country, country of a location named in the
    title, country of a nationality named in the title, the outlet's
    country. Without a usable hint the top-ranked entry wins.
    """
    hits = gazetteer.lookup(name)
    if not hits:
        raise UnresolvedLocationError(f"no gazetteer entry for {name!r}")

    hints = []
    if country:
        hints.append(country)
    for m in title_mentions:
        if m.kind == "location" and m.node_id is not None and m.surface.casefold() != name.casefold():
            c = _country_label(hierarchy, m.node_id)
            if c:
                hints.append(c)
    nat = lexicons.get("nationality")
    if nat is not None:
        for m in title_mentions:
            if m.kind == "nationality" and m.node_id is not None:
                c = _country_label(hierarchy, m.node_id)
                if c:
                    hints.append(c)
    if doc.outlet_country:
        hints.append(doc.outlet_country)

    chosen = hits[0]
    for hint in hints:
        matched = [h for h in hits if h.country.casefold() == hint.casefold()]
        if matched:
            chosen = matched[0]
            break
    node = _node_for_entry(hierarchy, chosen)
    if node is None:
        raise UnresolvedLocationError(
            f"gazetteer entry {chosen.name!r} ({chosen.country}) has no hierarchy node"
        )
    return node


def _node_for_entry(hierarchy: Hierarchy, entry: GazetteerEntry):
    node = hierarchy.by_label(entry.name)
    if node is None:
        return None
    country = _country_label(hierarchy, node.node_id)
    if country is not None and country.casefold() != entry.country.casefold():
        return None
    return node


# ---------------------------------------------------------------------------
# Event completion
# ---------------------------------------------------------------------------

@dataclass
class DocumentEvent:
    doc_id: str
    outlet_id: str
    location: str  # hierarchy node id
    date: DateValue
    disease: str
    host: str
    sentence_index: int
    ambiguous: tuple = ()  # dimensions where the head offered several values


def _most_specific(mentions, hierarchy: Hierarchy):
    """Deepest node among the mentions, first mention breaking ties."""
    best = None
    for m in mentions:
        depth = hierarchy.node(m.node_id).depth
        if best is None or depth > best[0]:
            best = (depth, m)
    return best[1] if best else None


def complete_events(
    doc: RawDocument,
    entities: list,
    dims: Dimensions,
    gazetteer: Gazetteer,
    lexicons: dict,
    k: int = 2,
    format_hint: str = "DM",
) -> tuple:
    """Document events from head sentences, refined over a k-sentence
    window (more-specific values only). Returns (events, quarantined).
    """
    if k < 0:
        raise ConfigError("completion window k must be non-negative")
    hier = {"location": dims.location, "disease": dims.disease, "host": dims.host}
    title_mentions = entities[0] if entities else []
    events = []
    quarantined = []

    def resolve_location(m: EntityMention):
        if m.node_id is not None:
            return dims.location.node(m.node_id)
        return geocode(
            m.surface, doc, gazetteer, dims.location, lexicons, title_mentions=title_mentions
        )

    for idx, mentions in enumerate(entities):
        by_kind: dict = {}
        for m in mentions:
            by_kind.setdefault(m.kind, []).append(m)
        if not ({"location", "disease", "host"} <= by_kind.keys()):
            continue
        ambiguous = tuple(
            kind for kind in ("location", "disease", "host") if len(by_kind[kind]) > 1
        )
        try:
            loc_nodes = [resolve_location(m) for m in by_kind["location"]]
        except UnresolvedLocationError as exc:
            quarantined.append(Quarantined(doc.doc_id, "unresolved_location", str(exc)))
            continue
        location = max(loc_nodes, key=lambda n: n.depth)
        disease = _most_specific(by_kind["disease"], dims.disease)
        host = _most_specific(by_kind["host"], dims.host)
        date = None
        if "date" in by_kind:
            try:
                date = normalize_date(by_kind["date"][0].surface, format_hint)
            except DataError as exc:
                quarantined.append(Quarantined(doc.doc_id, "bad_date", str(exc)))
                continue
        if date is None:
            date = DateValue(doc.publication_date, "day")

        current = {
            "location": location.node_id,
            "disease": disease.node_id,
            "host": host.node_id,
        }
        for later in entities[idx + 1 : idx + 1 + k]:
            for m in later:
                if m.kind not in hier:
                    continue
                if m.kind == "location" and m.node_id is None:
                    try:
                        cand = resolve_location(m).node_id
                    except UnresolvedLocationError:
                        continue
                elif m.node_id is None:
                    continue
                else:
                    cand = m.node_id
                h = hier[m.kind]
                cur = current[m.kind]
                if (
                    cand != cur
                    and h.is_ancestor_or_self(cur, cand)
                    and h.node(cand).depth > h.node(cur).depth
                ):
                    current[m.kind] = cand
        if ambiguous:
            log.info(
                "document %s sentence %d: multiple %s values; kept the most specific",
                doc.doc_id, idx, "/".join(ambiguous),
            )
        events.append(
            DocumentEvent(
                doc_id=doc.doc_id,
                outlet_id=doc.outlet_id,
                location=current["location"],
                date=date,
                disease=current["disease"],
                host=current["host"],
                sentence_index=idx,
                ambiguous=ambiguous,
            )
        )
    return events, quarantined


# ---------------------------------------------------------------------------
# Overlapping clustering and fusion
# ---------------------------------------------------------------------------

def _vote(values, hierarchy: Hierarchy) -> str:
    """Majority vote; ties prefer the most specific value, then the
    lexicographically smallest label."""
    counts: dict = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    return min(
        counts,
        key=lambda v: (-counts[v], -hierarchy.node(v).depth, hierarchy.node(v).label),
    )


def _fuse(members, dims: Dimensions, system: str) -> Event:
    date = min((m.date for m in members), key=lambda d: (d.day, d.precision))
    reports = sorted(
        {r for m in members for r in m.reports}, key=lambda r: (r[1], r[0])
    )
    return Event(
        location=_vote([m.location for m in members], dims.location),
        date=date,
        disease=_vote([m.disease for m in members], dims.disease),
        host=_vote([m.host for m in members], dims.host),
        source=reports[0][0],
        system=system,
        record_id="",
        reports=tuple(reports),
    )


def _cluster_pass(events, dims, params, threshold):
    """One overlapping-clustering sweep over a list of Events."""
    depth = [dims.location.node(e.location).depth for e in events]
    order = sorted(
        range(len(events)),
        key=lambda i: (-depth[i], events[i].date.day, events[i].record_id),
    )
    clusters = []
    seen = set()
    for i in order:
        members = [i]
        for j in order:
            if j == i or depth[j] < depth[i]:
                continue
            if event_similarity(events[i], events[j], dims, params) > threshold:
                members.append(j)
        key = frozenset(members)
        if key not in seen:
            seen.add(key)
            clusters.append(members)
    # drop clusters fully contained in a larger one (their seed already
    # joined the bigger group)
    keys = [frozenset(c) for c in clusters]
    return [
        c for i, c in enumerate(clusters)
        if not any(i != j and keys[i] < keys[j] for j in range(len(clusters)))
    ]


def build_corpus_events(
    doc_events,
    dims: Dimensions,
    params: Optional[SimilarityParams] = None,
    cluster_threshold: float = 2.0,
    system: str = "corpus",
) -> EventDatabase:
    """Collapse document events into corpus events.

    Events seed clusters from the most spatially specific level down;
    same-or-more-specific events join every cluster they resemble above
    the threshold, and each cluster fuses by majority vote (ties toward
    specificity), oldest date, and the union of reporting outlets. The
    pass repeats on its own output until stable, which makes the
    operation idempotent.
    """
    params = params or SimilarityParams()
    current = []
    for m in doc_events:
        if isinstance(m, Event):
            current.append(m)
        else:
            current.append(
                Event(
                    location=m.location, date=m.date, disease=m.disease, host=m.host,
                    source=m.outlet_id, system=system,
                    record_id=f"{m.doc_id}:{m.sentence_index}",
                    reports=((m.outlet_id, m.date.day),),
                )
            )
    for _ in range(len(current) + 1):
        clusters = _cluster_pass(current, dims, params, cluster_threshold)
        fused = [_fuse([current[i] for i in c], dims, system) for c in clusters]
        fused.sort(key=lambda e: (e.date.day, e.location, e.disease, e.host, e.reports))
        unique = []
        seen = set()
        for ev in fused:
            key = (ev.location, ev.date, ev.disease, ev.host, ev.reports)
            if key not in seen:
                seen.add(key)
                unique.append(ev)
        stable = len(unique) == len(current) and {
            (e.location, e.date, e.disease, e.host, e.reports) for e in current
        } == seen
        current = [
            replace_record_id(ev, f"{system}-{i:04d}") for i, ev in enumerate(unique, start=1)
        ]
        if stable:
            break
    return EventDatabase(system, dims, current)


def replace_record_id(ev: Event, record_id: str) -> Event:
    from dataclasses import replace

    return replace(ev, record_id=record_id)


# ---------------------------------------------------------------------------
# Corpus driver
# ---------------------------------------------------------------------------

def load_documents_jsonl(path) -> list:
    docs = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"invalid JSON: {exc}", path=path, line=lineno) from None
            required = {"doc_id", "title", "body", "publication_date", "outlet_id"}
            missing = required - rec.keys()
            if missing:
                raise DataError(f"missing keys {sorted(missing)}", path=path, line=lineno)
            if rec["doc_id"] in seen:
                raise DataError(f"duplicate doc_id {rec['doc_id']!r}", path=path, line=lineno)
            seen.add(rec["doc_id"])
            try:
                pub = dt.date.fromisoformat(rec["publication_date"])
            except ValueError:
                raise DataError("invalid publication_date", path=path, line=lineno) from None
            docs.append(
                RawDocument(
                    doc_id=rec["doc_id"],
                    title=rec["title"],
                    body=rec["body"],
                    publication_date=pub,
                    outlet_id=rec["outlet_id"],
                    outlet_country=rec.get("outlet_country"),
                )
            )
    return docs


def normalize_corpus(
    docs,
    dims: Dimensions,
    lexicons: dict,
    gazetteer: Gazetteer,
    k: int = 2,
    cluster_threshold: float = 2.0,
    params: Optional[SimilarityParams] = None,
    system: str = "corpus",
):
    """Full pipeline over a document corpus.

    Returns (corpus EventDatabase, document events, quarantined records).
    """
    raw_dates = []
    extracted = []
    for doc in docs:
        entities = extract_entities(doc, lexicons, gazetteer)
        extracted.append((doc, entities))
        for mentions in entities:
            raw_dates.extend(m.surface for m in mentions if m.kind == "date")
    hint = infer_date_format(raw_dates)
    doc_events = []
    quarantined = []
    for doc, entities in extracted:
        evs, bad = complete_events(
            doc, entities, dims, gazetteer, lexicons, k=k, format_hint=hint
        )
        doc_events.extend(evs)
        quarantined.extend(bad)
    db = build_corpus_events(
        doc_events, dims, params=params, cluster_threshold=cluster_threshold, system=system
    )
    return db, doc_events, quarantined


def write_quarantine(quarantined, path):
    with open(path, "w", encoding="utf-8") as fh:
        for q in quarantined:
            fh.write(q.as_json() + "\n")
