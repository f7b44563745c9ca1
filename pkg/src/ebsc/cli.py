"""Command-line surface: normalize, match, mine, eval, report.

Configuration comes from a TOML file; every relevant flag overrides its
config key. Exit codes: 0 on success, 2 for configuration or input
errors, 1 for internal failures.
"""

from __future__ import annotations

import math
import os
import sys
from pathlib import Path

import click

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .errors import ConfigError, DataError, EbscError
from .events import (
    Dimensions,
    load_events_csv,
    load_events_jsonl,
    write_events_csv,
)
from .hierarchy import load_hierarchy
from .matching import match_events, write_matching_csv
from .metrics import EvaluationConfig
from .mining import MiningParams, load_closeness_csv, mine_multidimensional, mine_spatial, write_patterns
from .normalize import Gazetteer, load_documents_jsonl, load_lexicons, normalize_corpus, write_quarantine
from .report import DIMENSION_NAMES, run_evaluation, write_report
from .similarity import SimilarityParams
from .sources import load_blocklist

_HIER_KEYS = {"location": "Z", "disease": "D", "host": "H", "source": "S"}


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from None


def _dimensions(cfg) -> Dimensions:
    paths = cfg.get("hierarchies", {})
    missing = [k for k in _HIER_KEYS if k not in paths]
    if missing:
        raise ConfigError(f"config lacks hierarchy paths for: {', '.join(missing)}")
    return Dimensions(
        location=load_hierarchy(paths["location"], "Z"),
        disease=load_hierarchy(paths["disease"], "D"),
        host=load_hierarchy(paths["host"], "H"),
        source=load_hierarchy(paths["source"], "S"),
    )


def _load_db(path, dims, name=None):
    path = Path(path)
    if path.suffix in (".jsonl", ".ndjson"):
        return load_events_jsonl(path, dims, name=name)
    return load_events_csv(path, dims, name=name)


def _similarity_params(cfg) -> SimilarityParams:
    sim = cfg.get("similarity", {})
    kwargs = {}
    if "penalties" in sim:
        kwargs["penalties"] = {k: float(v) for k, v in sim["penalties"].items()}
    if "date_window_days" in sim:
        kwargs["date_window_days"] = float(sim["date_window_days"])
    return SimilarityParams(**kwargs)


def _parse_iota(value) -> float:
    if isinstance(value, str) and value.lower() in ("inf", "infinity"):
        return math.inf
    return float(value)


def _eval_config(cfg, lz, lt, iota, rho, alpha_km, decay_days) -> EvaluationConfig:
    ev = cfg.get("evaluation", {})
    mining = cfg.get("mining", {})
    closeness = None
    if cfg.get("paths", {}).get("closeness"):
        closeness = load_closeness_csv(cfg["paths"]["closeness"])
    return EvaluationConfig(
        spatial_scales=tuple(lz) or tuple(ev.get("spatial_scales", ("country",))),
        temporal_scales=tuple(lt) or tuple(ev.get("temporal_scales", ("week",))),
        iotas=tuple(_parse_iota(v) for v in iota)
        or tuple(_parse_iota(v) for v in mining.get("iotas", (2,))),
        rhos=tuple(float(v) for v in rho) or tuple(float(v) for v in mining.get("rhos", (2,))),
        rho_is_fraction=bool(mining.get("rho_is_fraction", False)),
        alpha_km=float(alpha_km if alpha_km is not None else mining.get("alpha_km", 1000.0)),
        decay_days=float(decay_days if decay_days is not None else ev.get("decay_days", 21.0)),
        advance_threshold_days=int(ev.get("advance_threshold_days", 30)),
        top_k=int(ev.get("top_k", 10)),
        closeness=closeness,
    )


def _fail(exc):
    if isinstance(exc, (ConfigError, DataError)):
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    click.echo(f"internal error: {exc}", err=True)
    sys.exit(1)


@click.group()
@click.version_option(version=__version__)
def main():
    """Compare event-based surveillance databases against a reference."""


@main.command()
@click.option("--config", "config_path", type=click.Path(), required=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
def normalize(config_path, out_dir):
    """Normalize a raw document corpus into corpus events."""
    try:
        cfg = _load_config(config_path)
        dims = _dimensions(cfg)
        paths = cfg.get("paths", {})
        if "documents" not in paths:
            raise ConfigError("config lacks paths.documents")
        docs = load_documents_jsonl(paths["documents"])
        lexicons = load_lexicons(paths["lexicons"]) if paths.get("lexicons") else {}
        gazetteer = Gazetteer(
            path=paths.get("gazetteer"),
            base_url=os.environ.get("EBSC_GAZETTEER_URL"),
        )
        norm = cfg.get("normalize", {})
        db, doc_events, quarantined = normalize_corpus(
            docs, dims, lexicons, gazetteer,
            k=int(norm.get("window", 2)),
            cluster_threshold=float(norm.get("cluster_threshold", 2.0)),
            params=_similarity_params(cfg),
            system=str(norm.get("system", "corpus")),
        )
    except EbscError as exc:
        _fail(exc)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_events_csv(db, out / "events.csv")
    write_quarantine(quarantined, out / "quarantine.jsonl")
    per_year: dict = {}
    for e in db.events:
        per_year[e.date.day.year] = per_year.get(e.date.day.year, 0) + 1
    click.echo(f"documents: {len(docs)}  document events: {len(doc_events)}  corpus events: {len(db)}")
    for year in sorted(per_year):
        click.echo(f"  {year}: {per_year[year]}")
    click.echo(f"quarantined: {len(quarantined)}")


@main.command()
@click.option("--config", "config_path", type=click.Path(), required=True)
@click.option("--candidate", type=click.Path(), required=True)
@click.option("--reference", type=click.Path(), required=True)
@click.option("--tau", type=float, default=None, help="matching score threshold")
@click.option("--out", "out_path", type=click.Path(), required=True)
def match(config_path, candidate, reference, tau, out_path):
    """Match two event databases and write the pair file."""
    try:
        cfg = _load_config(config_path)
        dims = _dimensions(cfg)
        db1 = _load_db(reference, dims)
        db2 = _load_db(candidate, dims)
        if tau is None:
            tau = float(cfg.get("matching", {}).get("tau", 0.0))
        matching = match_events(db1, db2, _similarity_params(cfg), threshold=tau)
    except EbscError as exc:
        _fail(exc)
    write_matching_csv(matching, db1, db2, out_path)
    click.echo(f"events: {len(db1)} reference, {len(db2)} candidate")
    click.echo(f"putatively associated events: {len(matching)} (tau={tau})")


@main.command()
@click.option("--config", "config_path", type=click.Path(), required=True)
@click.option("--candidate", "db_path", type=click.Path(), required=True, help="event database to mine")
@click.option("--mode", type=click.Choice(["spatial", "multidimensional"]), default="spatial")
@click.option("--iota", default=None, help="max inter-arrival time, or 'inf'")
@click.option("--rho", type=float, default=None, help="minimum period-support")
@click.option("--alpha-km", type=float, default=None)
@click.option("--lz", default=None, help="spatial scale (admin level)")
@click.option("--lt", default=None, help="temporal scale")
@click.option("--out", "out_dir", type=click.Path(), required=True)
def mine(config_path, db_path, mode, iota, rho, alpha_km, lz, lt, out_dir):
    """Mine periodic-frequent patterns from one event database."""
    try:
        cfg = _load_config(config_path)
        mining = cfg.get("mining", {})
        dims = _dimensions(cfg)
        db = _load_db(db_path, dims)
        params = MiningParams(
            max_gap=_parse_iota(iota if iota is not None else mining.get("iota", 2)),
            min_period_support=float(rho if rho is not None else mining.get("rho", 2)),
            rho_is_fraction=bool(mining.get("rho_is_fraction", False)),
            alpha_km=float(alpha_km if alpha_km is not None else mining.get("alpha_km", 1000.0)),
            mode=mode,
        )
        if mode == "spatial":
            from .events import fix_scale

            stdb = fix_scale(
                db,
                lz or mining.get("lz", "country"),
                lt or mining.get("lt", "week"),
            )
            closeness = None
            if cfg.get("paths", {}).get("closeness"):
                closeness = load_closeness_csv(cfg["paths"]["closeness"])
            patterns = mine_spatial(stdb, params, closeness=closeness, db=db)
        else:
            patterns = mine_multidimensional(db, params)
    except EbscError as exc:
        _fail(exc)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_patterns(patterns, out / "patterns.csv", out / "patterns.json")
    click.echo(f"patterns: {len(patterns)}")


@main.command(name="eval")
@click.option("--config", "config_path", type=click.Path(), required=True)
@click.option("--candidate", type=click.Path(), required=True)
@click.option("--reference", type=click.Path(), default=None)
@click.option("--dims", "dims_opt", default=",".join(DIMENSION_NAMES),
              help="comma-separated subset of " + ",".join(DIMENSION_NAMES))
@click.option("--iota", multiple=True)
@click.option("--rho", multiple=True)
@click.option("--alpha-km", type=float, default=None)
@click.option("--lz", multiple=True)
@click.option("--lt", multiple=True)
@click.option("--tau", type=float, default=None)
@click.option("--decay-days", type=float, default=None)
@click.option("--out", "out_dir", type=click.Path(), required=True)
def evaluate(config_path, candidate, reference, dims_opt, iota, rho, alpha_km,
             lz, lt, tau, decay_days, out_dir):
    """Run the full comparison and write report.json plus side tables."""
    try:
        cfg = _load_config(config_path)
        dims = _dimensions(cfg)
        wanted = tuple(d.strip() for d in dims_opt.split(",") if d.strip())
        cand_db = _load_db(candidate, dims)
        ref_db = _load_db(reference, dims) if reference else None
        config = _eval_config(cfg, lz, lt, iota, rho, alpha_km, decay_days)
        if tau is None:
            tau = float(cfg.get("matching", {}).get("tau", 0.0))
        blocklist = frozenset()
        if cfg.get("paths", {}).get("blocklist"):
            blocklist = load_blocklist(cfg["paths"]["blocklist"])
        result = run_evaluation(
            cand_db, ref_db, config, dimensions=wanted,
            sim_params=_similarity_params(cfg), tau=tau, blocklist=blocklist,
        )
        path = write_report(result, out_dir, candidate=cand_db, reference=ref_db, config=config)
    except EbscError as exc:
        _fail(exc)
    click.echo(f"report: {path}")
    for dim in DIMENSION_NAMES:
        if dim in result.get("scores", {}):
            click.echo(f"  {dim}: {result['scores'][dim]:.4f}")


@main.command()
@click.option("--out", "out_dir", type=click.Path(), required=True,
              help="directory holding an eval run's outputs")
def report(out_dir):
    """Render figures from a previously written evaluation directory."""
    from .figures import render_all

    if not (Path(out_dir) / "report.json").exists():
        _fail(ConfigError(f"{out_dir} contains no report.json (run eval first)"))
    try:
        produced = render_all(out_dir)
    except EbscError as exc:
        _fail(exc)
    for p in produced:
        click.echo(f"wrote {p}")


if __name__ == "__main__":
    main()
