"""Evaluation report assembly and serialization.

Runs the requested comparison dimensions (spatial, timeliness,
periodicity, thematic, source) for a candidate database against a
reference, and writes one JSON report plus delimited side tables that
back the usual displays: per-zone coverage (choropleth data), per-pair
time lags (histogram data), seasonal pattern grids, ranked pattern
lists, and the five-score radar table. All outputs are deterministic.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

from .errors import ConfigError
from .events import EventDatabase, fix_scale
from .matching import match_events, write_matching_csv
from .metrics import (
    EvaluationConfig,
    periodicity_final,
    representativeness_multiscale,
    source_consistency,
    thematic_score,
    timeliness,
)
from .mining import MiningParams, mine_spatial
from .similarity import SimilarityParams

DIMENSION_NAMES = ("spatial", "timeliness", "periodicity", "thematic", "source")


def _num(value):
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    return value


def _cell_key(parts) -> str:
    return "/".join(str(_num(p)) for p in parts)


def run_evaluation(
    candidate: EventDatabase,
    reference,
    config: EvaluationConfig,
    dimensions=DIMENSION_NAMES,
    sim_params=None,
    tau: float = 0.0,
    blocklist=frozenset(),
) -> dict:
    """Compute the requested scores; reference may be None for a
    source-only run."""
    unknown = set(dimensions) - set(DIMENSION_NAMES)
    if unknown:
        raise ConfigError(f"unknown evaluation dimensions: {sorted(unknown)}")
    needs_ref = set(dimensions) - {"source"}
    if needs_ref and reference is None:
        raise ConfigError(f"dimensions {sorted(needs_ref)} require a reference database")
    sim_params = sim_params or SimilarityParams()

    report: dict = {
        "candidate": candidate.name,
        "reference": reference.name if reference is not None else None,
        "dimensions": sorted(dimensions),
        "config": {
            "spatial_scales": list(config.spatial_scales),
            "temporal_scales": list(config.temporal_scales),
            "iotas": [_num(i) for i in config.iotas],
            "rhos": list(config.rhos),
            "rho_is_fraction": config.rho_is_fraction,
            "alpha_km": config.alpha_km,
            "decay_days": config.decay_days,
            "advance_threshold_days": config.advance_threshold_days,
            "top_k": config.top_k,
            "tau": tau,
        },
        "scores": {},
    }

    if "spatial" in dimensions:
        detail, overall = representativeness_multiscale(candidate, reference, config)
        report["spatial"] = {
            "score": overall,
            "cells": {
                _cell_key(key): {"mean": cell["mean"], "per_zone": dict(sorted(cell["per_zone"].items()))}
                for key, cell in detail.items()
            },
        }
        report["scores"]["spatial"] = overall

    if "timeliness" in dimensions:
        matching = match_events(reference, candidate, sim_params, threshold=tau)
        result = timeliness(
            matching, reference, candidate,
            decay_days=config.decay_days,
            advance_threshold_days=config.advance_threshold_days,
        )
        report["timeliness"] = {
            "delay_score": result.delay_score,
            "timeliness": result.timeliness,
            "n_pairs": result.n_pairs,
            "n_candidate_earlier": result.n_candidate_earlier,
            "n_earlier_by_threshold": result.n_earlier_by_threshold,
            "mean_delay_late": result.mean_delay_late,
            "pairs": [list(row) for row in result.pairs],
        }
        report["scores"]["timeliness"] = result.timeliness
        report["_matching"] = (matching, reference, candidate)

    if "periodicity" in dimensions:
        perio = periodicity_final(candidate, reference, config)
        report["periodicity"] = {
            "score": perio["score"],
            "continuous": {
                "score": perio["continuous"]["score"],
                "cells": {
                    _cell_key(k): v for k, v in perio["continuous"]["detail"].items()
                },
            },
            "seasonal": {
                "score": perio["seasonal"]["score"],
                "cells": {
                    _cell_key(k): v for k, v in perio["seasonal"]["detail"].items()
                },
            },
        }
        report["scores"]["periodicity"] = perio["score"]

    if "thematic" in dimensions:
        detail, score = thematic_score(candidate, reference, config)
        report["thematic"] = {
            "score": score,
            "cells": {_cell_key(k): v for k, v in detail.items()},
        }
        report["scores"]["thematic"] = score

    if "source" in dimensions:
        result = source_consistency(candidate, config.top_k, blocklist=blocklist)
        report["source"] = result
        report["scores"]["source"] = result["score"]

    return report


def _ranked_pattern_rows(db: EventDatabase, config: EvaluationConfig):
    rows = []
    for lz in config.spatial_scales:
        for lt in config.temporal_scales:
            stdb = fix_scale(db, lz, lt)
            for iota in config.iotas:
                for rho in config.rhos:
                    params = MiningParams(
                        max_gap=iota, min_period_support=rho,
                        rho_is_fraction=config.rho_is_fraction, alpha_km=config.alpha_km,
                    )
                    patterns = mine_spatial(stdb, params, closeness=config.closeness, db=db)
                    for rank, p in enumerate(patterns, start=1):
                        rows.append(
                            [lz, lt, _num(iota), rho, db.name, rank,
                             "|".join(p.items), p.support, p.period_support, p.full_periodic]
                        )
    return rows


def write_report(report: dict, out_dir, candidate=None, reference=None, config=None):
    """Write report.json and the delimited side tables into out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    matching_bits = report.pop("_matching", None)
    with open(out / "report.json", "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")

    if "spatial" in report:
        with open(out / "per_zone_representativeness.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["spatial_scale", "temporal_scale", "zone", "score"])
            for key in sorted(report["spatial"]["cells"]):
                lz, lt = key.split("/")
                for zone, score in report["spatial"]["cells"][key]["per_zone"].items():
                    writer.writerow([lz, lt, zone, f"{score:.6f}"])

    if "timeliness" in report:
        with open(out / "time_lags.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["reference_record", "candidate_record", "reference_date",
                 "candidate_date", "lag_days", "delay_days"]
            )
            for row in report["timeliness"]["pairs"]:
                writer.writerow(row)
        if matching_bits is not None:
            matching, ref_db, cand_db = matching_bits
            write_matching_csv(matching, ref_db, cand_db, out / "matching.csv")

    if "periodicity" in report:
        with open(out / "seasonal_grid.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["spatial_scale", "temporal_scale", "iota", "rho", "season", "score"])
            for key in sorted(report["periodicity"]["seasonal"]["cells"]):
                score = report["periodicity"]["seasonal"]["cells"][key]
                lz, lt, iota, rho, season = key.split("/")
                writer.writerow(
                    [lz, lt, iota, rho, season, "" if score is None else f"{score:.6f}"]
                )
        if candidate is not None and reference is not None and config is not None:
            with open(out / "pattern_rankings.csv", "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(
                    ["spatial_scale", "temporal_scale", "iota", "rho", "database",
                     "rank", "items", "support", "period_support", "full_periodic"]
                )
                for db in (reference, candidate):
                    for row in _ranked_pattern_rows(db, config):
                        writer.writerow(row)

    with open(out / "radar.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dimension", "score"])
        for dim in DIMENSION_NAMES:
            if dim in report.get("scores", {}):
                writer.writerow([dim, f"{report['scores'][dim]:.6f}"])
    return out / "report.json"
