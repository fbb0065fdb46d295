"""Command-line pipeline with file-based stage boundaries.

Every stage reads the files written by the previous one, checks their schema
line, and stamps its own output with a schema line and the hash of the
configuration that produced it (chained through the upstream hashes).

Exit codes: 0 success, 1 fatal input or schema error, 2 invalid configuration.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from collections import Counter
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from aistrip import stageio
from aistrip.config import ConfigError, RunConfig, build_config, parse_scalar
from aistrip.dataset import (
    DatasetError, Encoder, FoldPlan, LabelCodec, SplitPlan, grouped_split, prepare, stratified_kfold,
)
from aistrip.features import MODEL_FEATURES, NUMERIC_FEATURES, featurize, parse_feature_table, write_feature_table
from aistrip.ingest import (
    Cleaner, CleaningReport, CsvSchemaError, RowParseError, fill_static, group_tracks,
    parse_csv, typify, typify_stream, write_records,
)
from aistrip.ml import evaluate, gini_importance
from aistrip.ml.importance import permutation_importance, write_importance_csv
from aistrip.ml.models import TrainedModel, train
from aistrip.ml.search import CvResult, GridError, grid_search
from aistrip.records import AisRecord
from aistrip.segmentation import Trajectory, filter_trips, segment_tracks

log = logging.getLogger("aistrip")


class FatalInput(Exception):
    """Unusable input (exit code 1)."""


# ---------------------------------------------------------------- file helpers

def _open_stage(path: str | Path, schema: str):
    fh = open(path, newline="")
    try:
        cs = parse_csv(fh)
        stageio.check_schema(cs.schema, schema, path)
    except Exception:
        fh.close()
        raise
    return fh, cs


def _iso(ts: int) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _records_with_trip(cs) -> Iterator[tuple[AisRecord, Optional[int]]]:
    for raw in cs:
        try:
            rec = typify(raw)
        except RowParseError as exc:
            raise FatalInput(f"line {raw.line}: {exc}") from exc
        tid = raw.get("trip_id")
        yield rec, int(tid) if tid else None


def read_records(path: str | Path, schema: str = stageio.CLEANED) -> tuple[list[AisRecord], str]:
    fh, cs = _open_stage(path, schema)
    with fh:
        recs = [r for r, _ in _records_with_trip(cs)]
        if cs.errors:
            raise FatalInput(f"{path}: malformed line {cs.errors[0].line}: {cs.errors[0].reason}")
    return recs, cs.meta.get("config", "")


def read_trips(path: str | Path) -> tuple[list[Trajectory], str]:
    fh, cs = _open_stage(path, stageio.TRIPS)
    groups: dict[int, list[AisRecord]] = {}
    with fh:
        for rec, tid in _records_with_trip(cs):
            if tid is None:
                raise FatalInput(f"{path}: record without trip_id")
            groups.setdefault(tid, []).append(rec)
        if cs.errors:
            raise FatalInput(f"{path}: malformed line {cs.errors[0].line}: {cs.errors[0].reason}")
    trips = [Trajectory(tid, recs[0].mmsi, recs) for tid, recs in sorted(groups.items())]
    return trips, cs.meta.get("config", "")


def read_features(path: str | Path) -> tuple[list[dict], str]:
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    meta = {}
    body = []
    for line in lines:
        kv = stageio.parse_meta_line(line)
        if kv is not None and not body:
            meta[kv[0]] = kv[1]
        else:
            body.append(line)
    stageio.check_schema(meta.get("schema"), stageio.FEATURES, path)
    if not body:
        raise FatalInput(f"{path}: feature table has no header")
    return parse_feature_table(body), meta.get("config", "")


def _hash(stage: str, cfg_part: dict, *upstream: str) -> str:
    return stageio.config_hash({"stage": stage, "config": cfg_part, "upstream": list(upstream)})


def geojson_collection(trips: Sequence[Trajectory], props: Sequence[dict], cfg_hash: str) -> dict:
    feats = []
    for t, p in zip(trips, props):
        feats.append({
            "type": "Feature",
            "geometry": {"type": "LineString",
                         "coordinates": [[r.position.lon_deg, r.position.lat_deg] for r in t.records]},
            "properties": p,
        })
    return {"type": "FeatureCollection", "schema": stageio.GEOJSON, "config": cfg_hash, "features": feats}


def _write_json(obj: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(obj, indent=1) + "\n")


def _track_type(track: Sequence[AisRecord]) -> Optional[str]:
    for r in track:
        if r.static is not None and r.static.ship_type is not None:
            return r.static.ship_type
    return None


def _sog_mean(t: Trajectory) -> Optional[float]:
    sogs = [r.sog_knots for r in t.records if r.sog_knots is not None]
    return float(np.mean(sogs)) if sogs else None


# ---------------------------------------------------------------- stages

def _first_timestamp(path: Path) -> tuple[int, str]:
    with open(path, newline="") as fh:
        cs = parse_csv(fh)
        for raw in cs:
            try:
                return typify(raw).timestamp, str(path)
            except RowParseError:
                continue
    return -1, str(path)


def clean_files(paths: Sequence[str | Path], cfg: RunConfig, report: CleaningReport) -> Iterator[AisRecord]:
    """Stream typed, cleaned records from several files in timestamp order.

    Files are visited by their first timestamp; all must share one header.
    """
    rules = cfg.cleaning_rules()
    paths = [Path(p) for p in paths]
    headers = {}
    for p in paths:
        with open(p, newline="") as fh:
            headers[p] = parse_csv(fh).header
    first = headers[paths[0]] if paths else None
    for p in paths[1:]:
        if headers[p] != first:
            raise CsvSchemaError(f"column layout of {p} differs from {paths[0]}:\n  {headers[p]}\n  {first}")
    order = sorted(paths, key=_first_timestamp)
    cleaner = Cleaner(rules, report)
    for p in order:
        with open(p, newline="") as fh:
            cs = parse_csv(fh)
            yield from cleaner.filter(typify_stream(cs, report))
            if cs.errors:
                log.warning("%s: %d malformed lines skipped (first at line %d)", p, len(cs.errors), cs.errors[0].line)
            report.rows_in += len(cs.errors)
            report.parse_errors += len(cs.errors)


def cmd_clean(paths: Sequence[str], out: str, cfg: RunConfig, report_path: Optional[str] = None) -> CleaningReport:
    report = CleaningReport()
    h = _hash("clean", cfg.section("aoi", "bbox", "max_sog", "drop_zero_sog"))
    with open(out, "w", newline="") as fh:
        stageio.write_meta(fh, stageio.CLEANED, h)
        write_records(fh, clean_files(paths, cfg, report))
    log.info("clean: %d rows in, %d out, %d dropped", report.rows_in, report.rows_out, report.dropped)
    if report_path:
        stageio.dump_json(report.as_dict(), report_path, stageio.CLEAN_REPORT, h)
    return report


def segment_records(records: Iterable[AisRecord], cfg: RunConfig):
    params = cfg.segmentation()
    tracks = {m: fill_static(t) for m, t in group_tracks(records).items()}
    result = segment_tracks(tracks, params)
    trips = filter_trips(result.trips, params)
    return tracks, result, trips


def cmd_segment(cleaned: str, out: str, cfg: RunConfig, geojson: Optional[str] = None) -> list[Trajectory]:
    records, up = read_records(cleaned)
    _, result, trips = segment_records(records, cfg)
    h = _hash("segment", cfg.section("stop_radius_m", "stop_min_s", "min_trip_km", "min_trip_points"), up)
    recs = [r for t in trips for r in t.records]
    ids = [t.trip_id for t in trips for _ in t.records]
    with open(out, "w", newline="") as fh:
        stageio.write_meta(fh, stageio.TRIPS, h)
        write_records(fh, recs, extra={"trip_id": ids})
    n_stops = sum(len(s) for s in result.stops.values())
    log.info("segment: %d trips kept of %d, %d stops", len(trips), len(result.trips), n_stops)
    if geojson:
        props = [{"mmsi": t.mmsi, "trip_id": t.trip_id, "ship_type": _track_type(t.records),
                  "trip_start": _iso(t.trip_start), "trip_end": _iso(t.trip_end)} for t in trips]
        _write_json(geojson_collection(trips, props, h), geojson)
    return trips


def cmd_featurize(trips_path: str, out: str, cfg: RunConfig) -> int:
    trips, up = read_trips(trips_path)
    rows, skips = featurize(trips)
    h = _hash("featurize", {}, up)
    with open(out, "w", newline="") as fh:
        stageio.write_meta(fh, stageio.FEATURES, h)
        n = write_feature_table(fh, rows)
    side = Path(out).with_suffix(".skips.json")
    stageio.dump_json({"rows": n, "skipped": dict(sorted(skips.items()))}, side, stageio.SKIPS, h)
    log.info("featurize: %d rows, skipped %s", n, dict(skips))
    return n


def cmd_split(features: str, out: str, cfg: RunConfig) -> dict:
    rows, up = read_features(features)
    prep = prepare(rows)
    plan = grouped_split([r["mmsi"] for r in prep.rows], cfg.test_frac, cfg.seed)
    train_labels = [prep.rows[i]["ship_type"] for i in plan.train_idx]
    folds = stratified_kfold(train_labels, cfg.folds, cfg.seed)
    h = _hash("split", cfg.section("test_frac", "seed", "folds"), up)
    doc = {
        "n_rows": len(prep.rows),
        "dropped_class": prep.dropped_class,
        "dropped_missing": prep.dropped_missing,
        "train_counts": dict(sorted(Counter(train_labels).items())),
        "test_counts": dict(sorted(Counter(prep.rows[i]["ship_type"] for i in plan.test_idx).items())),
        "split": plan.to_dict(),
        "folds": folds.to_dict(),
    }
    stageio.dump_json(doc, out, stageio.SPLIT, h)
    log.info("split: %d train rows, %d test rows", len(plan.train_idx), len(plan.test_idx))
    return doc


@dataclass
class _Data:
    rows: list[dict]
    plan: SplitPlan
    folds: FoldPlan
    hash: str

    @property
    def train_rows(self) -> list[dict]:
        return [self.rows[i] for i in self.plan.train_idx]

    @property
    def test_rows(self) -> list[dict]:
        return [self.rows[i] for i in self.plan.test_idx]


def _load_data(features: str, split: str) -> _Data:
    rows, fh = read_features(features)
    doc = stageio.load_json(split, stageio.SPLIT)
    prep = prepare(rows)
    if doc["n_rows"] != len(prep.rows):
        raise FatalInput(f"{split} was made for {doc['n_rows']} rows but {features} yields {len(prep.rows)}")
    return _Data(prep.rows, SplitPlan.from_dict(doc["split"]), FoldPlan.from_dict(doc["folds"]),
                 stageio.config_hash({"features": fh, "split": doc.get("config", "")}))


def cmd_tune(features: str, split: str, out: str, cfg: RunConfig, family: str) -> CvResult:
    data = _load_data(features, split)
    train_rows = data.train_rows
    codec = LabelCodec(r["ship_type"] for r in train_rows)
    X = Encoder.fit(train_rows).matrix(train_rows)
    y = codec.encode(r["ship_type"] for r in train_rows)
    res = grid_search(family, cfg.grids[family], data.folds, X, y, len(codec), cfg.smote, cfg.smote_k,
                      cfg.seed, threads=cfg.threads)
    h = _hash("tune", {"model": family, "grid": cfg.grids[family], **cfg.section("smote", "smote_k", "seed")}, data.hash)
    stageio.dump_json({**res.to_dict(), "classes": codec.to_list()}, out, stageio.CV_RESULT, h)
    best = res.best_index
    log.info("tune %s: best %s mean %.4f +- %.4f", family, res.best_params, res.mean[best], res.std[best])
    return res


def cmd_train(features: str, split: str, out: str, cfg: RunConfig, family: str,
              params: Optional[dict] = None, cv_path: Optional[str] = None) -> TrainedModel:
    data = _load_data(features, split)
    tuning = "default"
    up = [data.hash]
    if cv_path:
        doc = stageio.load_json(cv_path, stageio.CV_RESULT)
        if doc["family"] != family:
            raise FatalInput(f"{cv_path} tunes {doc['family']!r}, not {family!r}")
        params = {**doc["best_params"], **(params or {})}
        tuning = "tuned"
        up.append(doc.get("config", ""))
    elif params:
        tuning = "custom"
    train_rows = data.train_rows
    model = train(family, train_rows, params, cfg.smote, cfg.smote_k,
                  cfg.seed, LabelCodec(r["ship_type"] for r in train_rows), tuning=tuning)
    h = _hash("train", {"model": family, "params": model.params, **cfg.section("smote", "smote_k", "seed")}, *up)
    stageio.dump_json(model.to_dict(), out, stageio.MODEL, h)
    log.info("train %s (%s): %d rows, params %s", family, tuning, len(train_rows), model.params)
    return model


def load_model(path: str | Path) -> tuple[TrainedModel, str]:
    doc = stageio.load_json(path, stageio.MODEL)
    try:
        return TrainedModel.from_dict(doc), doc.get("config", "")
    except (KeyError, ValueError) as exc:
        raise FatalInput(f"{path}: {exc}") from exc


def cmd_evaluate(model_path: str, features: str, split: str, out: str, cfg: RunConfig,
                 importance: Optional[str] = None, permutation: Optional[str] = None) -> dict:
    model, mh = load_model(model_path)
    data = _load_data(features, split)
    test_rows = data.test_rows
    unseen = sorted({r["ship_type"] for r in test_rows} - set(model.labels.classes))
    if unseen:
        raise DatasetError(f"test set contains classes the model never saw: {unseen}")
    X = model.matrix(test_rows)
    y = model.labels.encode(r["ship_type"] for r in test_rows)
    pred = model.predict(X)
    report = evaluate(y, pred, model.labels.classes, scores=model.scores(X))
    h = _hash("evaluate", {}, mh, data.hash)
    doc = {"model": model.family, "tuning": model.tuning, "smote": model.smote_mode,
           "params": model.params, "n_test": len(test_rows), **report.to_dict()}
    stageio.dump_json(doc, out, stageio.EVAL, h)
    log.info("evaluate %s: accuracy %.4f macro F1 %.4f", model.family, report.accuracy, report.macro_f1)
    if importance and model.family in ("dt", "rf"):
        imp = gini_importance(model.model, len(MODEL_FEATURES))
        with open(importance, "w", newline="") as fh:
            write_importance_csv(fh, MODEL_FEATURES, imp)
    elif importance:
        log.warning("Gini importance needs a tree model; %s skipped", importance)
    if permutation:
        res = permutation_importance(model.predict, X, y, seed=cfg.seed, n_repeats=cfg.n_repeats)
        with open(permutation, "w", newline="") as fh:
            write_importance_csv(fh, MODEL_FEATURES, res.mean, res.std)
    return doc


REPORT_COLUMNS = ("model", "tuning", "smote", "accuracy", "precision", "recall", "f1", "roc_auc")


def _pct(v: Optional[float]) -> str:
    return "" if v is None else f"{100.0 * v:.2f}"


def cmd_report(evals: Sequence[str], out: str, figures: Optional[str] = None) -> list[list[str]]:
    docs = [stageio.load_json(p, stageio.EVAL) for p in evals]
    table = []
    for d in docs:
        table.append([d["model"].upper(), d["tuning"], d["smote"], _pct(d["accuracy"]), _pct(d["macro_precision"]),
                      _pct(d["macro_recall"]), _pct(d["macro_f1"]), _pct(d.get("auc_macro"))])
    h = _hash("report", {}, *[d.get("config", "") for d in docs])
    with open(out, "w", newline="") as fh:
        stageio.write_meta(fh, stageio.REPORT, h)
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        w.writerows(table)
    if figures:
        from aistrip import plotting
        fig_dir = Path(figures)
        labels = [f"{d['model'].upper()} {d['tuning']} smote={d['smote']}" for d in docs]
        plotting.metric_bars(labels, {
            "accuracy": [100 * d["accuracy"] for d in docs],
            "precision": [100 * d["macro_precision"] for d in docs],
            "recall": [100 * d["macro_recall"] for d in docs],
            "F1": [100 * d["macro_f1"] for d in docs],
        }, fig_dir / "metrics.png")
        for k, (d, label) in enumerate(zip(docs, labels), start=1):
            plotting.confusion_heatmap(np.array(d["confusion"]), d["classes"], label, fig_dir / f"confusion_{k:02d}.png")
    return table


def _importance_figures(csv_paths: Sequence[str], fig_dir: Path) -> None:
    from aistrip import plotting
    for p in csv_paths:
        with open(p, newline="") as fh:
            rows = list(csv.DictReader(fh))
        names = [r["feature"] for r in rows]
        vals = [float(r["importance"]) for r in rows]
        errs = [float(r["std"]) for r in rows] if rows and "std" in rows[0] else None
        plotting.importance_bars(names, vals, Path(p).stem, fig_dir / f"{Path(p).stem}.png", errs)


def predict_trips(model: TrainedModel, trips: Sequence[Trajectory]) -> dict[int, str]:
    """Predicted type per trip id, for trips with a complete feature row."""
    rows, _ = featurize(trips, require_label=False)
    dicts = [r.as_dict() for r in rows]
    usable = [d for d in dicts if all(d.get(f) is not None for f in NUMERIC_FEATURES)]
    preds = model.predict_rows(usable)
    return {d["trip_id"]: p for d, p in zip(usable, preds)}


def cmd_backfill(model_path: str, raws: Sequence[str], out: str, cfg: RunConfig,
                 geojson: Optional[str] = None) -> dict[int, str]:
    """Predict a type for every vessel that never broadcasts one and propagate it to all its records."""
    model, mh = load_model(model_path)
    report = CleaningReport()
    records = list(clean_files(raws, cfg, report))
    tracks, _, trips = segment_records(records, cfg)
    h = _hash("backfill", cfg.section("aoi", "bbox", "max_sog", "drop_zero_sog", "stop_radius_m", "stop_min_s",
                                      "min_trip_km", "min_trip_points"), mh)
    known = {m: _track_type(t) for m, t in tracks.items()}
    missing = [t for t in trips if known[t.mmsi] is None]
    per_trip = predict_trips(model, missing) if missing else {}
    votes: dict[int, Counter] = {}
    for t in missing:
        if t.trip_id in per_trip:
            votes.setdefault(t.mmsi, Counter())[per_trip[t.trip_id]] += 1
    vessel_pred = {m: sorted(c.items(), key=lambda kv: (-kv[1], kv[0]))[0][0] for m, c in sorted(votes.items())}
    if not trips:
        log.warning("backfill: no classifiable trips in the input; writing empty outputs")
    elif missing and not vessel_pred:
        log.warning("backfill: vessels without a type have no classifiable trips")

    ordered = sorted((r for t in tracks.values() for r in t), key=lambda r: (r.timestamp, r.mmsi)) if trips else []
    pred_col = [vessel_pred.get(r.mmsi) for r in ordered]
    filled_col = [known[r.mmsi] if known[r.mmsi] is not None else vessel_pred.get(r.mmsi) for r in ordered]
    with open(out, "w", newline="") as fh:
        stageio.write_meta(fh, stageio.ANNOTATED, h)
        write_records(fh, ordered, extra={"ship_type_pred": pred_col, "ship_type_filled": filled_col})
    if geojson:
        props = [{"mmsi": t.mmsi, "trip_id": t.trip_id, "ship_type_true": known[t.mmsi],
                  "ship_type_pred": per_trip.get(t.trip_id), "trip_start": _iso(t.trip_start),
                  "trip_end": _iso(t.trip_end), "sog_mean": _sog_mean(t)} for t in trips]
        _write_json(geojson_collection(trips, props, h), geojson)
    log.info("backfill: %d vessels lacked a type, %d predicted", len({t.mmsi for t in missing}), len(vessel_pred))
    return vessel_pred


def cmd_export_geojson(trips_path: str, out: str, model_path: Optional[str] = None) -> int:
    trips, up = read_trips(trips_path)
    preds: dict[int, str] = {}
    mh = ""
    if model_path:
        model, mh = load_model(model_path)
        preds = predict_trips(model, trips)
    by_mmsi: dict[int, list[AisRecord]] = {}
    for t in trips:
        by_mmsi.setdefault(t.mmsi, []).extend(t.records)
    known = {m: _track_type(recs) for m, recs in by_mmsi.items()}
    props = [{"mmsi": t.mmsi, "trip_id": t.trip_id, "ship_type_true": known[t.mmsi],
              "ship_type_pred": preds.get(t.trip_id), "trip_start": _iso(t.trip_start),
              "trip_end": _iso(t.trip_end), "sog_mean": _sog_mean(t)} for t in trips]
    _write_json(geojson_collection(trips, props, _hash("export-geojson", {}, up, mh)), out)
    return len(trips)


# ---------------------------------------------------------------- argument parsing

def _global(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("global")
    g.add_argument("--config", help="plain-text key=value configuration file")
    g.add_argument("--seed", type=int)
    g.add_argument("--threads", type=int)
    g.add_argument("--log-level", dest="log_level")


def _cleaning(p) -> None:
    g = p.add_argument_group("cleaning")
    g.add_argument("--aoi", help="polygon file (lon lat per line, or GeoJSON); 'none' disables")
    g.add_argument("--bbox", help="minLon,minLat,maxLon,maxLat")
    g.add_argument("--max-sog", dest="max_sog")
    g.add_argument("--drop-zero-sog", dest="drop_zero_sog", metavar="true|false")


def _segmenting(p) -> None:
    g = p.add_argument_group("segmentation")
    g.add_argument("--stop-radius-m", dest="stop_radius_m")
    g.add_argument("--stop-min-s", dest="stop_min_s")
    g.add_argument("--min-trip-km", dest="min_trip_km")
    g.add_argument("--min-trip-points", dest="min_trip_points")


def _modelling(p, model_required: bool = True) -> None:
    g = p.add_argument_group("modelling")
    g.add_argument("--model", choices=("gnb", "svm", "dt", "rf"), required=model_required)
    g.add_argument("--smote", choices=("fold", "paper", "off"))
    g.add_argument("--smote-k", dest="smote_k")


CONFIG_KEYS = ("seed", "threads", "log_level", "aoi", "bbox", "max_sog", "drop_zero_sog", "stop_radius_m",
               "stop_min_s", "min_trip_km", "min_trip_points", "test_frac", "folds", "smote", "smote_k",
               "model", "n_repeats")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="aistrip", description="AIS trip segmentation and ship-type classification.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("clean", help="filter raw daily CSV files")
    p.add_argument("inputs", nargs="+")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--report", help="write the cleaning report JSON here")
    _cleaning(p)
    _global(p)

    p = sub.add_parser("segment", help="split cleaned tracks into trips")
    p.add_argument("cleaned")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--geojson")
    _segmenting(p)
    _global(p)

    p = sub.add_parser("featurize", help="one feature row per labelled trip")
    p.add_argument("trips")
    p.add_argument("-o", "--output", required=True)
    _global(p)

    p = sub.add_parser("split", help="grouped train/test split and stratified folds")
    p.add_argument("features")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--test-frac", dest="test_frac")
    p.add_argument("--folds")
    _global(p)

    p = sub.add_parser("tune", help="cross-validated grid search")
    p.add_argument("features")
    p.add_argument("split")
    p.add_argument("-o", "--output", required=True)
    _modelling(p)
    _global(p)

    p = sub.add_parser("train", help="fit one model on the training split")
    p.add_argument("features")
    p.add_argument("split")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--cv", help="take hyperparameters from a tune result")
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
    _modelling(p)
    _global(p)

    p = sub.add_parser("evaluate", help="score a model on the test split")
    p.add_argument("model_file", metavar="model")
    p.add_argument("features")
    p.add_argument("split")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--importance", help="Gini importance CSV (tree models)")
    p.add_argument("--permutation", help="permutation importance CSV")
    p.add_argument("--n-repeats", dest="n_repeats")
    _global(p)

    p = sub.add_parser("report", help="comparison table and figures from evaluation files")
    p.add_argument("evals", nargs="+")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--figures", help="directory for PNG figures")
    p.add_argument("--importance", nargs="*", default=[], help="importance CSVs to plot")
    _global(p)

    p = sub.add_parser("backfill", help="predict missing ship types in new raw data")
    p.add_argument("model_file", metavar="model")
    p.add_argument("inputs", nargs="+")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--geojson")
    _cleaning(p)
    _segmenting(p)
    _global(p)

    p = sub.add_parser("export-geojson", help="trip LineStrings with true and predicted types")
    p.add_argument("trips")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--model", dest="model_file", help="trained model for ship_type_pred")
    _global(p)
    return ap


def _params(items: Sequence[str]) -> dict:
    out = {}
    for item in items:
        if "=" not in item:
            raise ConfigError(f"--param expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = parse_scalar(v)
    return out


def run(args: argparse.Namespace, cfg: RunConfig) -> None:
    c = args.command
    if c == "clean":
        cmd_clean(args.inputs, args.output, cfg, args.report)
    elif c == "segment":
        cmd_segment(args.cleaned, args.output, cfg, args.geojson)
    elif c == "featurize":
        cmd_featurize(args.trips, args.output, cfg)
    elif c == "split":
        cmd_split(args.features, args.output, cfg)
    elif c == "tune":
        cmd_tune(args.features, args.split, args.output, cfg, cfg.model)
    elif c == "train":
        cmd_train(args.features, args.split, args.output, cfg, cfg.model, _params(args.param) or None, args.cv)
    elif c == "evaluate":
        cmd_evaluate(args.model_file, args.features, args.split, args.output, cfg, args.importance, args.permutation)
    elif c == "report":
        cmd_report(args.evals, args.output, args.figures)
        if args.importance:
            if not args.figures:
                raise ConfigError("--importance plots need --figures")
            _importance_figures(args.importance, Path(args.figures))
    elif c == "backfill":
        cmd_backfill(args.model_file, args.inputs, args.output, cfg, args.geojson)
    elif c == "export-geojson":
        cmd_export_geojson(args.trips, args.output, args.model_file)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        overrides = {k: getattr(args, k, None) for k in CONFIG_KEYS}
        cfg = build_config(args.config, overrides)
        if args.command == "train" and args.param:
            _params(args.param)
    except ConfigError as exc:
        print(f"aistrip: configuration error: {exc}", file=sys.stderr)
        return 2
    logging.basicConfig(level=cfg.log_level.upper(), format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        run(args, cfg)
    except (ConfigError, GridError) as exc:
        print(f"aistrip: configuration error: {exc}", file=sys.stderr)
        return 2
    except (stageio.SchemaError, CsvSchemaError, DatasetError, FatalInput, OSError,
            json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"aistrip: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
