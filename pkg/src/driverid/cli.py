"""Batch command-line frontend: synth, clean, train, evaluate, grid.

Every command is driven by a manifest plus an optional INI run config and
is reproducible byte for byte from (inputs, config, seed). Exit codes:
0 success, 1 runtime failure, 2 usage or config error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import evaluation as ev
from . import ingest, preprocess, synth
from .config import ConfigError, Manifest, RunConfig, read_manifest, read_run_config, write_manifest
from .features import apply_standardizer, extract_sequence
from .models import LabeledDataset, load_model, save_model
from .pipeline import build_datasets, train_model
from .seeds import derive_seed
from .segment import segment_trip


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except Exception as err:  # runtime failure
        print(f"error: {err}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="driverid",
        description="Driver identification pipeline over smartphone IMU trip logs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic labeled trip corpus")
    p.add_argument("--drivers", type=int, default=10)
    p.add_argument("--hours", type=float, default=1.5, help="driving hours per driver")
    p.add_argument("--rate", type=float, default=2.0, help="sampling rate in Hz")
    p.add_argument("--separation", choices=("easy", "hard"), default="easy")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--manifest", default=None, help="output manifest path (default OUT/manifest.csv)")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_synth)

    p = sub.add_parser("clean", help="run the cleaning chain over a manifest of logs")
    _common_args(p)
    p.set_defaults(handler=cmd_clean)

    p = sub.add_parser("train", help="train a classifier end to end")
    _common_args(p)
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("evaluate", help="score a saved model on the test partition")
    _common_args(p)
    p.add_argument("--model", required=True)
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("grid", help="sweep windows x overlaps x features x models")
    _common_args(p)
    p.set_defaults(handler=cmd_grid)
    return parser


def _common_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--manifest", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)


def _load_run_config(args) -> RunConfig:
    cfg = read_run_config(args.config) if args.config else RunConfig()
    if args.seed is not None:
        cfg.master_seed = args.seed
    return cfg


def cmd_synth(args) -> int:
    if args.drivers < 2:
        raise ConfigError("--drivers must be at least 2")
    if args.hours * 3600.0 < 60.0:
        raise ConfigError("--hours must cover at least one minute")
    seed = args.seed
    if args.config:
        cfg = read_run_config(args.config)
        if args.hours * 60.0 < cfg.segmentation.window_minutes:
            raise ConfigError(
                f"--hours {args.hours} is shorter than one "
                f"{cfg.segmentation.window_minutes}-minute window"
            )
        if seed is None:
            seed = cfg.master_seed
    if seed is None:
        seed = 0

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    profiles = synth.make_profiles(args.drivers, args.separation, seed)
    entries = []
    for i, profile in enumerate(profiles):
        driver_id = f"driver{i + 1:02d}"
        trip, truth = synth.generate_trip(
            profile, args.hours * 3600.0, args.rate, driver_id=driver_id
        )
        log_path = out / f"{driver_id}.csv"
        ingest.write_log(trip, log_path)
        (out / f"{driver_id}.truth.json").write_text(
            json.dumps(truth.to_dict(), indent=1), encoding="utf-8"
        )
        entries.append((log_path.name, driver_id, args.rate))
    manifest_path = Path(args.manifest) if args.manifest else out / "manifest.csv"
    write_manifest(entries, manifest_path)
    print(f"wrote {len(entries)} trips and {manifest_path}")
    return 0


def _load_trips(manifest: Manifest) -> list[ingest.Trip]:
    trips = []
    for path, driver_id, rate in manifest.entries:
        if not Path(path).is_file():
            raise FileNotFoundError(f"manifest log not found: {path}")
        trips.append(ingest.read_log(path, driver_id, rate))
    return trips


def _clean_all(trips, cfg: RunConfig) -> list[preprocess.CleanTrip]:
    return [preprocess.clean(trip, cfg.cleaning) for trip in trips]


def cmd_clean(args) -> int:
    cfg = _load_run_config(args)
    manifest = read_manifest(args.manifest)
    trips = _load_trips(manifest)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for trip in trips:
        cleaned = preprocess.clean(trip, cfg.cleaning)
        log_path = out / f"{trip.driver_id}.clean.csv"
        ingest.write_log(cleaned.to_trip(), log_path)
        sidecar = out / f"{trip.driver_id}.clean.json"
        sidecar.write_text(json.dumps(cleaned.sidecar(), indent=1), encoding="utf-8")
        entries.append((log_path.name, trip.driver_id, trip.nominal_rate_hz))
    write_manifest(entries, out / "manifest.csv")
    print(f"cleaned {len(entries)} trips into {out}")
    return 0


def cmd_train(args) -> int:
    cfg = _load_run_config(args)
    manifest = read_manifest(args.manifest)
    trips = _load_trips(manifest)
    cleaned = _clean_all(trips, cfg)

    bundle = build_datasets(cleaned, cfg.segmentation, cfg.features)
    sub_seed = derive_seed(cfg.master_seed, f"train:{cfg.model_kind}")
    model = train_model(
        cfg.model_kind,
        bundle.train,
        cfg.model_params,
        seed=sub_seed,
        standardizer=bundle.standardizer,
    )

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    model_path = out / "model.json"
    save_model(model, model_path)
    report = {
        "dataset": manifest.name,
        "classes": list(model.class_list),
        "n_features": model.n_features,
        "window_counts": bundle.window_counts,
        "seed": cfg.master_seed,
        "sub_seed": sub_seed,
        "config_snapshot": cfg.snapshot(),
    }
    (out / "train_report.json").write_text(json.dumps(report, indent=1), encoding="utf-8")
    print(f"trained {cfg.model_kind} on {len(bundle.train)} windows -> {model_path}")
    return 0


def cmd_evaluate(args) -> int:
    cfg = _load_run_config(args)
    manifest = read_manifest(args.manifest)
    model = load_model(args.model)
    trips = _load_trips(manifest)
    cleaned = _clean_all(trips, cfg)

    test_vectors = []
    for trip in cleaned:
        _, test_windows = segment_trip(trip, cfg.segmentation)
        test_vectors.extend(extract_sequence(test_windows, cfg.features))
    if not test_vectors:
        raise ValueError("empty test set: no test windows were produced")
    if model.standardizer is None:
        raise ValueError("model carries no standardizer; cannot evaluate raw features")

    matrix = apply_standardizer(model.standardizer, np.vstack([v.values for v in test_vectors]))
    test = LabeledDataset(
        features=matrix,
        labels=np.array([v.driver_id for v in test_vectors], dtype=object),
        class_list=model.class_list,
    )
    report = ev.evaluate(model, test, config_snapshot=cfg.snapshot())

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report.to_dict(), indent=1), encoding="utf-8")
    (out / "report.csv").write_text(_confusion_csv(report), encoding="utf-8")
    print(f"accuracy {report.accuracy:.4f} on {report.n_test_windows} test windows")
    return 0


def cmd_grid(args) -> int:
    cfg = _load_run_config(args)
    manifest = read_manifest(args.manifest)
    trips = _load_trips(manifest)
    cleaned = _clean_all(trips, cfg)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    complete = True
    try:
        for row in ev.iter_grid(
            cleaned,
            cfg.grid,
            train_fraction=cfg.segmentation.train_fraction,
            feature_base=cfg.features,
            model_params={cfg.model_kind: cfg.model_params},
            master_seed=cfg.master_seed,
        ):
            rows.append(row)
    except KeyboardInterrupt:
        complete = False
    rows = ev.sort_rows(rows)
    ev.write_reports(rows, out, complete=complete, extra={"seed": cfg.master_seed})
    print(ev.render_report(rows), end="")
    if not complete:
        print("interrupted: partial results flagged incomplete", file=sys.stderr)
        return 1
    return 0


def _confusion_csv(report: ev.EvaluationReport) -> str:
    lines = ["true\\predicted," + ",".join(report.class_list)]
    for label, row in zip(report.class_list, report.confusion):
        lines.append(label + "," + ",".join(str(int(v)) for v in row))
    lines.append(f"accuracy,{report.accuracy!r}")
    lines.append(f"n_test_windows,{report.n_test_windows}")
    return "\n".join(lines) + "\n"


if __name__ == "__main__":
    raise SystemExit(main())
