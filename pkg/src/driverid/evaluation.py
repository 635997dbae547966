"""Scoring, confusion matrices and the window/overlap/feature/model grid sweep."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator, Sequence

import numpy as np

from .features import (
    FAMILIES,
    FeatureConfig,
    apply_standardizer,
    feature_config_from_families,
    feature_schema,
    fit_standardizer,
)
from .models import LabeledDataset, TrainedModel, predict
from .pipeline import build_datasets, train_model
from .preprocess import CleanTrip
from .seeds import derive_seed
from .segment import SegmentationConfig

REPORT_COLUMNS = ("window_minutes", "overlap", "features", "model", "mean_accuracy", "std", "error")

# Named feature-family combinations the grid sweeps by default.
DEFAULT_FEATURE_SUBSETS = (
    "histogram",
    "mean",
    "variance",
    "difference",
    "correlation",
    "histogram+mean",
    "histogram+variance",
    "histogram+correlation",
    "mean+variance",
    "mean+difference",
    "mean+correlation",
    "histogram+mean+variance",
    "histogram+mean+correlation",
    "mean+variance+difference",
    "mean+variance+correlation",
    "histogram+mean+variance+difference",
    "mean+variance+difference+correlation",
    "histogram+mean+variance+difference+correlation",
)


@dataclass(frozen=True, eq=False)
class EvaluationReport:
    accuracy: float
    confusion: np.ndarray          # (c, c) counts, rows true, cols predicted
    per_class_recall: np.ndarray   # NaN where a class has no test rows
    n_test_windows: int
    class_list: tuple[str, ...]
    config_snapshot: dict | None = None

    def to_dict(self) -> dict:
        recall = [None if np.isnan(r) else float(r) for r in self.per_class_recall]
        return {
            "accuracy": self.accuracy,
            "class_list": list(self.class_list),
            "confusion": self.confusion.tolist(),
            "per_class_recall": recall,
            "n_test_windows": self.n_test_windows,
            "config_snapshot": self.config_snapshot,
        }


def evaluate(
    model: TrainedModel, test: LabeledDataset, config_snapshot: dict | None = None
) -> EvaluationReport:
    """Exact confusion counting of the model on held-out rows."""
    if len(test) == 0:
        raise ValueError("empty test set")
    if test.n_features != model.n_features:
        raise ValueError(
            f"schema mismatch: test rows have {test.n_features} features, "
            f"model expects {model.n_features}"
        )
    unknown = set(test.labels) - set(model.class_list)
    if unknown:
        raise ValueError(f"test labels outside the model's class list: {sorted(unknown)}")

    c = len(model.class_list)
    index = {label: i for i, label in enumerate(model.class_list)}
    predictions = predict(model, test.features)
    confusion = np.zeros((c, c), dtype=np.int64)
    for truth, guess in zip(test.labels, predictions):
        confusion[index[truth], index[guess]] += 1

    row_sums = confusion.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        recall = np.where(row_sums > 0, np.diag(confusion) / row_sums, np.nan)
    return EvaluationReport(
        accuracy=float(np.trace(confusion) / confusion.sum()),
        confusion=confusion,
        per_class_recall=recall,
        n_test_windows=len(test),
        class_list=model.class_list,
        config_snapshot=config_snapshot,
    )


def separability_achieved(accuracy: float, n_classes: int) -> bool:
    """A separability claim requires beating chance by a factor of three."""
    return accuracy > 3.0 / n_classes


@dataclass(frozen=True)
class GridSpec:
    window_minutes_list: tuple[float, ...] = (5.0, 10.0, 15.0, 30.0)
    overlap_list: tuple[float, ...] = (0.0, 0.25, 0.5, 0.75)
    feature_subset_list: tuple[str, ...] = DEFAULT_FEATURE_SUBSETS
    model_list: tuple[str, ...] = ("knn", "dtree", "rforest", "mlp")
    repetitions: int = 5

    def __post_init__(self):
        for name in ("window_minutes_list", "overlap_list", "feature_subset_list", "model_list"):
            if not getattr(self, name):
                raise ValueError(f"{name} must be nonempty")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")


@dataclass
class GridRow:
    window_minutes: float
    overlap: float
    features: str
    model: str
    mean_accuracy: float | None = None
    std: float | None = None
    error: str | None = None
    accuracies: tuple[float, ...] = field(default_factory=tuple)

    def as_record(self) -> dict:
        return {
            "window_minutes": self.window_minutes,
            "overlap": self.overlap,
            "features": self.features,
            "model": self.model,
            "mean_accuracy": self.mean_accuracy,
            "std": self.std,
            "error": self.error,
        }


def iter_grid(
    trips: Sequence[CleanTrip],
    grid: GridSpec,
    train_fraction: float = 0.7,
    feature_base: FeatureConfig | None = None,
    model_params: dict | None = None,
    master_seed: int = 0,
) -> Iterator[GridRow]:
    """Yield one result row per grid cell, in deterministic cell order.

    Every cell is emitted even when its pipeline fails; the failure reason
    travels in the row. Features are extracted once per window/overlap cell
    with all families on, then sliced per named subset, which is equivalent
    to extracting each subset directly because the families are independent
    columns.
    """
    if len({t.driver_id for t in trips}) < 2:
        raise ValueError("grid needs trips from at least 2 drivers")
    feature_base = feature_base or FeatureConfig()
    full_cfg = feature_config_from_families(list(FAMILIES), feature_base)
    model_params = model_params or {}

    for wm in grid.window_minutes_list:
        for ov in grid.overlap_list:
            seg_cfg = SegmentationConfig(
                window_minutes=wm, overlap_fraction=ov, train_fraction=train_fraction
            )
            try:
                bundle = build_datasets(trips, seg_cfg, full_cfg)
                cell_error = None
            except Exception as err:  # captured, not fatal: short trips etc.
                bundle = None
                cell_error = str(err)

            for subset in grid.feature_subset_list:
                for kind in grid.model_list:
                    if bundle is None:
                        yield GridRow(wm, ov, subset, kind, error=cell_error)
                        continue
                    yield _run_cell(
                        bundle, full_cfg, wm, ov, subset, kind,
                        grid.repetitions, model_params.get(kind), master_seed,
                    )


def run_grid(
    trips: Sequence[CleanTrip],
    grid: GridSpec,
    train_fraction: float = 0.7,
    feature_base: FeatureConfig | None = None,
    model_params: dict | None = None,
    master_seed: int = 0,
    on_row: Callable[[GridRow], None] | None = None,
) -> list[GridRow]:
    """Run the full grid and return rows sorted by mean accuracy, best first."""
    rows = []
    for row in iter_grid(trips, grid, train_fraction, feature_base, model_params, master_seed):
        rows.append(row)
        if on_row is not None:
            on_row(row)
    return sort_rows(rows)


def sort_rows(rows: Sequence[GridRow]) -> list[GridRow]:
    """Best mean accuracy first, failed cells last, stable within ties."""
    indexed = list(enumerate(rows))
    indexed.sort(
        key=lambda pair: (
            pair[1].mean_accuracy is None,
            -(pair[1].mean_accuracy or 0.0),
            pair[0],
        )
    )
    return [row for _, row in indexed]


def _run_cell(bundle, full_cfg, wm, ov, subset, kind, repetitions, params, master_seed):
    try:
        columns = _subset_columns(full_cfg, subset)
        train = _slice_dataset(bundle.train, columns)
        test = _slice_dataset(bundle.test, columns)
        standardizer = fit_standardizer(train.features)
        train = _restandardize(train, standardizer)
        test = _restandardize(test, standardizer)

        accuracies = []
        for rep in range(repetitions):
            seed = derive_seed(master_seed, f"grid:{wm}:{ov}:{subset}:{kind}:rep{rep}")
            model = train_model(kind, train, params, seed=seed)
            accuracies.append(evaluate(model, test).accuracy)
        acc = np.array(accuracies)
        return GridRow(
            wm, ov, subset, kind,
            mean_accuracy=float(acc.mean()),
            std=float(acc.std()),
            accuracies=tuple(float(a) for a in acc),
        )
    except Exception as err:
        return GridRow(wm, ov, subset, kind, error=str(err))


def _subset_columns(full_cfg: FeatureConfig, subset: str) -> np.ndarray:
    families = subset.split("+") if subset != "all" else list(FAMILIES)
    unknown = set(families) - set(FAMILIES)
    if unknown:
        raise ValueError(f"unknown feature families: {sorted(unknown)}")
    schema = feature_schema(full_cfg)
    mask = np.array([entry[0] in families for entry in schema])
    if not mask.any():
        raise ValueError(f"feature subset {subset!r} selects no columns")
    return np.nonzero(mask)[0]


def _slice_dataset(ds: LabeledDataset, columns: np.ndarray) -> LabeledDataset:
    labels = None
    if ds.schema_labels is not None:
        labels = tuple(ds.schema_labels[i] for i in columns)
    return LabeledDataset(
        features=ds.features[:, columns],
        labels=ds.labels,
        class_list=ds.class_list,
        schema_labels=labels,
    )


def _restandardize(ds: LabeledDataset, standardizer) -> LabeledDataset:
    return LabeledDataset(
        features=apply_standardizer(standardizer, ds.features),
        labels=ds.labels,
        class_list=ds.class_list,
        schema_labels=ds.schema_labels,
    )


def render_report(rows: Sequence[GridRow]) -> str:
    """Fixed-width human-readable table, one line per grid row."""
    header = f"{'window':>7} {'overlap':>8} {'features':<50} {'model':<8} {'mean_acc':>9} {'std':>7} error"
    lines = [header, "-" * len(header)]
    for row in rows:
        mean = f"{row.mean_accuracy:.4f}" if row.mean_accuracy is not None else "-"
        std = f"{row.std:.4f}" if row.std is not None else "-"
        lines.append(
            f"{row.window_minutes:>7g} {row.overlap:>8g} {row.features:<50} "
            f"{row.model:<8} {mean:>9} {std:>7} {row.error or ''}".rstrip()
        )
    return "\n".join(lines) + "\n"


def report_csv(rows: Sequence[GridRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for row in rows:
        rec = row.as_record()
        writer.writerow(["" if rec[c] is None else rec[c] for c in REPORT_COLUMNS])
    return buf.getvalue()


def write_reports(rows: Sequence[GridRow], out_dir, complete: bool = True, extra: dict | None = None):
    """Write grid_report.csv and grid_report.json; returns their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "grid_report.csv"
    json_path = out / "grid_report.json"
    csv_path.write_text(report_csv(rows), encoding="utf-8")
    doc = {"complete": complete, "rows": [r.as_record() for r in rows]}
    if extra:
        doc.update(extra)
    json_path.write_text(json.dumps(doc, indent=1), encoding="utf-8")
    return csv_path, json_path
