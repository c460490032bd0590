"""Streaming confusion-matrix accumulation and the six mean-over-class
segmentation metrics (IoU, precision, recall, F1, specificity, accuracy).

Counts are 64-bit: a full-resolution large dataset exceeds 2^31 pixels.

Zero-division policy (documented in every report footer):
  * a class with TP+FP+FN == 0 (no ground truth, never predicted) is
    excluded from the mean entirely;
  * precision/recall with a zero denominator on an included class are 0
    (the model stayed silent on a class that exists, or hallucinated a
    class that doesn't — both penalized);
  * specificity with TN+FP == 0 (every pixel belongs to the class) is 1,
    vacuously: there are no negatives to get wrong.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .core import IGNORE_ID, LabelMap

__all__ = [
    "ConfusionMatrix",
    "ClassMetrics",
    "MetricsReport",
    "accumulate_confusion",
    "merge_confusion",
    "per_class_metrics",
    "mean_metrics",
    "render_report_table",
    "ZERO_DIVISION_NOTE",
]

ZERO_DIVISION_NOTE = (
    "classes with no ground truth and no predictions are excluded from means; "
    "prec/rec with empty denominators on included classes are 0; "
    "specificity with no negatives is 1"
)

METRIC_NAMES = ("IoU", "Prec", "Rec", "F1", "Spec", "Acc")


@dataclass
class ConfusionMatrix:
    """K x K counts, entry (i, j) = pixels with ground truth i predicted j."""

    counts: np.ndarray
    ignored_count: int = 0

    def __post_init__(self) -> None:
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.ndim != 2 or self.counts.shape[0] != self.counts.shape[1]:
            raise ValueError(f"confusion matrix must be square, got {self.counts.shape}")
        if (self.counts < 0).any() or self.ignored_count < 0:
            raise ValueError("counts must be non-negative")

    @classmethod
    def empty(cls, num_classes: int) -> ConfusionMatrix:
        return cls(np.zeros((num_classes, num_classes), dtype=np.int64))

    @property
    def num_classes(self) -> int:
        return self.counts.shape[0]

    @property
    def counted_pixels(self) -> int:
        return int(self.counts.sum())


def accumulate_confusion(
    matrix: ConfusionMatrix, predictions: LabelMap, ground_truth: LabelMap
) -> ConfusionMatrix:
    """Add one prediction/ground-truth pair into the matrix (in place).

    Ground-truth ignore pixels only bump ignored_count.  Accumulation is
    plain integer addition, hence associative and order-independent.
    """
    if predictions.spatial != ground_truth.spatial:
        raise ValueError(
            f"shape mismatch: predictions {predictions.spatial} vs ground truth {ground_truth.spatial}"
        )
    k = matrix.num_classes
    gt = ground_truth.labels.ravel().astype(np.int64)
    pred = predictions.labels.ravel().astype(np.int64)
    keep = gt != IGNORE_ID
    matrix.ignored_count += int((~keep).sum())
    gt, pred = gt[keep], pred[keep]
    if gt.size and int(gt.max()) >= k:
        raise ValueError(f"ground-truth id {int(gt.max())} >= K={k}")
    if pred.size and int(pred.max()) >= k:
        raise ValueError(f"prediction id {int(pred.max())} >= K={k}")
    flat = np.bincount(gt * k + pred, minlength=k * k)
    matrix.counts += flat.reshape(k, k)
    return matrix


def merge_confusion(a: ConfusionMatrix, b: ConfusionMatrix) -> ConfusionMatrix:
    """Combine per-worker matrices; equivalent to single-pass accumulation."""
    if a.num_classes != b.num_classes:
        raise ValueError("cannot merge matrices of different K")
    return ConfusionMatrix(a.counts + b.counts, a.ignored_count + b.ignored_count)


@dataclass(frozen=True)
class ClassMetrics:
    iou: float
    precision: float
    recall: float
    f1: float
    specificity: float
    accuracy: float

    def as_tuple(self) -> tuple[float, ...]:
        return (self.iou, self.precision, self.recall, self.f1, self.specificity, self.accuracy)


@dataclass(frozen=True)
class MetricsReport:
    per_class: dict[int, ClassMetrics]
    excluded: tuple[int, ...]
    mean: ClassMetrics | None
    counted_pixels: int
    ignored_count: int = 0
    class_labels: dict[int, str] = field(default_factory=dict)


def _one_vs_rest(counts: np.ndarray, k: int) -> tuple[int, int, int, int]:
    tp = int(counts[k, k])
    fn = int(counts[k, :].sum()) - tp
    fp = int(counts[:, k].sum()) - tp
    tn = int(counts.sum()) - tp - fn - fp
    return tp, fp, fn, tn


def _safe_div(num: float, den: float, when_empty: float) -> float:
    return num / den if den > 0 else when_empty


def per_class_metrics(matrix: ConfusionMatrix, class_labels: dict[int, str] | None = None) -> MetricsReport:
    """Derive all six one-vs-rest metrics for every class."""
    n = matrix.counted_pixels
    if n == 0:
        raise ValueError("empty confusion matrix: no counted pixels")
    per_class: dict[int, ClassMetrics] = {}
    excluded: list[int] = []
    for k in range(matrix.num_classes):
        tp, fp, fn, tn = _one_vs_rest(matrix.counts, k)
        if tp + fp + fn == 0:
            excluded.append(k)
            continue
        prec = _safe_div(tp, tp + fp, 0.0)
        rec = _safe_div(tp, tp + fn, 0.0)
        per_class[k] = ClassMetrics(
            iou=tp / (tp + fp + fn),
            precision=prec,
            recall=rec,
            f1=_safe_div(2 * prec * rec, prec + rec, 0.0),
            specificity=_safe_div(tn, tn + fp, 1.0),
            accuracy=(tp + tn) / n,
        )
    report = MetricsReport(
        per_class=per_class,
        excluded=tuple(excluded),
        mean=None,
        counted_pixels=n,
        ignored_count=matrix.ignored_count,
        class_labels=dict(class_labels or {}),
    )
    if per_class:
        report = MetricsReport(
            per_class=per_class,
            excluded=tuple(excluded),
            mean=mean_metrics(report),
            counted_pixels=n,
            ignored_count=matrix.ignored_count,
            class_labels=dict(class_labels or {}),
        )
    return report


def mean_metrics(report: MetricsReport) -> ClassMetrics:
    """Unweighted arithmetic mean over included classes, per metric."""
    if not report.per_class:
        raise ValueError("all classes excluded: mean undefined")
    rows = [m.as_tuple() for m in report.per_class.values()]
    means = [sum(col) / len(rows) for col in zip(*rows)]
    return ClassMetrics(*means)


def _fmt_pct(value: float | None) -> str:
    return "—" if value is None else f"{100.0 * value:.2f}"


def render_report_table(reports: dict[tuple[str, str], MetricsReport], fmt: str = "text") -> str:
    """Combined benchmark table: one row per (dataset, model), six mean-metric
    columns as percentages with two decimals.  Rows sort by dataset then model;
    text and CSV renderings carry identical numbers."""
    if not reports:
        raise ValueError("at least one report required")
    if fmt not in ("text", "csv"):
        raise ValueError(f"format must be 'text' or 'csv', got {fmt!r}")
    rows = []
    for (dataset, model) in sorted(reports):
        mean = reports[(dataset, model)].mean
        cells = [_fmt_pct(None if mean is None else v) for v in (mean.as_tuple() if mean else [None] * 6)]
        rows.append((dataset, model, cells))
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["dataset", "model"] + list(METRIC_NAMES))
        for dataset, model, cells in rows:
            writer.writerow([dataset, model] + cells)
        return buf.getvalue()
    widths = [max(len(r[1]) for r in rows + [("", "model", [])]), 7]
    lines = []
    header = f"{'model':<{widths[0]}}  " + "  ".join(f"{m:>7}" for m in METRIC_NAMES)
    current = None
    for dataset, model, cells in rows:
        if dataset != current:
            if current is not None:
                lines.append("")
            lines.append(f"== {dataset} ==")
            lines.append(header)
            current = dataset
        lines.append(f"{model:<{widths[0]}}  " + "  ".join(f"{c:>7}" for c in cells))
    lines.append("")
    lines.append(f"note: {ZERO_DIVISION_NOTE}")
    return "\n".join(lines) + "\n"
