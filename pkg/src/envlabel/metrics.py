"""Per-category classification metrics: accuracy, P/R/F1, and AUPRC.

Multi-class precision/recall/F1 are macro-averaged by default (micro and
weighted are available); classes whose denominator is zero contribute 0 and
are flagged in the result rather than silently folded in. AUPRC is computed
one-vs-rest per class with right-continuous step integration, sweeping one
threshold per distinct score so that tied scores form a single group; the
per-category value is the mean over classes that have at least one positive,
and it is None (never 0) when no class is computable.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

import numpy as np

from .labels import CATEGORIES, CATEGORY_CLASSES

#: Row labels used when rendering reports.
CATEGORY_TITLES = {
    "daytime": "Daytime",
    "precipitation": "Precipitation",
    "fog": "Fog",
    "road": "Road Condition",
    "roadside": "Roadside Condition",
    "infrastructure": "Infrastructure",
}

AVERAGES = ("macro", "micro", "weighted")


class PredictionFormatError(ValueError):
    """A prediction record is malformed or misses a category."""


@dataclass
class ConfusionMatrix:
    """Counts with rows = true class, columns = predicted class."""

    cells: np.ndarray

    def __post_init__(self) -> None:
        self.cells = np.asarray(self.cells, dtype=np.int64)
        if self.cells.ndim != 2 or self.cells.shape[0] != self.cells.shape[1]:
            raise ValueError("confusion matrix must be square")
        if (self.cells < 0).any():
            raise ValueError("confusion matrix cells must be non-negative")

    @property
    def n_classes(self) -> int:
        return int(self.cells.shape[0])

    @property
    def total(self) -> int:
        return int(self.cells.sum())


@dataclass(frozen=True)
class ScoredPrediction:
    """True class plus one confidence score per class (higher = more likely)."""

    true_class: int
    scores: tuple[float, ...]

    def __post_init__(self) -> None:
        if not all(math.isfinite(s) for s in self.scores):
            raise ValueError("scores must be finite")
        if not 0 <= self.true_class < len(self.scores):
            raise ValueError("true_class out of range of the score vector")


def confusion(pairs: Iterable[tuple[int, int]], n_classes: int) -> ConfusionMatrix:
    """Count (true, predicted) pairs into an n x n matrix."""
    cells = np.zeros((n_classes, n_classes), dtype=np.int64)
    for true, pred in pairs:
        if not (0 <= true < n_classes and 0 <= pred < n_classes):
            raise IndexError(f"class index ({true}, {pred}) out of range for {n_classes} classes")
        cells[true, pred] += 1
    return ConfusionMatrix(cells)


@dataclass
class Summary:
    """Headline numbers for one confusion matrix."""

    accuracy: float
    precision: float
    recall: float
    f1: float
    per_class_precision: np.ndarray
    per_class_recall: np.ndarray
    per_class_f1: np.ndarray
    zero_division_classes: tuple[int, ...]


def summarize(cm: ConfusionMatrix, average: str = "macro") -> Summary:
    """Accuracy plus averaged precision/recall/F1.

    Per class c: precision = TP/(TP+FP), recall = TP/(TP+FN),
    F1 = 2PR/(P+R). A zero denominator contributes 0 and the class index is
    reported in ``zero_division_classes``.
    """
    if average not in AVERAGES:
        raise ValueError(f"average must be one of {AVERAGES}")
    if cm.total == 0:
        raise ValueError("cannot summarize an empty confusion matrix")
    cells = cm.cells.astype(np.float64)
    tp = np.diag(cells)
    pred_totals = cells.sum(axis=0)
    true_totals = cells.sum(axis=1)

    zero_division = set(np.flatnonzero(pred_totals == 0)) | set(np.flatnonzero(true_totals == 0))
    with np.errstate(divide="ignore", invalid="ignore"):
        precision = np.where(pred_totals > 0, tp / pred_totals, 0.0)
        recall = np.where(true_totals > 0, tp / true_totals, 0.0)
        pr_sum = precision + recall
        f1 = np.where(pr_sum > 0, 2.0 * precision * recall / pr_sum, 0.0)

    accuracy = float(tp.sum() / cm.total)
    if average == "macro":
        p, r, f = precision.mean(), recall.mean(), f1.mean()
    elif average == "weighted":
        w = true_totals / cm.total
        p, r, f = (precision * w).sum(), (recall * w).sum(), (f1 * w).sum()
    else:  # micro: with single-label multi-class data all three collapse to accuracy
        p = r = f = accuracy
    return Summary(
        accuracy=accuracy,
        precision=float(p),
        recall=float(r),
        f1=float(f),
        per_class_precision=precision,
        per_class_recall=recall,
        per_class_f1=f1,
        zero_division_classes=tuple(sorted(int(i) for i in zero_division)),
    )


def auprc(predictions: Sequence[ScoredPrediction], positive_class: int) -> float | None:
    """One-vs-rest area under the precision-recall curve for one class.

    Thresholds sweep the distinct scores in descending order (ties form one
    group); the area is the sum of precision * recall-increment per group.
    Returns None when the class has no positive example: the value is
    undefined there, and reporting 0 would misread as a terrible score.
    """
    if not predictions:
        return None
    labels = np.array([p.true_class == positive_class for p in predictions], dtype=bool)
    scores = np.array([p.scores[positive_class] for p in predictions], dtype=np.float64)
    n_pos = int(labels.sum())
    if n_pos == 0:
        return None

    order = np.argsort(-scores, kind="stable")
    labels = labels[order]
    scores = scores[order]
    area = 0.0
    tp = 0
    seen = 0
    prev_recall = 0.0
    i = 0
    n = len(scores)
    while i < n:
        j = i
        while j < n and scores[j] == scores[i]:
            j += 1
        tp += int(labels[i:j].sum())
        seen = j
        precision = tp / seen
        recall = tp / n_pos
        area += (recall - prev_recall) * precision
        prev_recall = recall
        i = j
    return float(area)


@dataclass
class CategoryReport:
    name: str
    classes: tuple[str, ...]
    confusion: ConfusionMatrix
    accuracy: float
    precision: float
    recall: float
    f1: float
    auprc: float | None
    auprc_uncovered: tuple[str, ...]
    zero_division: tuple[str, ...]


@dataclass
class MetricsReport:
    categories: dict[str, CategoryReport]
    overall_accuracy: float
    overall_f1: float
    overall_auprc: float | None


def _one_hot(index: int, n: int) -> tuple[float, ...]:
    return tuple(1.0 if i == index else 0.0 for i in range(n))


def evaluate(
    truth: dict[str, Sequence[str]],
    predicted: dict[str, Sequence[str]],
    scores: dict[str, Sequence[Sequence[float]]] | None = None,
    average: str = "macro",
) -> MetricsReport:
    """Full per-category report over aligned truth/prediction value lists.

    Values are taxonomy strings; score vectors are optional per category and
    fall back to one-hot on the predicted value. Overall numbers are the
    unweighted mean of accuracy, F1, and AUPRC across categories.
    """
    reports: dict[str, CategoryReport] = {}
    for category in CATEGORIES:
        if category not in truth or category not in predicted:
            raise PredictionFormatError(f"missing category {category!r}")
        classes = CATEGORY_CLASSES[category]
        index = {value: i for i, value in enumerate(classes)}
        t_vals = list(truth[category])
        p_vals = list(predicted[category])
        if len(t_vals) != len(p_vals):
            raise ValueError(
                f"category {category!r}: {len(t_vals)} truths vs {len(p_vals)} predictions"
            )
        try:
            pairs = [(index[t], index[p]) for t, p in zip(t_vals, p_vals)]
        except KeyError as exc:
            raise PredictionFormatError(
                f"unknown value {exc.args[0]!r} for category {category!r}"
            ) from None

        cm = confusion(pairs, len(classes))
        summary = summarize(cm, average=average)

        if scores is not None and category in scores:
            vectors = [tuple(float(x) for x in vec) for vec in scores[category]]
            if len(vectors) != len(t_vals):
                raise ValueError(f"category {category!r}: score count mismatch")
            for vec in vectors:
                if len(vec) != len(classes):
                    raise PredictionFormatError(
                        f"category {category!r}: score vector length {len(vec)} != {len(classes)}"
                    )
        else:
            vectors = [_one_hot(index[p], len(classes)) for p in p_vals]
        preds = [
            ScoredPrediction(true_class=pair[0], scores=vec) for pair, vec in zip(pairs, vectors)
        ]
        per_class_auprc = {c: auprc(preds, i) for i, c in enumerate(classes)}
        covered = [v for v in per_class_auprc.values() if v is not None]
        category_auprc = float(np.mean(covered)) if covered else None

        reports[category] = CategoryReport(
            name=CATEGORY_TITLES.get(category, category),
            classes=classes,
            confusion=cm,
            accuracy=summary.accuracy,
            precision=summary.precision,
            recall=summary.recall,
            f1=summary.f1,
            auprc=category_auprc,
            auprc_uncovered=tuple(c for c, v in per_class_auprc.items() if v is None),
            zero_division=tuple(classes[i] for i in summary.zero_division_classes),
        )

    auprcs = [r.auprc for r in reports.values() if r.auprc is not None]
    return MetricsReport(
        categories=reports,
        overall_accuracy=float(np.mean([r.accuracy for r in reports.values()])),
        overall_f1=float(np.mean([r.f1 for r in reports.values()])),
        overall_auprc=float(np.mean(auprcs)) if auprcs else None,
    )


def _fmt(value: float | None) -> str:
    return " n/a" if value is None else f"{value:.2f}"


def render_table(report: MetricsReport) -> str:
    """Human-readable category table: Accuracy, Precision, Recall, F1, AUPRC."""
    header = f"{'Category':<20} {'Accuracy':>9} {'Precision':>10} {'Recall':>7} {'F1-Score':>9} {'AUPRC':>6}"
    rows = [header, "-" * len(header)]
    for cat in report.categories.values():
        rows.append(
            f"{cat.name:<20} {cat.accuracy:>9.2f} {cat.precision:>10.2f} "
            f"{cat.recall:>7.2f} {cat.f1:>9.2f} {_fmt(cat.auprc):>6}"
        )
    rows.append("-" * len(header))
    rows.append(
        f"{'Overall (mean)':<20} {report.overall_accuracy:>9.2f} {'':>10} {'':>7} "
        f"{report.overall_f1:>9.2f} {_fmt(report.overall_auprc):>6}"
    )
    notes = []
    for cat in report.categories.values():
        if cat.zero_division:
            notes.append(f"note: {cat.name}: zero-denominator classes counted as 0: "
                         + ", ".join(cat.zero_division))
        if cat.auprc_uncovered:
            notes.append(f"note: {cat.name}: no positives, AUPRC skipped for: "
                         + ", ".join(cat.auprc_uncovered))
    return "\n".join(rows + notes)


def report_to_records(report: MetricsReport) -> list[str]:
    """Machine-readable line records mirroring the rendered table."""
    lines = []
    for key, cat in report.categories.items():
        lines.append(json.dumps({
            "category": key,
            "accuracy": cat.accuracy,
            "precision": cat.precision,
            "recall": cat.recall,
            "f1": cat.f1,
            "auprc": cat.auprc,
            "auprc_uncovered": list(cat.auprc_uncovered),
            "zero_division": list(cat.zero_division),
        }, separators=(",", ":")))
    lines.append(json.dumps({
        "category": "overall",
        "accuracy": report.overall_accuracy,
        "f1": report.overall_f1,
        "auprc": report.overall_auprc,
    }, separators=(",", ":")))
    return lines


def load_predictions(path: str) -> dict[str, dict[str, Any]]:
    """Parse a prediction file: one JSON record per line.

    Required fields: frame_id plus a predicted value for each of the six
    categories; optional ``scores`` object maps categories to score vectors.
    """
    out: dict[str, dict[str, Any]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise PredictionFormatError(f"line {lineno}: malformed record: {exc}") from exc
            if not isinstance(raw, dict):
                raise PredictionFormatError(f"line {lineno}: record must be an object")
            frame_id = raw.get("frame_id")
            if not isinstance(frame_id, str) or not frame_id:
                raise PredictionFormatError(f"line {lineno}: missing frame_id")
            values: dict[str, str] = {}
            for category in CATEGORIES:
                if category not in raw:
                    raise PredictionFormatError(
                        f"line {lineno}: missing category {category!r}"
                    )
                value = raw[category]
                if value not in CATEGORY_CLASSES[category]:
                    raise PredictionFormatError(
                        f"line {lineno}: unknown value {value!r} for category {category!r}"
                    )
                values[category] = value
            scores = raw.get("scores")
            if scores is not None:
                if not isinstance(scores, dict):
                    raise PredictionFormatError(f"line {lineno}: scores must be an object")
                for category, vec in scores.items():
                    if category not in CATEGORIES:
                        raise PredictionFormatError(
                            f"line {lineno}: scores for unknown category {category!r}"
                        )
                    if len(vec) != len(CATEGORY_CLASSES[category]):
                        raise PredictionFormatError(
                            f"line {lineno}: score vector length for {category!r}"
                        )
            out[frame_id] = {"values": values, "scores": scores}
    return out
