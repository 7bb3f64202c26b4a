"""Confusion matrices and derived classification metrics.

Rows are true classes, columns predicted classes. Accuracy is the exact
rational trace/total; per-class recall (Top-1) is the diagonal over the row
sum and precision the diagonal over the column sum, with F1 their harmonic
mean. Rounding happens only at display time: percentages to two decimals,
F1 to four.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .taxonomy import DEFAULT_CLASS_ORDER


class EvaluateError(ValueError):
    pass


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: np.ndarray  # (K, K) int64, rows true, cols predicted
    class_order: tuple[str, ...]

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise EvaluateError(f"confusion matrix must be square, got {counts.shape}")
        if counts.shape[0] != len(self.class_order):
            raise EvaluateError("class order length does not match matrix size")
        if (counts < 0).any():
            raise EvaluateError("negative count in confusion matrix")
        object.__setattr__(self, "counts", counts.astype(np.int64))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def row_sum(self, class_id: str) -> int:
        return int(self.counts[self.index(class_id)].sum())

    def col_sum(self, class_id: str) -> int:
        return int(self.counts[:, self.index(class_id)].sum())

    def diagonal(self, class_id: str) -> int:
        i = self.index(class_id)
        return int(self.counts[i, i])

    def index(self, class_id: str) -> int:
        try:
            return self.class_order.index(class_id)
        except ValueError:
            raise EvaluateError(f"unknown class {class_id!r}") from None

    def permuted(self, new_order: Sequence[str]) -> "ConfusionMatrix":
        idx = [self.index(c) for c in new_order]
        return ConfusionMatrix(
            counts=self.counts[np.ix_(idx, idx)], class_order=tuple(new_order)
        )


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int
    undefined: bool = False  # empty row and column: F1 pinned to 0 and flagged


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    accuracy_exact: Fraction
    per_class: dict[str, ClassMetrics]
    macro_f1: float
    n: int
    loss: float | None = None
    skipped: tuple[str, ...] = field(default=())

    def top1(self, class_id: str) -> float:
        return self.per_class[class_id].recall


def confusion_matrix(
    predictions: Sequence[str],
    truths: Sequence[str],
    class_order: Sequence[str] = DEFAULT_CLASS_ORDER,
) -> ConfusionMatrix:
    """Count (true, predicted) pairs into a KxK matrix."""
    if len(predictions) != len(truths):
        raise EvaluateError("predictions and truths differ in length")
    order = tuple(class_order)
    index = {c: i for i, c in enumerate(order)}
    counts = np.zeros((len(order), len(order)), dtype=np.int64)
    for truth, pred in zip(truths, predictions):
        if truth not in index:
            raise EvaluateError(f"unknown true label {truth!r}")
        if pred not in index:
            raise EvaluateError(f"unknown predicted label {pred!r}")
        counts[index[truth], index[pred]] += 1
    return ConfusionMatrix(counts=counts, class_order=order)


def metrics(matrix: ConfusionMatrix, loss: float | None = None) -> EvalReport:
    """Derive accuracy, per-class precision/recall/F1 and macro F1.

    A class with an empty row gets recall 0, an empty column precision 0; if
    both are empty its F1 is 0 and the class is flagged undefined. Macro F1
    is the unweighted mean over every class in the matrix, negatives
    included.
    """
    total = matrix.total
    if total == 0:
        raise EvaluateError("empty confusion matrix")
    diag = int(np.trace(matrix.counts))
    per_class: dict[str, ClassMetrics] = {}
    for class_id in matrix.class_order:
        tp = matrix.diagonal(class_id)
        row = matrix.row_sum(class_id)
        col = matrix.col_sum(class_id)
        recall = tp / row if row else 0.0
        precision = tp / col if col else 0.0
        if precision + recall > 0:
            f1 = 2.0 * precision * recall / (precision + recall)
            undefined = False
        else:
            f1 = 0.0
            undefined = row == 0 and col == 0
        per_class[class_id] = ClassMetrics(
            precision=precision, recall=recall, f1=f1, support=row, undefined=undefined
        )
    macro_f1 = sum(m.f1 for m in per_class.values()) / len(per_class)
    return EvalReport(
        accuracy=diag / total,
        accuracy_exact=Fraction(diag, total),
        per_class=per_class,
        macro_f1=macro_f1,
        n=total,
        loss=loss,
    )


def evaluate_split(checkpoint, manifest, split: str, blob_store) -> tuple[EvalReport, ConfusionMatrix]:
    """Predict every accepted record in a split and aggregate the metrics.

    Preprocessing is the deterministic eval path (crop when flagged, resize,
    normalize with the checkpoint's stats); no augmentation. Records whose
    blobs are missing are skipped and listed on the report, with n counting
    only evaluated records.
    """
    from .preprocess import prepare_for_model
    from .trainer.train import predict

    records = [r for r in manifest.records(status="accepted", split=split)]
    if not records:
        raise EvaluateError(f"split {split!r} is empty")
    truths, preds, skipped = [], [], []
    for rec in records:
        try:
            data = blob_store.read(rec.blob_checksum)
        except KeyError:
            skipped.append(rec.id)
            continue
        image = prepare_for_model(
            data,
            crop=rec.crop_flag,
            size=checkpoint.architecture.input_size,
            stats=checkpoint.norm_stats,
        )
        result = predict(checkpoint, image)
        truths.append(rec.label)
        preds.append(result.class_id)
    if not truths:
        raise EvaluateError(f"no evaluable records in split {split!r}")
    matrix = confusion_matrix(preds, truths, class_order=checkpoint.class_order)
    report = metrics(matrix)
    return (
        EvalReport(
            accuracy=report.accuracy,
            accuracy_exact=report.accuracy_exact,
            per_class=report.per_class,
            macro_f1=report.macro_f1,
            n=report.n,
            loss=report.loss,
            skipped=tuple(skipped),
        ),
        matrix,
    )


def render_report(matrix: ConfusionMatrix, report: EvalReport) -> str:
    """Text table in the reference layout: prediction counts per true class,
    then F1 (4 decimals) and Top-1 (percent, 2 decimals) columns."""
    width = max(len(c) for c in matrix.class_order)
    cell = max(6, len(str(int(matrix.counts.max(initial=0)))))
    lines = []
    header = " " * (width + 2) + " ".join(f"{c[:cell]:>{cell}}" for c in matrix.class_order)
    lines.append(header + f" | {'F1':>6} | {'Top-1':>7}")
    for i, class_id in enumerate(matrix.class_order):
        row = " ".join(f"{int(v):>{cell}}" for v in matrix.counts[i])
        m = report.per_class[class_id]
        lines.append(
            f"{class_id:<{width}}  {row} | {m.f1:6.4f} | {m.recall * 100:6.2f}%"
        )
    lines.append(
        f"accuracy {report.accuracy * 100:.2f}%  macro-F1 {report.macro_f1:.4f}  n={report.n}"
    )
    if report.skipped:
        lines.append(f"skipped (missing blobs): {len(report.skipped)}")
    return "\n".join(lines)
