"""Binary confusion counts, per-label precision/recall/F1/accuracy, and the
aggregated report (per-label mean and std over folds, per-category averages,
macro and prior-weighted F1)."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from ..errors import MissingPrediction
from ..ontology import Category, LabelCatalog


def majority_f1(prevalence: float) -> float:
    """F1 of the always-positive predictor at the given prevalence: 2f/(1+f)."""
    return 2.0 * prevalence / (1.0 + prevalence)


def chance_f1(prevalence: float) -> float:
    """Expected F1 of a fair-coin predictor: precision -> f, recall -> 1/2."""
    return prevalence / (prevalence + 0.5)


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class LabelMetrics:
    label: str
    precision: float
    recall: float
    f1: float
    accuracy: float
    support: int


def binary_counts(predicted: Mapping[str, bool], positives: set[str],
                  post_ids: Sequence[str]) -> ConfusionCounts:
    tp = fp = fn = tn = 0
    for pid in post_ids:
        if pid not in predicted:
            raise MissingPrediction(f"no prediction for post {pid!r}")
        pred = predicted[pid]
        gold = pid in positives
        if pred and gold:
            tp += 1
        elif pred:
            fp += 1
        elif gold:
            fn += 1
        else:
            tn += 1
    return ConfusionCounts(tp, fp, fn, tn)


def confusion(predictions: Mapping[str, Iterable[str]],
              gold: Mapping[str, frozenset[str]], label: str,
              post_ids: Sequence[str] | None = None) -> ConfusionCounts:
    """Counts for one label over predicted label sets vs gold label sets."""
    ids = list(post_ids) if post_ids is not None else list(gold)
    for pid in ids:
        if pid not in predictions:
            raise MissingPrediction(f"no prediction for post {pid!r}")
    pred_bool = {pid: label in set(predictions[pid]) for pid in ids}
    positives = {pid for pid in ids if label in gold.get(pid, frozenset())}
    return binary_counts(pred_bool, positives, ids)


def prf1(counts: ConfusionCounts, label: str = "") -> LabelMetrics:
    """Precision/recall/F1/accuracy with the 0-when-undefined convention."""
    p = counts.tp / (counts.tp + counts.fp) if counts.tp + counts.fp else 0.0
    r = counts.tp / (counts.tp + counts.fn) if counts.tp + counts.fn else 0.0
    f1 = 2.0 * p * r / (p + r) if p + r > 0 else 0.0
    acc = (counts.tp + counts.tn) / counts.total if counts.total else 0.0
    return LabelMetrics(label=label, precision=p, recall=r, f1=f1, accuracy=acc,
                        support=counts.tp + counts.fn)


@dataclass(frozen=True)
class ReportRow:
    label: str
    category: str
    mean_f1: float
    std_f1: float
    precision: float
    recall: float
    accuracy: float
    folds: int


@dataclass
class ReportTable:
    model: str
    rows: list[ReportRow]
    category_f1: dict[str, float]
    macro_f1: float
    weighted_f1: float
    warnings: list[str] = field(default_factory=list)

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("label,model,mean_f1,std_f1,precision,recall,accuracy\n")
        for r in self.rows:
            out.write(f"{r.label},{self.model},{r.mean_f1:.6f},{r.std_f1:.6f},"
                      f"{r.precision:.6f},{r.recall:.6f},{r.accuracy:.6f}\n")
        return out.getvalue()

    def to_text(self) -> str:
        width = max([len(r.label) for r in self.rows] + [24])
        lines = [f"model: {self.model}",
                 f"{'label':<{width}}  {'F1 (mean±std)':>16}  {'prec':>7}  "
                 f"{'rec':>7}  {'acc':>7}"]
        for r in self.rows:
            lines.append(f"{r.label:<{width}}  {r.mean_f1:0.3f} ± {r.std_f1:0.3f}"
                         f"    {r.precision:7.3f}  {r.recall:7.3f}  {r.accuracy:7.3f}")
        for cat, val in self.category_f1.items():
            lines.append(f"{'avg F1 [' + cat + ']':<{width}}  {val:0.3f}")
        lines.append(f"{'avg F1 (macro)':<{width}}  {self.macro_f1:0.3f}")
        lines.append(f"{'avg F1 (prior-weighted)':<{width}}  {self.weighted_f1:0.3f}")
        for w in self.warnings:
            lines.append(f"warning: {w}")
        return "\n".join(lines) + "\n"


def _mean(xs: Sequence[float]) -> float:
    return sum(xs) / len(xs) if xs else 0.0


def _std(xs: Sequence[float]) -> float:
    if len(xs) < 2 or min(xs) == max(xs):
        return 0.0
    mu = _mean(xs)
    return math.sqrt(sum((x - mu) ** 2 for x in xs) / len(xs))


def aggregate(metrics_by_label: Mapping[str, Sequence[LabelMetrics]],
              catalog: LabelCatalog, model: str = "",
              labels: Sequence[str] | None = None) -> ReportTable:
    """Fold-level metrics -> report. `labels` restricts the report to a
    subset (defaults to the whole catalog); a label with no metrics counts
    as F1 = 0 and is flagged."""
    label_ids = list(labels) if labels is not None else catalog.ids
    ordered = [lab for lab in catalog if lab.id in set(label_ids)]
    rows: list[ReportRow] = []
    warnings: list[str] = []
    for lab in ordered:
        folds = list(metrics_by_label.get(lab.id, []))
        if not folds:
            warnings.append(f"label {lab.id!r} has no metrics; counted as F1=0")
            rows.append(ReportRow(lab.id, lab.category.value, 0.0, 0.0, 0.0, 0.0,
                                  0.0, 0))
            continue
        f1s = [m.f1 for m in folds]
        rows.append(ReportRow(
            label=lab.id, category=lab.category.value,
            mean_f1=_mean(f1s), std_f1=_std(f1s),
            precision=_mean([m.precision for m in folds]),
            recall=_mean([m.recall for m in folds]),
            accuracy=_mean([m.accuracy for m in folds]),
            folds=len(folds)))
    category_f1 = {}
    for cat in Category:
        cat_rows = [r for r in rows if r.category == cat.value]
        if cat_rows:
            category_f1[cat.value] = _mean([r.mean_f1 for r in cat_rows])
    macro = _mean([r.mean_f1 for r in rows])
    priors = {lab.id: lab.prior for lab in ordered}
    total_prior = sum(priors.values())
    weighted = (sum(priors[r.label] * r.mean_f1 for r in rows) / total_prior
                if total_prior > 0 else 0.0)
    return ReportTable(model=model, rows=rows, category_f1=category_f1,
                       macro_f1=macro, weighted_f1=weighted, warnings=warnings)


def analytic_report(kind: str, catalog: LabelCatalog,
                    labels: Sequence[str] | None = None) -> ReportTable:
    """Closed-form expectation report for the rule-based predictors, computed
    from the catalog priors alone."""
    if kind == "majority":
        def metrics(prior):
            return LabelMetrics("", prior, 1.0, majority_f1(prior), prior, 0)
    elif kind == "chance":
        def metrics(prior):
            return LabelMetrics("", prior, 0.5, chance_f1(prior), 0.5, 0)
    else:
        raise ValueError(f"no analytic form for model kind {kind!r}")
    label_ids = list(labels) if labels is not None else catalog.ids
    by_label = {lid: [metrics(catalog.prior(lid))] for lid in label_ids}
    return aggregate(by_label, catalog, model=f"{kind}(analytic)", labels=label_ids)
