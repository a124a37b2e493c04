"""Cohen's kappa on 2x2 contingency tables and the per-category agreement
report between two annotators.

Per category, every (post, label) pair contributes one binary decision per
annotator; the pooled 2x2 table yields one kappa with a 95% confidence
interval from the large-sample standard error
sqrt(p_o (1 - p_o) / (n (1 - p_e)^2)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from ..errors import DegenerateTable, NoDoublyAnnotatedPosts
from ..ontology import Category, LabelCatalog


@dataclass(frozen=True)
class ContingencyTable:
    """Counts of paired binary decisions: `a` is the first annotator's call."""
    both_pos: int
    a_pos_b_neg: int
    a_neg_b_pos: int
    both_neg: int

    @property
    def total(self) -> int:
        return self.both_pos + self.a_pos_b_neg + self.a_neg_b_pos + self.both_neg

    def transpose(self) -> "ContingencyTable":
        return ContingencyTable(self.both_pos, self.a_neg_b_pos,
                                self.a_pos_b_neg, self.both_neg)


@dataclass(frozen=True)
class KappaResult:
    kappa: float
    se: float
    ci_low: float
    ci_high: float
    n: int


def cohen_kappa(table: ContingencyTable) -> KappaResult:
    """Chance-corrected agreement with a 95% confidence interval."""
    n = table.total
    if n <= 0:
        raise ValueError("contingency table is empty")
    p_o = (table.both_pos + table.both_neg) / n
    a_pos = (table.both_pos + table.a_pos_b_neg) / n
    b_pos = (table.both_pos + table.a_neg_b_pos) / n
    p_e = a_pos * b_pos + (1.0 - a_pos) * (1.0 - b_pos)
    if p_e >= 1.0:
        # Both annotators constant: agreement is perfect or kappa is undefined.
        if p_o == 1.0:
            return KappaResult(1.0, 0.0, 1.0, 1.0, n)
        raise DegenerateTable(f"p_e = 1 with p_o = {p_o:.4f}")
    kappa = (p_o - p_e) / (1.0 - p_e)
    se = math.sqrt(p_o * (1.0 - p_o) / (n * (1.0 - p_e) ** 2))
    half = 1.96 * se
    return KappaResult(kappa=kappa, se=se, ci_low=kappa - half,
                       ci_high=kappa + half, n=n)


def pooled_category_table(annotations_a: Mapping[str, frozenset[str]],
                          annotations_b: Mapping[str, frozenset[str]],
                          category: Category, catalog: LabelCatalog,
                          post_ids) -> ContingencyTable:
    labels = [lab.id for lab in catalog.by_category(category)]
    bp = apbn = anbp = bn = 0
    for pid in post_ids:
        set_a = annotations_a[pid]
        set_b = annotations_b[pid]
        for lid in labels:
            a = lid in set_a
            b = lid in set_b
            if a and b:
                bp += 1
            elif a:
                apbn += 1
            elif b:
                anbp += 1
            else:
                bn += 1
    return ContingencyTable(bp, apbn, anbp, bn)


def _label_table(annotations_a, annotations_b, label_id: str,
                 post_ids) -> ContingencyTable:
    bp = apbn = anbp = bn = 0
    for pid in post_ids:
        a = label_id in annotations_a[pid]
        b = label_id in annotations_b[pid]
        if a and b:
            bp += 1
        elif a:
            apbn += 1
        elif b:
            anbp += 1
        else:
            bn += 1
    return ContingencyTable(bp, apbn, anbp, bn)


@dataclass(frozen=True)
class AgreementReport:
    n_posts: int
    per_category: dict[str, KappaResult]
    mode: str = "pooled"


def agreement_report(annotations_a: Mapping[str, frozenset[str]],
                     annotations_b: Mapping[str, frozenset[str]],
                     catalog: LabelCatalog, mode: str = "pooled") -> AgreementReport:
    """Per-category kappa over the posts annotated by both annotators.

    `pooled` (default) pools every (post, label) decision of a category
    into one 2x2 table. `per_label` computes one kappa per label and
    reports the unweighted mean, with the mean's standard error under
    independence; labels that degenerate (both annotators constant with
    disagreement) are skipped.
    """
    if mode not in ("pooled", "per_label"):
        raise ValueError(f"unknown agreement mode {mode!r}")
    shared = sorted(set(annotations_a) & set(annotations_b))
    if not shared:
        raise NoDoublyAnnotatedPosts("the annotators share no annotated post")
    per_category = {}
    for cat in Category:
        if mode == "pooled":
            table = pooled_category_table(annotations_a, annotations_b, cat,
                                          catalog, shared)
            per_category[cat.value] = cohen_kappa(table)
            continue
        results = []
        for lab in catalog.by_category(cat):
            table = _label_table(annotations_a, annotations_b, lab.id, shared)
            try:
                results.append(cohen_kappa(table))
            except DegenerateTable:
                continue
        if not results:
            raise DegenerateTable(f"no label of {cat.value} has a defined kappa")
        mean = sum(r.kappa for r in results) / len(results)
        se = math.sqrt(sum(r.se ** 2 for r in results)) / len(results)
        half = 1.96 * se
        per_category[cat.value] = KappaResult(
            kappa=mean, se=se, ci_low=mean - half, ci_high=mean + half,
            n=sum(r.n for r in results))
    return AgreementReport(n_posts=len(shared), per_category=per_category,
                           mode=mode)
