"""K-fold cross-validation experiment harness: per (fold, label) train, select on
validation, evaluate on the untouched test partition; aggregate per-label
mean and std across folds; optional sweep over oversampling ratios."""

from __future__ import annotations

import io
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .corpus import Dataset, FoldPlan, OversampleSpec, split_folds
from .embeddings import EmbeddingMatrix, SentenceVectorProvider
from .errors import CbtnluError
from .models.baselines import chance_predict, majority_predict
from .models.common import (FeatureCache, build_bow_features,
                             build_cnn_features, build_gru_features)
from .models.gated_cnn import GatedCnn, GatedCnnConfig
from .models.gru_classifier import GruClassifier, GruClassifierConfig
from .models.linear_bow import linear_proba
from .models.train import TrainConfig, train_binary, train_linear
from .ontology import LabelCatalog
from .textprep import Vocabulary
from .evaluation.metrics import (LabelMetrics, ReportTable, aggregate, binary_counts,
                      prf1)

log = logging.getLogger(__name__)

MODEL_KINDS = ("cnn", "gru", "lr", "svm", "chance", "majority")


@dataclass(frozen=True)
class JobError:
    fold: int
    label: str
    error: str
    message: str


@dataclass
class CVResult:
    kind: str
    ratio: str
    report: ReportTable
    metrics_by_label: dict[str, list[LabelMetrics]]
    errors: list[JobError]


def labeled_subset(dataset: Dataset) -> Dataset:
    """Posts that carry gold labels (cross-validation operates on these)."""
    posts = [p for p in dataset.posts if p.id in dataset.gold]
    return Dataset(posts=posts, gold=dict(dataset.gold))


def job_seed(base_seed: int, fold: int, label_index: int) -> int:
    ss = np.random.SeedSequence([base_seed, fold, label_index])
    return int(ss.generate_state(1)[0])


def build_features(kind: str, dataset: Dataset, vocab: Vocabulary | None,
                   matrix: EmbeddingMatrix | None,
                   provider: SentenceVectorProvider | None) -> FeatureCache:
    cache = FeatureCache()
    if kind == "cnn":
        build_cnn_features(dataset, vocab, cache)
    elif kind == "gru":
        build_gru_features(dataset, provider, cache)
    elif kind in ("lr", "svm"):
        build_bow_features(dataset, vocab, cache)
    return cache


def _run_job(kind: str, label: str, fold_i: int, train_ids, val_ids, test_ids,
             gold, features: FeatureCache, config: TrainConfig,
             matrix: EmbeddingMatrix | None, vocab_size: int) -> LabelMetrics:
    seed = job_seed(config.seed, fold_i, hash_label(label))
    cfg = replace(config, seed=seed)
    test_ids = list(test_ids)
    if kind == "majority":
        pred = majority_predict(test_ids)
    elif kind == "chance":
        pred = chance_predict(test_ids, seed)
    elif kind in ("lr", "svm"):
        mode = "logistic" if kind == "lr" else "hinge"
        params, _ = train_linear(mode, label, train_ids, val_ids, gold,
                                 features, cfg, vocab_size)
        pred = {pid: linear_proba(params, features.bow[pid]) >= cfg.threshold
                for pid in test_ids}
    elif kind in ("cnn", "gru"):
        if kind == "cnn":
            model = GatedCnn(GatedCnnConfig(embed_dim=matrix.dim), matrix, seed=seed)
        else:
            model = GruClassifier(
                GruClassifierConfig(input_dim=features.sentence_dim), seed=seed)
        train_binary(model, kind, label, train_ids, val_ids, gold, features, cfg)
        probs = model.predict_proba_ids(test_ids, features)
        pred = {pid: bool(p >= cfg.threshold) for pid, p in zip(test_ids, probs)}
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    positives = {pid for pid in test_ids if label in gold.get(pid, frozenset())}
    return prf1(binary_counts(pred, positives, test_ids), label=label)


def hash_label(label: str) -> int:
    """Stable small integer for seed derivation (hash() is salted per run)."""
    return sum((i + 1) * ord(c) for i, c in enumerate(label)) % 100003


def cross_validate(kind: str, label_ids: Sequence[str], dataset: Dataset,
                   config: TrainConfig, catalog: LabelCatalog, *,
                   vocab: Vocabulary | None = None,
                   matrix: EmbeddingMatrix | None = None,
                   provider: SentenceVectorProvider | None = None,
                   k: int = 10, plan: FoldPlan | None = None,
                   jobs: int = 1) -> CVResult:
    """Run k-fold cross-validation for one model kind over the given labels.

    Failures of single (fold, label) jobs are recorded and skipped; the
    report covers whatever completed.
    """
    if kind not in MODEL_KINDS:
        raise ValueError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")
    if kind == "cnn" and (vocab is None or matrix is None):
        raise ValueError("cnn cross-validation needs vocab and matrix")
    if kind == "gru" and provider is None:
        raise ValueError("gru cross-validation needs a sentence-vector provider")
    if kind in ("lr", "svm") and vocab is None:
        raise ValueError(f"{kind} cross-validation needs a vocabulary")
    data = labeled_subset(dataset)
    if plan is None:
        plan = split_folds(data, k=k, seed=config.seed)
    features = build_features(kind, data, vocab, matrix, provider)
    vocab_size = len(vocab) if vocab is not None else 0

    jobs_list = [(fold_i, label) for fold_i in range(plan.k) for label in label_ids]
    results: dict[tuple[int, str], LabelMetrics] = {}
    errors: list[JobError] = []

    def run_one(fold_i: int, label: str):
        fold = plan.folds[fold_i]
        return _run_job(kind, label, fold_i, fold.train, fold.val, fold.test,
                        data.gold, features, config, matrix, vocab_size)

    if jobs <= 1:
        for fold_i, label in jobs_list:
            try:
                results[(fold_i, label)] = run_one(fold_i, label)
            except CbtnluError as exc:
                errors.append(JobError(fold_i, label, type(exc).__name__, str(exc)))
                log.warning("fold %d label %s failed: %s", fold_i, label, exc)
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {
                (fold_i, label): pool.submit(
                    _run_job, kind, label, fold_i, plan.folds[fold_i].train,
                    plan.folds[fold_i].val, plan.folds[fold_i].test, data.gold,
                    features, config, matrix, vocab_size)
                for fold_i, label in jobs_list
            }
            for key, fut in futures.items():
                try:
                    results[key] = fut.result()
                except CbtnluError as exc:
                    errors.append(JobError(key[0], key[1], type(exc).__name__,
                                           str(exc)))
                    log.warning("fold %d label %s failed: %s", key[0], key[1], exc)

    metrics_by_label: dict[str, list[LabelMetrics]] = {lab: [] for lab in label_ids}
    for (fold_i, label) in sorted(results):
        metrics_by_label[label].append(results[(fold_i, label)])
    report = aggregate(metrics_by_label, catalog,
                       model=f"{kind}@{config.ratio}", labels=list(label_ids))
    return CVResult(kind=kind, ratio=str(config.ratio), report=report,
                    metrics_by_label=metrics_by_label, errors=errors)


def sweep_ratios(kind: str, label_ids: Sequence[str], dataset: Dataset,
                 config: TrainConfig, catalog: LabelCatalog,
                 ratios: Sequence[OversampleSpec], **kwargs) -> list[CVResult]:
    """One cross-validation per oversampling ratio (same folds throughout)."""
    out = []
    for ratio in ratios:
        out.append(cross_validate(kind, label_ids, dataset,
                                  replace(config, ratio=ratio), catalog, **kwargs))
    return out


def sweep_csv(results: Sequence[CVResult]) -> str:
    out = io.StringIO()
    out.write("model,ratio,weighted_f1,macro_f1\n")
    for res in results:
        out.write(f"{res.kind},{res.ratio},{res.report.weighted_f1:.6f},"
                  f"{res.report.macro_f1:.6f}\n")
    return out.getvalue()
