"""Model bundles: a directory with a manifest, the vocabulary, word vectors
and one parameter checkpoint per label, loadable into a Predictor."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from ..corpus import Post
from ..embeddings import (EmbeddingMatrix, SentenceVectorProvider,
                          load_vectors, save_vectors)
from ..numerics import Parameter, load_into, save_checkpoint
from ..textprep import Vocabulary
from .common import FeatureCache, build_bow_features, build_cnn_features, build_gru_features
from .gated_cnn import GatedCnn, GatedCnnConfig
from .gru_classifier import GruClassifier, GruClassifierConfig
from .linear_bow import LinearBowParams, linear_proba, make_linear

log = logging.getLogger(__name__)


def _linear_params_to_ckpt(params: LinearBowParams) -> list[Parameter]:
    return [Parameter("linear.weights", params.weights),
            Parameter("linear.bias", np.array([params.bias]), decay=False)]


def save_bundle(out_dir, kind: str, label_models: Mapping[str, object],
                vocab: Vocabulary, matrix: EmbeddingMatrix | None,
                model_config: dict, train_config: dict,
                metrics: Mapping[str, dict] | None = None) -> None:
    """Write a bundle directory. `label_models` maps label id to a trained
    GatedCnn / GruClassifier / LinearBowParams."""
    out = Path(out_dir)
    (out / "ckpt").mkdir(parents=True, exist_ok=True)
    vocab.save(out / "vocab.tsv")
    if matrix is not None:
        save_vectors(matrix, out / "vectors.txt")
    labels_entry = {}
    for label, model in label_models.items():
        ckpt = f"ckpt/{label}.ckpt"
        if isinstance(model, LinearBowParams):
            save_checkpoint(out / ckpt, _linear_params_to_ckpt(model))
        else:
            save_checkpoint(out / ckpt, model.params())
        labels_entry[label] = {"checkpoint": ckpt}
        if metrics and label in metrics:
            labels_entry[label]["metrics"] = metrics[label]
    manifest = {
        "kind": kind,
        "model_config": model_config,
        "train_config": train_config,
        "labels": labels_entry,
        "vocab": "vocab.tsv",
        "vectors": "vectors.txt" if matrix is not None else None,
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


@dataclass
class Predictor:
    """Loaded per-label models of one kind plus everything needed to score
    raw posts."""

    kind: str
    vocab: Vocabulary
    matrix: EmbeddingMatrix | None
    provider: SentenceVectorProvider | None
    models: dict[str, object]
    threshold: float = 0.5

    @property
    def labels(self) -> list[str]:
        return sorted(self.models)

    def missing_labels(self, catalog) -> list[str]:
        """Catalog labels this bundle has no model for (reported, skipped)."""
        return [lid for lid in catalog.ids if lid not in self.models]

    def features_for(self, posts: list[Post]) -> FeatureCache:
        from ..corpus import Dataset
        ds = Dataset(posts=list(posts))
        cache = FeatureCache()
        if self.kind == "cnn":
            build_cnn_features(ds, self.vocab, cache)
        elif self.kind == "gru":
            build_gru_features(ds, self.provider, cache)
        else:
            build_bow_features(ds, self.vocab, cache)
        return cache

    def score_posts(self, posts: list[Post]) -> dict[str, dict[str, float]]:
        """Per-post, per-label probabilities."""
        cache = self.features_for(posts)
        ids = [p.id for p in posts]
        scores: dict[str, dict[str, float]] = {pid: {} for pid in ids}
        for label in self.labels:
            model = self.models[label]
            if isinstance(model, LinearBowParams):
                probs = [linear_proba(model, cache.bow[pid]) for pid in ids]
            else:
                probs = model.predict_proba_ids(ids, cache)
            for pid, prob in zip(ids, probs):
                scores[pid][label] = float(prob)
        return scores

    def predict_posts(self, posts: list[Post],
                      threshold: float | None = None
                      ) -> dict[str, tuple[frozenset[str], dict[str, float]]]:
        """Label set (score >= threshold) plus all scores, per post."""
        thr = self.threshold if threshold is None else threshold
        out = {}
        for pid, scores in self.score_posts(posts).items():
            chosen = frozenset(lab for lab, s in scores.items() if s >= thr)
            out[pid] = (chosen, scores)
        return out


def load_bundle(bundle_dir) -> Predictor:
    bundle = Path(bundle_dir)
    with open(bundle / "manifest.json", encoding="utf-8") as fh:
        manifest = json.load(fh)
    kind = manifest["kind"]
    vocab = Vocabulary.load(bundle / manifest["vocab"])
    matrix = None
    provider = None
    if manifest.get("vectors"):
        matrix = load_vectors(bundle / manifest["vectors"], vocab)
        provider = SentenceVectorProvider.mean_pool(matrix)
    models: dict[str, object] = {}
    for label, entry in manifest["labels"].items():
        ckpt = bundle / entry["checkpoint"]
        if kind == "cnn":
            model = GatedCnn(GatedCnnConfig.from_dict(manifest["model_config"]),
                             matrix, seed=0)
            load_into(ckpt, model.params())
        elif kind == "gru":
            model = GruClassifier(
                GruClassifierConfig.from_dict(manifest["model_config"]), seed=0)
            load_into(ckpt, model.params())
        else:
            mode = "logistic" if kind == "lr" else "hinge"
            model = make_linear(len(vocab), mode)
            holders = _linear_params_to_ckpt(model)
            load_into(ckpt, holders)
            model.weights = holders[0].value
            model.bias = float(holders[1].value[0])
        models[label] = model
    threshold = manifest.get("train_config", {}).get("threshold", 0.5)
    return Predictor(kind=kind, vocab=vocab, matrix=matrix, provider=provider,
                     models=models, threshold=threshold)
