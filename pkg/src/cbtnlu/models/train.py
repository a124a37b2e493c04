"""Per-label binary training loops.

Neural models: mini-batches over the oversampled stream, binary
cross-entropy plus L2, Adam with global-norm clipping and the staircase
learning rate; after each epoch the validation F1 decides early stopping
and which checkpoint is kept.

Linear models: per-instance subgradient descent with the same oversampling
and selection protocol.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ..corpus import OversampleSpec, oversample
from ..errors import NonFiniteLoss
from ..evaluation.metrics import binary_counts, prf1
from ..numerics import (AdamState, LrSchedule, add_l2_grads, adam_update,
                        clip_global_norm, copy_values, l2_penalty, load_values,
                        lr_at, sigmoid, stable_bce, zero_grads)
from .common import FeatureCache, collate_cnn, collate_gru
from .linear_bow import LinearBowParams, linear_proba, make_linear, sgd_instance

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    batch: int = 24
    max_epochs: int = 30
    patience: int = 10
    ratio: OversampleSpec = field(default_factory=OversampleSpec)
    lr: LrSchedule = field(default_factory=LrSchedule)
    keep_prob: float = 0.8
    l2: float = 1e-4
    clip_norm: float = 5.0
    linear_lr: float = 0.1
    threshold: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.batch < 1 or self.max_epochs < 1 or self.patience < 1:
            raise ValueError("batch, max_epochs and patience must be positive")

    def to_dict(self) -> dict:
        return {"batch": self.batch, "max_epochs": self.max_epochs,
                "patience": self.patience, "ratio": str(self.ratio),
                "lr": {"initial": self.lr.initial, "decay": self.lr.decay,
                       "interval": self.lr.interval},
                "keep_prob": self.keep_prob, "l2": self.l2,
                "clip_norm": self.clip_norm, "linear_lr": self.linear_lr,
                "threshold": self.threshold, "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        kwargs = dict(d)
        if "ratio" in kwargs:
            kwargs["ratio"] = OversampleSpec.parse(kwargs["ratio"])
        if "lr" in kwargs:
            kwargs["lr"] = LrSchedule(**kwargs["lr"])
        return cls(**kwargs)

    @classmethod
    def from_json_file(cls, path) -> "TrainConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_f1: float


@dataclass
class TrainResult:
    history: list[EpochRecord]
    best_val_f1: float
    best_epoch: int


def _val_f1(probs: np.ndarray, ids: Sequence[str],
            gold: Mapping[str, frozenset[str]], label: str,
            threshold: float) -> float:
    pred = {pid: bool(p >= threshold) for pid, p in zip(ids, probs)}
    positives = {pid for pid in ids if label in gold.get(pid, frozenset())}
    return prf1(binary_counts(pred, positives, ids)).f1


def train_binary(model, kind: str, label: str, train_ids: Sequence[str],
                 val_ids: Sequence[str], gold: Mapping[str, frozenset[str]],
                 features: FeatureCache, config: TrainConfig) -> TrainResult:
    """Train one neural per-label classifier; the model ends up holding the
    parameters of its best validation epoch."""
    collate = collate_cnn if kind == "cnn" else collate_gru
    stream = oversample(train_ids, gold, label, config.ratio, seed=config.seed)
    ss = np.random.SeedSequence([config.seed, 0x7A41])
    drop_rng, shuffle_rng = (np.random.default_rng(c) for c in ss.spawn(2))
    params = model.params()
    adam = AdamState()
    y_all = {pid: float(label in gold.get(pid, frozenset())) for pid in set(stream)}

    history: list[EpochRecord] = []
    best = copy_values(params)
    best_f1 = -1.0
    best_epoch = -1
    for epoch in range(config.max_epochs):
        order = shuffle_rng.permutation(len(stream))
        losses = []
        for lo in range(0, len(stream), config.batch):
            chunk = [stream[i] for i in order[lo:lo + config.batch]]
            batch = collate(chunk, features)
            y = np.array([y_all[pid] for pid in chunk])
            logits, cache = model.forward_batch(batch, train=True, rng=drop_rng,
                                                keep_prob=config.keep_prob)
            loss = float(stable_bce(logits, y).mean()) + l2_penalty(params, config.l2)
            if not np.isfinite(loss):
                raise NonFiniteLoss(f"label {label!r}, epoch {epoch}, "
                                    f"batch at {lo}: loss={loss}")
            dlogits = (sigmoid(logits) - y) / len(chunk)
            model.backward_batch(dlogits, cache)
            add_l2_grads(params, config.l2)
            clip_global_norm(params, config.clip_norm)
            adam_update(params, adam, lr_at(adam.step, config.lr))
            losses.append(loss)
        probs = model.predict_proba_ids(list(val_ids), features)
        f1 = _val_f1(probs, list(val_ids), gold, label, config.threshold)
        history.append(EpochRecord(epoch, float(np.mean(losses)), f1))
        if f1 > best_f1:
            best_f1, best_epoch = f1, epoch
            best = copy_values(params)
        elif epoch - best_epoch >= config.patience:
            break
    load_values(params, best)
    zero_grads(params)
    return TrainResult(history=history, best_val_f1=best_f1, best_epoch=best_epoch)


def train_linear(loss_mode: str, label: str, train_ids: Sequence[str],
                 val_ids: Sequence[str], gold: Mapping[str, frozenset[str]],
                 features: FeatureCache, config: TrainConfig,
                 vocab_size: int) -> tuple[LinearBowParams, TrainResult]:
    """Train a logistic or hinge bag-of-words classifier with the same
    oversampling and validation-selection protocol as the neural models."""
    stream = oversample(train_ids, gold, label, config.ratio, seed=config.seed)
    shuffle_rng = np.random.default_rng(np.random.SeedSequence([config.seed, 0x11]))
    params = make_linear(vocab_size, loss_mode)
    y_all = {pid: int(label in gold.get(pid, frozenset())) for pid in set(stream)}

    history: list[EpochRecord] = []
    best_w, best_b = params.weights.copy(), params.bias
    best_f1 = -1.0
    best_epoch = -1
    for epoch in range(config.max_epochs):
        order = shuffle_rng.permutation(len(stream))
        lr = config.linear_lr / (1.0 + epoch)
        for i in order:
            pid = stream[i]
            sgd_instance(params, features.bow[pid], y_all[pid], lr, config.l2)
        probs = np.array([linear_proba(params, features.bow[pid]) for pid in val_ids])
        f1 = _val_f1(probs, list(val_ids), gold, label, config.threshold)
        history.append(EpochRecord(epoch, 0.0, f1))
        if f1 > best_f1:
            best_f1, best_epoch = f1, epoch
            best_w, best_b = params.weights.copy(), params.bias
        elif epoch - best_epoch >= config.patience:
            break
    params.weights, params.bias = best_w, best_b
    return params, TrainResult(history=history, best_val_f1=best_f1,
                               best_epoch=best_epoch)
