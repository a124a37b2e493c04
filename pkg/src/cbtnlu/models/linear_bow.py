"""Linear bag-of-words baselines: logistic regression and a hinge-loss SVM,
both trained with seeded per-instance (sub)gradient descent over sparse
count features, with L2 decay on the weight vector."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..numerics import sigmoid


@dataclass
class LinearBowParams:
    weights: np.ndarray  # (V,)
    bias: float
    loss_mode: str  # "logistic" | "hinge"


def make_linear(vocab_size: int, loss_mode: str) -> LinearBowParams:
    if loss_mode not in ("logistic", "hinge"):
        raise ValueError(f"unknown loss mode {loss_mode!r}")
    return LinearBowParams(weights=np.zeros(vocab_size), bias=0.0, loss_mode=loss_mode)


def linear_score(params: LinearBowParams, feats: dict[int, int]) -> float:
    return sum(params.weights[i] * c for i, c in feats.items()) + params.bias


def linear_proba(params: LinearBowParams, feats: dict[int, int]) -> float:
    """Probability-like score: sigmoid of the margin (both loss modes)."""
    return float(sigmoid(linear_score(params, feats)))


def sgd_instance(params: LinearBowParams, feats: dict[int, int], label: int,
                 lr: float, lam: float) -> None:
    """One subgradient step. For hinge with margin > 1 only the L2 decay
    applies; the data term is flat there."""
    if lam > 0.0:
        params.weights *= max(0.0, 1.0 - 2.0 * lam * lr)
    score = linear_score(params, feats)
    if params.loss_mode == "logistic":
        g = sigmoid(score) - label
    else:
        y = 2 * label - 1
        g = -y if y * score < 1.0 else 0.0
    if g != 0.0:
        for i, c in feats.items():
            params.weights[i] -= lr * g * c
        params.bias -= lr * g
