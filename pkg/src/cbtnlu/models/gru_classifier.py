"""Recurrent classifier over a post's sentence vectors.

A GRU consumes one vector per sentence (problem sentences first, negative
take last, so the strongest summary arrives at the final step); the last
hidden state feeds the same feed-forward sigmoid head as the convolutional
model. Recurrent matrices are initialized orthogonally, input matrices with
a truncated normal. Sentence vectors are inputs, not parameters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..embeddings import SentenceVectorProvider
from ..errors import EmptySequence
from ..numerics import (GruWeights, Parameter, dropout, gru_step,
                        gru_step_backward, init_orthogonal,
                        init_truncated_normal, sigmoid)
from ..textprep import post_sentences
from .common import FeatureCache, FnnHead, GruBatch, collate_gru


@dataclass(frozen=True)
class GruClassifierConfig:
    input_dim: int
    hidden: int = 150
    head_hidden: int = 150

    def to_dict(self) -> dict:
        return {"input_dim": self.input_dim, "hidden": self.hidden,
                "head_hidden": self.head_hidden}

    @classmethod
    def from_dict(cls, d: dict) -> "GruClassifierConfig":
        return cls(input_dim=d["input_dim"], hidden=d["hidden"],
                   head_hidden=d["head_hidden"])


class GruClassifier:
    def __init__(self, config: GruClassifierConfig, seed: int = 0):
        self.config = config
        rng = np.random.default_rng(np.random.SeedSequence([seed, 0x62]))
        h, d = config.hidden, config.input_dim

        def rec(name):  # recurrent: square, orthogonal
            return Parameter(name, init_orthogonal((h, h), rng=rng))

        def inp(name):  # input projection: truncated normal
            return Parameter(name, init_truncated_normal((h, d), rng=rng))

        def bias(name):
            return Parameter(name, np.zeros(h), decay=False)

        self.w_z, self.u_z, self.b_z = rec("gru.w_z"), inp("gru.u_z"), bias("gru.b_z")
        self.w_r, self.u_r, self.b_r = rec("gru.w_r"), inp("gru.u_r"), bias("gru.b_r")
        self.w_c, self.u_c, self.b_c = rec("gru.w_c"), inp("gru.u_c"), bias("gru.b_c")
        self.head = FnnHead(h, config.head_hidden, rng)

    def params(self) -> list[Parameter]:
        return [self.w_z, self.u_z, self.b_z, self.w_r, self.u_r, self.b_r,
                self.w_c, self.u_c, self.b_c] + self.head.params()

    def weights(self) -> GruWeights:
        return GruWeights(self.w_z.value, self.u_z.value, self.b_z.value,
                          self.w_r.value, self.u_r.value, self.b_r.value,
                          self.w_c.value, self.u_c.value, self.b_c.value)

    def grad_views(self) -> GruWeights:
        return GruWeights(self.w_z.grad, self.u_z.grad, self.b_z.grad,
                          self.w_r.grad, self.u_r.grad, self.b_r.grad,
                          self.w_c.grad, self.u_c.grad, self.b_c.grad)

    def forward_batch(self, batch: GruBatch, train: bool = False,
                      rng: np.random.Generator | None = None,
                      keep_prob: float = 1.0):
        b, t, _ = batch.vectors.shape
        if b == 0 or t == 0 or int(batch.lengths.min()) == 0:
            raise EmptySequence("a post in the batch has no sentences")
        weights = self.weights()
        h = np.zeros((b, self.config.hidden))
        steps = []
        for step in range(t):
            live = (step < batch.lengths)[:, None].astype(np.float64)
            h_new, cache = gru_step(h, batch.vectors[:, step, :], weights,
                                    with_cache=True)
            h = live * h_new + (1.0 - live) * h
            steps.append((cache, live))
        h_drop, mask = dropout(h, keep_prob, train, rng)
        logits, head_cache = self.head.forward(h_drop)
        return logits, (steps, mask, head_cache)

    def backward_batch(self, dlogits: np.ndarray, cache) -> None:
        steps, mask, head_cache = cache
        dh = self.head.backward(dlogits, head_cache)
        if mask is not None:
            dh = dh * mask
        weights = self.weights()
        grads = self.grad_views()
        for step_cache, live in reversed(steps):
            dh_prev, _ = gru_step_backward(dh * live, step_cache, weights, grads)
            dh = dh_prev + dh * (1.0 - live)

    def predict_proba_ids(self, post_ids, cache: FeatureCache,
                          batch_size: int = 256) -> np.ndarray:
        out = np.empty(len(post_ids))
        for lo in range(0, len(post_ids), batch_size):
            chunk = post_ids[lo:lo + batch_size]
            logits, _ = self.forward_batch(collate_gru(chunk, cache), train=False)
            out[lo:lo + len(chunk)] = sigmoid(logits)
        return out

    def score_post(self, problem: str, negative_take: str,
                   provider: SentenceVectorProvider) -> float:
        sents = post_sentences(problem, negative_take)
        if not sents:
            raise EmptySequence("post has no sentences after preprocessing")
        fc = FeatureCache(sentence_dim=provider.dim)
        fc.gru["_post"] = np.stack([provider.embed_sentence(s) for s in sents])
        logits, _ = self.forward_batch(collate_gru(["_post"], fc), train=False)
        return float(sigmoid(logits)[0])
