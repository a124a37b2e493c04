"""Shared pieces of the two neural classifiers: the feed-forward sigmoid
head, feature caches, and batch collation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..corpus import Dataset
from ..embeddings import SentenceVectorProvider
from ..numerics import Parameter, init_truncated_normal
from ..textprep import PAD_INDEX, Vocabulary, bow_featurize, post_sentences, post_tokens


class FnnHead:
    """tanh hidden layer followed by a single-logit linear output."""

    def __init__(self, in_dim: int, hidden: int, rng: np.random.Generator,
                 prefix: str = "head"):
        self.w1 = Parameter(f"{prefix}.w1", init_truncated_normal((hidden, in_dim), rng=rng))
        self.b1 = Parameter(f"{prefix}.b1", np.zeros(hidden), decay=False)
        self.w2 = Parameter(f"{prefix}.w2", init_truncated_normal((hidden,), rng=rng))
        self.b2 = Parameter(f"{prefix}.b2", np.zeros(1), decay=False)

    def params(self) -> list[Parameter]:
        return [self.w1, self.b1, self.w2, self.b2]

    def forward(self, x: np.ndarray):
        """(B, in_dim) -> logits (B,); returns (logits, cache)."""
        hid = np.tanh(x @ self.w1.value.T + self.b1.value)
        logits = hid @ self.w2.value + self.b2.value[0]
        return logits, (x, hid)

    def backward(self, dlogits: np.ndarray, cache) -> np.ndarray:
        """Accumulate parameter grads; returns gradient w.r.t. the input."""
        x, hid = cache
        self.w2.grad += hid.T @ dlogits
        self.b2.grad += dlogits.sum(keepdims=True)
        dhid = np.outer(dlogits, self.w2.value)
        dpre = dhid * (1.0 - hid * hid)
        self.w1.grad += dpre.T @ x
        self.b1.grad += dpre.sum(axis=0)
        return dpre @ self.w1.value


# --- per-post feature caches ---------------------------------------------------

@dataclass
class FeatureCache:
    """Precomputed per-post model inputs, keyed by post id."""
    cnn: dict[str, tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)
    gru: dict[str, np.ndarray] = field(default_factory=dict)
    bow: dict[str, dict[int, int]] = field(default_factory=dict)
    sentence_dim: int = 0


def build_cnn_features(dataset: Dataset, vocab: Vocabulary, cache: FeatureCache,
                       field_cap: int = 200) -> FeatureCache:
    for post in dataset.posts:
        prob_toks, neg_toks = post_tokens(post.problem, post.negative_take, field_cap)
        cache.cnn[post.id] = (
            np.asarray(vocab.encode(prob_toks), dtype=np.int64),
            np.asarray(vocab.encode(neg_toks), dtype=np.int64),
        )
    return cache


def build_gru_features(dataset: Dataset, provider: SentenceVectorProvider,
                       cache: FeatureCache) -> FeatureCache:
    cache.sentence_dim = provider.dim
    for post in dataset.posts:
        sents = post_sentences(post.problem, post.negative_take)
        if sents:
            vecs = np.stack([provider.embed_sentence(s) for s in sents])
        else:
            vecs = np.zeros((0, provider.dim))
        cache.gru[post.id] = vecs
    return cache


def build_bow_features(dataset: Dataset, vocab: Vocabulary,
                       cache: FeatureCache) -> FeatureCache:
    for post in dataset.posts:
        prob_toks, neg_toks = post_tokens(post.problem, post.negative_take,
                                          field_cap=10 ** 9)
        cache.bow[post.id] = bow_featurize(prob_toks + neg_toks, vocab)
    return cache


@dataclass
class CnnBatch:
    problem_idx: np.ndarray   # (B, Tp) int64, PAD=0, OOV=-1
    problem_len: np.ndarray   # (B,)
    negtake_idx: np.ndarray   # (B, Tn)
    negtake_len: np.ndarray   # (B,)


@dataclass
class GruBatch:
    vectors: np.ndarray  # (B, T, D)
    lengths: np.ndarray  # (B,)


def _pad_indices(seqs: Sequence[np.ndarray], min_len: int) -> tuple[np.ndarray, np.ndarray]:
    lens = np.array([len(s) for s in seqs], dtype=np.int64)
    width = max(int(lens.max(initial=0)), min_len)
    out = np.full((len(seqs), width), PAD_INDEX, dtype=np.int64)
    for i, s in enumerate(seqs):
        out[i, :len(s)] = s
    return out, lens


def collate_cnn(post_ids: Sequence[str], cache: FeatureCache,
                min_len: int = 4) -> CnnBatch:
    probs = [cache.cnn[pid][0] for pid in post_ids]
    negs = [cache.cnn[pid][1] for pid in post_ids]
    p_idx, p_len = _pad_indices(probs, min_len)
    n_idx, n_len = _pad_indices(negs, min_len)
    return CnnBatch(p_idx, p_len, n_idx, n_len)


def collate_gru(post_ids: Sequence[str], cache: FeatureCache) -> GruBatch:
    seqs = [cache.gru[pid] for pid in post_ids]
    lens = np.array([s.shape[0] for s in seqs], dtype=np.int64)
    width = max(int(lens.max(initial=0)), 1)
    dim = cache.sentence_dim
    out = np.zeros((len(seqs), width, dim))
    for i, s in enumerate(seqs):
        out[i, :s.shape[0], :] = s
    return GruBatch(out, lens)
