"""Convolutional classifier over word vectors with a learned gate that
blends the two text fields.

Both fields are encoded by the same convolution stack (widths 2/3/4, 50
feature maps each, ReLU, masked max-pool over time) into one vector per
field; a sigmoid gate mixes them elementwise and a small feed-forward head
produces a single probability. Word vectors are frozen, so no gradient
flows into the embedding matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..embeddings import EmbeddingMatrix
from ..errors import EmptyInput, ShapeMismatch
from ..numerics import Parameter, dropout, init_truncated_normal, relu, sigmoid
from ..textprep import post_tokens
from .common import CnnBatch, FnnHead, collate_cnn, FeatureCache


@dataclass(frozen=True)
class GatedCnnConfig:
    embed_dim: int
    widths: tuple[int, ...] = (2, 3, 4)
    maps_per_width: int = 50
    hidden: int = 150
    share_conv: bool = True
    field_cap: int = 200

    @property
    def pooled_dim(self) -> int:
        return len(self.widths) * self.maps_per_width

    def to_dict(self) -> dict:
        return {"embed_dim": self.embed_dim, "widths": list(self.widths),
                "maps_per_width": self.maps_per_width, "hidden": self.hidden,
                "share_conv": self.share_conv, "field_cap": self.field_cap}

    @classmethod
    def from_dict(cls, d: dict) -> "GatedCnnConfig":
        return cls(embed_dim=d["embed_dim"], widths=tuple(d["widths"]),
                   maps_per_width=d["maps_per_width"], hidden=d["hidden"],
                   share_conv=d["share_conv"], field_cap=d["field_cap"])


class GatedCnn:
    def __init__(self, config: GatedCnnConfig, embeddings: EmbeddingMatrix,
                 seed: int = 0):
        if embeddings.dim != config.embed_dim:
            raise ValueError(f"embedding dim {embeddings.dim} != config {config.embed_dim}")
        self.config = config
        self.embeddings = embeddings
        rng = np.random.default_rng(np.random.SeedSequence([seed, 0xC1]))
        d, m = config.embed_dim, config.maps_per_width

        def conv_block(tag: str):
            filters = {w: Parameter(f"conv{tag}.w{w}.filters",
                                    init_truncated_normal((w * d, m), rng=rng))
                       for w in config.widths}
            biases = {w: Parameter(f"conv{tag}.w{w}.bias", np.zeros(m), decay=False)
                      for w in config.widths}
            return filters, biases

        self.filters_p, self.biases_p = conv_block("")
        if config.share_conv:
            self.filters_n, self.biases_n = self.filters_p, self.biases_p
        else:
            self.filters_n, self.biases_n = conv_block("_negtake")

        pooled = config.pooled_dim
        self.gate_w_problem = Parameter("gate.w_problem",
                                        init_truncated_normal((pooled, pooled), rng=rng))
        self.gate_w_negtake = Parameter("gate.w_negtake",
                                        init_truncated_normal((pooled, pooled), rng=rng))
        self.gate_bias = Parameter("gate.bias", np.zeros(pooled), decay=False)
        self.head = FnnHead(pooled, config.hidden, rng)

    def params(self) -> list[Parameter]:
        out: list[Parameter] = []
        seen = set()
        groups = [self.filters_p, self.biases_p, self.filters_n, self.biases_n]
        for group in groups:
            for w in sorted(group):
                p = group[w]
                if id(p) not in seen:
                    seen.add(id(p))
                    out.append(p)
        out += [self.gate_w_problem, self.gate_w_negtake, self.gate_bias]
        out += self.head.params()
        return out

    # --- encoding ---------------------------------------------------------

    def _encode_field(self, idx: np.ndarray, lens: np.ndarray, filters, biases):
        """Conv + masked max-pool one field: (B, T) indices -> (B, pooled).

        The w-token convolution is computed as w shifted projections
        (emb @ filter-slice), which avoids materializing (B, P, w*d)
        window tensors."""
        emb = self.embeddings.take(idx)  # (B, T, d); PAD/OOV rows are zero
        b, t, d = emb.shape
        pooled_parts, caches = [], {}
        for w in self.config.widths:
            n_pos = t - w + 1
            if n_pos < 1:
                raise ShapeMismatch(f"batch width {t} is narrower than "
                                    f"filter width {w}; pad to >= max width")
            filt = filters[w].value
            pre = np.tile(biases[w].value, (b, n_pos, 1))
            for i in range(w):
                pre += emb[:, i:i + n_pos, :] @ filt[i * d:(i + 1) * d, :]
            maps = relu(pre)
            # valid windows: t = 0..len-w, or the single zero-padded one when len < w
            valid_count = np.minimum(
                n_pos, np.where(lens > 0, np.maximum(lens - w + 1, 1), 0))
            valid = np.arange(n_pos)[None, :] < valid_count[:, None]
            masked = np.where(valid[:, :, None], maps, -np.inf)
            pooled = masked.max(axis=1)
            arg = masked.argmax(axis=1)
            empty = valid_count == 0
            pooled[empty] = 0.0
            pooled_parts.append(pooled)
            caches[w] = (emb, pre, arg, empty)
        return np.concatenate(pooled_parts, axis=1), caches

    def _encode_field_backward(self, dpooled: np.ndarray, caches, filters, biases):
        b = dpooled.shape[0]
        m = self.config.maps_per_width
        rows = np.arange(b)[:, None]
        cols = np.arange(m)[None, :]
        for k, w in enumerate(self.config.widths):
            emb, pre, arg, empty = caches[w]
            d = emb.shape[2]
            n_pos = pre.shape[1]
            dpool = dpooled[:, k * m:(k + 1) * m]
            dpool = np.where(empty[:, None], 0.0, dpool)
            dmaps = np.zeros_like(pre)
            dmaps[rows, arg, cols] = dpool
            dpre = (dmaps * (pre > 0.0)).reshape(-1, m)
            for i in range(w):
                window_rows = emb[:, i:i + n_pos, :].reshape(-1, d)
                filters[w].grad[i * d:(i + 1) * d, :] += window_rows.T @ dpre
            biases[w].grad += dpre.sum(axis=0)

    # --- full model --------------------------------------------------------

    def forward_batch(self, batch: CnnBatch, train: bool = False,
                      rng: np.random.Generator | None = None,
                      keep_prob: float = 1.0):
        p_vec, p_cache = self._encode_field(batch.problem_idx, batch.problem_len,
                                            self.filters_p, self.biases_p)
        n_vec, n_cache = self._encode_field(batch.negtake_idx, batch.negtake_len,
                                            self.filters_n, self.biases_n)
        a = (p_vec @ self.gate_w_problem.value.T
             + n_vec @ self.gate_w_negtake.value.T + self.gate_bias.value)
        g = sigmoid(a)
        h = g * p_vec + (1.0 - g) * n_vec
        h_drop, mask = dropout(h, keep_prob, train, rng)
        logits, head_cache = self.head.forward(h_drop)
        cache = (p_vec, p_cache, n_vec, n_cache, g, mask, head_cache)
        return logits, cache

    def backward_batch(self, dlogits: np.ndarray, cache) -> None:
        p_vec, p_cache, n_vec, n_cache, g, mask, head_cache = cache
        dh = self.head.backward(dlogits, head_cache)
        if mask is not None:
            dh = dh * mask
        dg = dh * (p_vec - n_vec)
        da = dg * g * (1.0 - g)
        self.gate_w_problem.grad += da.T @ p_vec
        self.gate_w_negtake.grad += da.T @ n_vec
        self.gate_bias.grad += da.sum(axis=0)
        dp = dh * g + da @ self.gate_w_problem.value
        dn = dh * (1.0 - g) + da @ self.gate_w_negtake.value
        self._encode_field_backward(dp, p_cache, self.filters_p, self.biases_p)
        self._encode_field_backward(dn, n_cache, self.filters_n, self.biases_n)

    def predict_proba_ids(self, post_ids, cache: FeatureCache,
                          batch_size: int = 256) -> np.ndarray:
        out = np.empty(len(post_ids))
        for lo in range(0, len(post_ids), batch_size):
            chunk = post_ids[lo:lo + batch_size]
            logits, _ = self.forward_batch(collate_cnn(chunk, cache), train=False)
            out[lo:lo + len(chunk)] = sigmoid(logits)
        return out

    def score_post(self, problem: str, negative_take: str,
                   vocab) -> float:
        """Probability for one raw post; raises EmptyInput when both fields
        tokenize to nothing."""
        prob_toks, neg_toks = post_tokens(problem, negative_take, self.config.field_cap)
        if not prob_toks and not neg_toks:
            raise EmptyInput("both text fields empty after preprocessing")
        fc = FeatureCache()
        fc.cnn["_post"] = (np.asarray(vocab.encode(prob_toks), dtype=np.int64),
                           np.asarray(vocab.encode(neg_toks), dtype=np.int64))
        logits, _ = self.forward_batch(collate_cnn(["_post"], fc), train=False)
        return float(sigmoid(logits)[0])
