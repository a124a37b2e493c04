"""Dense kernels with hand-written backward passes.

Everything operates on float64 numpy arrays. Single-example entry points
(`conv_encode`, `max_pool_time`, `gru_step`, `gate_combine`) define the
reference semantics; the model classes use batched variants of the same
math built from these building blocks.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np

from ..errors import ShapeMismatch


def sigmoid(x: np.ndarray | float) -> np.ndarray | float:
    # Clipping keeps exp() finite; 500 is far beyond float64 sigmoid saturation.
    return 1.0 / (1.0 + np.exp(-np.clip(x, -500.0, 500.0)))


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def stable_bce(logits: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Elementwise binary cross-entropy from logits, computed without overflow."""
    return np.maximum(logits, 0.0) - logits * targets + np.log1p(np.exp(-np.abs(logits)))


# --- convolution over time ---------------------------------------------------

def _windows(x: np.ndarray, width: int) -> np.ndarray:
    """(T, d) -> (T - width + 1, width * d) sliding windows; zero-pads if T < width."""
    t, d = x.shape
    if t < width:
        x = np.vstack([x, np.zeros((width - t, d))])
        t = width
    return np.concatenate([x[i:t - width + 1 + i] for i in range(width)], axis=1)


def conv_encode(token_vectors: np.ndarray,
                filters: Mapping[int, np.ndarray],
                biases: Mapping[int, np.ndarray]) -> dict[int, np.ndarray]:
    """ReLU feature maps per filter width.

    `filters[w]` has shape (w*d, n_maps); output[w][t, j] is the filter-j
    response over tokens t..t+w-1. Sequences shorter than a width are
    zero-padded to it, giving a single output position.
    """
    if token_vectors.ndim != 2:
        raise ShapeMismatch(f"token_vectors must be 2-D, got {token_vectors.shape}")
    d = token_vectors.shape[1]
    maps: dict[int, np.ndarray] = {}
    for w, filt in filters.items():
        if filt.shape[0] != w * d:
            raise ShapeMismatch(f"width {w}: filter rows {filt.shape[0]} != {w}*{d}")
        maps[w] = relu(_windows(token_vectors, w) @ filt + biases[w])
    return maps


def conv_valid_count(n_tokens: int, width: int, n_positions: int) -> int:
    """Number of valid window positions for a sequence of `n_tokens` real
    tokens inside a buffer offering `n_positions` windows.

    Real windows run t = 0..n_tokens-width; a sequence shorter than the
    width keeps exactly one (zero-padded) position, so appending padding
    never changes the pooled output."""
    if n_tokens <= 0:
        return 0
    return min(n_positions, max(n_tokens - width + 1, 1))


def max_pool_time(feature_maps: Mapping[int, np.ndarray],
                  valid: Mapping[int, np.ndarray] | None = None) -> np.ndarray:
    """Per-filter max over valid time positions, concatenated across widths.

    `valid[w]` is a boolean mask over positions; positions whose window holds
    only padding are excluded. If every position is masked the pooled slice
    is zero.
    """
    pooled = []
    for w in sorted(feature_maps):
        maps = feature_maps[w]
        if valid is not None:
            mask = np.asarray(valid[w], dtype=bool)
            if mask.shape[0] != maps.shape[0]:
                raise ShapeMismatch(f"width {w}: mask length {mask.shape[0]} != "
                                    f"{maps.shape[0]} positions")
            if not mask.any():
                pooled.append(np.zeros(maps.shape[1]))
                continue
            maps = maps[mask]
        pooled.append(maps.max(axis=0))
    return np.concatenate(pooled)


# --- gating -------------------------------------------------------------------

def gate_combine(p: np.ndarray, n: np.ndarray,
                 w_p: np.ndarray, w_n: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Sigmoid-gated blend of two feature vectors: g*p + (1-g)*n.

    g = sigmoid(w_p @ p + w_n @ n + b), so the output lies elementwise
    between the two inputs.
    """
    if p.shape != n.shape or w_p.shape != w_n.shape or w_p.shape[1] != p.shape[-1]:
        raise ShapeMismatch(f"gate shapes: p{p.shape} n{n.shape} w_p{w_p.shape}")
    g = sigmoid(p @ w_p.T + n @ w_n.T + b)
    return g * p + (1.0 - g) * n


# --- GRU step ------------------------------------------------------------------

class GruWeights:
    """The nine tensors of one GRU cell.

    Recurrent matrices (w_*) act on the previous hidden state, input matrices
    (u_*) on the incoming vector; the candidate state is
    tanh(w_c @ (r*h) + u_c @ e + b_c) and the update gate keeps the OLD
    state: h_t = z*h_prev + (1-z)*candidate.
    """

    __slots__ = ("w_z", "u_z", "b_z", "w_r", "u_r", "b_r", "w_c", "u_c", "b_c")

    def __init__(self, w_z, u_z, b_z, w_r, u_r, b_r, w_c, u_c, b_c):
        self.w_z, self.u_z, self.b_z = w_z, u_z, b_z
        self.w_r, self.u_r, self.b_r = w_r, u_r, b_r
        self.w_c, self.u_c, self.b_c = w_c, u_c, b_c


def gru_step(h_prev: np.ndarray, e_t: np.ndarray, weights: GruWeights,
             with_cache: bool = False):
    """One GRU update; accepts (H,)/(D,) vectors or (B,H)/(B,D) batches."""
    hidden = weights.w_z.shape[0]
    if h_prev.shape[-1] != hidden or e_t.shape[-1] != weights.u_z.shape[1]:
        raise ShapeMismatch(f"gru shapes: h{h_prev.shape} e{e_t.shape} "
                            f"w_z{weights.w_z.shape} u_z{weights.u_z.shape}")
    z = sigmoid(h_prev @ weights.w_z.T + e_t @ weights.u_z.T + weights.b_z)
    r = sigmoid(h_prev @ weights.w_r.T + e_t @ weights.u_r.T + weights.b_r)
    rh = r * h_prev
    c = np.tanh(rh @ weights.w_c.T + e_t @ weights.u_c.T + weights.b_c)
    h = z * h_prev + (1.0 - z) * c
    if with_cache:
        return h, (h_prev, e_t, z, r, rh, c)
    return h


def gru_step_backward(dh: np.ndarray, cache, weights: GruWeights, grads: GruWeights):
    """Backpropagate one GRU step; returns (dh_prev, de_t) and accumulates
    parameter gradients into `grads` (a GruWeights of gradient arrays).

    Inputs may be single vectors or batches; 2-D is assumed for the outer
    products, so vectors are promoted.
    """
    h_prev, e_t, z, r, rh, c = cache
    squeeze = dh.ndim == 1
    if squeeze:
        dh, h_prev, e_t, z, r, rh, c = (a[None, :] for a in (dh, h_prev, e_t, z, r, rh, c))

    dz = dh * (h_prev - c)
    dc = dh * (1.0 - z)
    dh_prev = dh * z

    dac = dc * (1.0 - c * c)
    grads.w_c += dac.T @ rh
    grads.u_c += dac.T @ e_t
    grads.b_c += dac.sum(axis=0)
    drh = dac @ weights.w_c
    de = dac @ weights.u_c
    dr = drh * h_prev
    dh_prev = dh_prev + drh * r

    dar = dr * r * (1.0 - r)
    grads.w_r += dar.T @ h_prev
    grads.u_r += dar.T @ e_t
    grads.b_r += dar.sum(axis=0)
    dh_prev = dh_prev + dar @ weights.w_r
    de = de + dar @ weights.u_r

    daz = dz * z * (1.0 - z)
    grads.w_z += daz.T @ h_prev
    grads.u_z += daz.T @ e_t
    grads.b_z += daz.sum(axis=0)
    dh_prev = dh_prev + daz @ weights.w_z
    de = de + daz @ weights.u_z

    if squeeze:
        return dh_prev[0], de[0]
    return dh_prev, de


# --- dropout -------------------------------------------------------------------

def dropout(x: np.ndarray, keep_prob: float, training: bool,
            rng: np.random.Generator | None = None):
    """Inverted dropout: kept elements are scaled by 1/keep_prob so the
    expectation is unchanged; identity at inference. Returns (output, mask)."""
    if not 0.0 < keep_prob <= 1.0:
        raise ValueError(f"keep_prob must be in (0, 1], got {keep_prob}")
    if not training or keep_prob == 1.0:
        return x, None
    if rng is None:
        raise ValueError("training-mode dropout needs a random generator")
    mask = (rng.random(x.shape) < keep_prob) / keep_prob
    return x * mask, mask
