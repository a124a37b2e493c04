"""Weight initializers. All take an explicit generator so runs reproduce."""

from __future__ import annotations

import numpy as np


def init_truncated_normal(shape, mean: float = 0.0, std: float = 0.01, *,
                          rng: np.random.Generator) -> np.ndarray:
    """Normal samples resampled until every value lies within two standard
    deviations of the mean."""
    out = rng.normal(mean, std, size=shape)
    bad = np.abs(out - mean) > 2.0 * std
    while bad.any():
        out[bad] = rng.normal(mean, std, size=int(bad.sum()))
        bad = np.abs(out - mean) > 2.0 * std
    return out


def init_orthogonal(shape, *, rng: np.random.Generator) -> np.ndarray:
    """Orthogonal 2-D init: columns orthonormal for tall matrices, rows for
    wide ones. Signs fixed from the QR factors so the result is unique."""
    if len(shape) != 2:
        raise ValueError(f"orthogonal init needs a 2-D shape, got {shape}")
    m, n = shape
    a = rng.normal(size=(max(m, n), min(m, n)))
    q, r = np.linalg.qr(a)
    q = q * np.sign(np.diag(r))
    if m < n:
        q = q.T
    return np.ascontiguousarray(q)
