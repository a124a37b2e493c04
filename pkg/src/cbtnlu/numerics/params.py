"""Named trainable parameters: a value tensor plus a same-shape gradient buffer."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class Parameter:
    name: str
    value: np.ndarray
    decay: bool = True  # False excludes the tensor from L2 weight decay (biases)
    dtype: np.dtype = np.float64  # float32 selectable for speed; checks need 64-bit
    grad: np.ndarray = field(init=False)

    def __post_init__(self):
        if np.dtype(self.dtype) not in (np.dtype(np.float64), np.dtype(np.float32)):
            raise ValueError(f"unsupported parameter dtype {self.dtype}")
        self.value = np.ascontiguousarray(self.value, dtype=self.dtype)
        self.grad = np.zeros_like(self.value)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    def zero_grad(self) -> None:
        self.grad[...] = 0.0


def zero_grads(params) -> None:
    for p in params:
        p.zero_grad()


def copy_values(params) -> dict[str, np.ndarray]:
    """Snapshot parameter values (used to keep the best validation checkpoint)."""
    return {p.name: p.value.copy() for p in params}


def load_values(params, snapshot: dict[str, np.ndarray]) -> None:
    for p in params:
        src = snapshot[p.name]
        if src.shape != p.value.shape:
            raise ValueError(f"snapshot shape {src.shape} != {p.value.shape} for {p.name}")
        p.value[...] = src


def l2_penalty(params, lam: float) -> float:
    """lam * sum of squared weights over decayed parameters."""
    if lam == 0.0:
        return 0.0
    return lam * float(sum(np.sum(p.value * p.value) for p in params if p.decay))


def add_l2_grads(params, lam: float) -> None:
    """Gradient of the l2_penalty term: 2*lam*w on decayed parameters."""
    if lam == 0.0:
        return
    for p in params:
        if p.decay:
            p.grad += 2.0 * lam * p.value
