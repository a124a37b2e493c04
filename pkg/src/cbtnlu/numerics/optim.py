"""Adam with bias correction, global-norm gradient clipping, and the
staircase learning-rate schedule."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import NonFiniteGradient
from .params import Parameter


@dataclass(frozen=True)
class LrSchedule:
    initial: float = 0.001
    decay: float = 0.986
    interval: int = 10  # optimizer steps per stair


def lr_at(step: int, schedule: LrSchedule) -> float:
    """Learning rate for the given 0-based optimizer step."""
    if step < 0:
        raise ValueError("step must be >= 0")
    return schedule.initial * schedule.decay ** (step // schedule.interval)


def clip_global_norm(params: list[Parameter], max_norm: float = 5.0) -> float:
    """Scale all gradients so their joint L2 norm is at most max_norm.

    Returns the pre-clip norm.
    """
    total = sum(float(np.sum(p.grad * p.grad)) for p in params)
    norm = math.sqrt(total)
    if norm > max_norm and norm > 0.0:
        scale = max_norm / norm
        for p in params:
            p.grad *= scale
    return norm


@dataclass
class AdamState:
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


def adam_update(params: list[Parameter], state: AdamState, lr: float) -> None:
    """One bias-corrected Adam step over all parameters; gradients are
    checked for finiteness first and zeroed afterwards."""
    for p in params:
        if not np.all(np.isfinite(p.grad)):
            raise NonFiniteGradient(p.name)
    state.step += 1
    t = state.step
    bc1 = 1.0 - state.beta1 ** t
    bc2 = 1.0 - state.beta2 ** t
    for p in params:
        m = state.m.setdefault(p.name, np.zeros_like(p.value))
        v = state.v.setdefault(p.name, np.zeros_like(p.value))
        m *= state.beta1
        m += (1.0 - state.beta1) * p.grad
        v *= state.beta2
        v += (1.0 - state.beta2) * p.grad * p.grad
        p.value -= lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
        p.zero_grad()
