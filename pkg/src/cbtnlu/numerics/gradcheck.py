"""Central finite-difference verification of analytic gradients.

Usage: hand in a closure that (re)computes the scalar loss from the current
parameter values AND writes analytic gradients into each Parameter.grad.
The checker probes every element (or a seeded sample for large tensors)
with two-sided differences and reports the worst relative disagreement.

Run in 64-bit with dropout disabled; stochastic losses make the comparison
meaningless.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .params import Parameter, zero_grads


def grad_check(loss_fn: Callable[[], float], params: list[Parameter], *,
               eps: float = 1e-5, max_elements: int = 500, seed: int = 0) -> float:
    """Max relative error |g_a - g_n| / max(|g_a| + |g_n|, 1e-6) over all
    probed elements.

    `loss_fn()` must return the loss and populate `p.grad` for every
    parameter from the current values; gradients are zeroed before each call.
    """
    zero_grads(params)
    loss_fn()
    analytic = {p.name: p.grad.copy() for p in params}
    rng = np.random.default_rng(seed)
    worst = 0.0
    for p in params:
        flat = p.value.reshape(-1)
        g_flat = analytic[p.name].reshape(-1)
        n = flat.size
        if n <= max_elements:
            probe = range(n)
        else:
            probe = np.sort(rng.choice(n, size=max_elements, replace=False))
        for i in probe:
            saved = flat[i]
            flat[i] = saved + eps
            zero_grads(params)
            up = loss_fn()
            flat[i] = saved - eps
            zero_grads(params)
            down = loss_fn()
            flat[i] = saved
            numeric = (up - down) / (2.0 * eps)
            ga = g_flat[i]
            rel = abs(ga - numeric) / max(abs(ga) + abs(numeric), 1e-6)
            if rel > worst:
                worst = rel
    zero_grads(params)
    return worst
