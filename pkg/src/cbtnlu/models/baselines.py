"""Rule-based reference predictors.

The majority predictor marks every post positive; the chance predictor
flips a seeded fair coin per post. Their closed-form F1 expectations
(2f/(1+f) and f/(f+0.5)) live in evaluation.metrics next to the report
code that cross-checks empirical runs against them.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np


def majority_predict(post_ids: Sequence[str]) -> dict[str, bool]:
    return {pid: True for pid in post_ids}


def chance_predict(post_ids: Sequence[str], seed: int) -> dict[str, bool]:
    rng = np.random.default_rng(seed)
    draws = rng.random(len(post_ids)) < 0.5
    return {pid: bool(d) for pid, d in zip(post_ids, draws)}
