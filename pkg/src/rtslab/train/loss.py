"""Binary cross-entropy over predicted win probabilities."""

from __future__ import annotations

import numpy as np

from .. import tensor as T
from ..tensor import Tensor

CLAMP = 1e-12


def bce_loss(probs: Tensor, labels: np.ndarray) -> Tensor:
    """-(1/M) sum[y*log p + (1-y)*log(1-p)], differentiable through `probs`.

    Probabilities are clamped to [1e-12, 1-1e-12] before the logs; labels
    must be exactly 0 or 1.
    """
    y = np.asarray(labels, dtype=np.float64)
    if y.shape != probs.shape:
        raise ValueError(f"labels shape {y.shape} != probs shape {probs.shape}")
    if not np.all((y == 0.0) | (y == 1.0)):
        raise ValueError("labels must be 0 or 1")
    p = T.clamp(probs, CLAMP, 1.0 - CLAMP)
    pos = T.mul(T.log(p), y)
    neg_term = T.mul(T.log(T.add(T.neg(p), 1.0)), 1.0 - y)
    return T.neg(T.mean(T.add(pos, neg_term)))
