"""Sigmoid cross entropy over real-valued [0,1] targets.

Computed in logit form, softplus(z) - q*z per pixel, which is finite for
every logit and target and equals -(q*log(p) + (1-q)*log(1-p)) with
p = sigmoid(z). The analytic gradient is (sigmoid(z) - q)/N.
"""

from __future__ import annotations

import numpy as np

from ..errors import DataError


def _check_shapes(logits: np.ndarray, target: np.ndarray) -> None:
    if logits.shape != target.shape:
        raise DataError(
            f"logits shape {logits.shape} != target shape {target.shape}"
        )


def sigmoid_cross_entropy(logits: np.ndarray, target: np.ndarray) -> float:
    """Mean per-pixel sigmoid cross entropy."""
    _check_shapes(logits, target)
    z = np.asarray(logits, dtype=np.float64)
    q = np.asarray(target, dtype=np.float64)
    per = np.maximum(z, 0.0) - z * q + np.log1p(np.exp(-np.abs(z)))
    return float(per.mean())


def sigmoid_cross_entropy_grad(logits: np.ndarray, target: np.ndarray) -> np.ndarray:
    """d(loss)/d(logit) = (sigmoid(z) - q) / N, N = number of entries."""
    _check_shapes(logits, target)
    z = np.asarray(logits, dtype=np.float64)
    q = np.asarray(target, dtype=np.float64)
    sig = 0.5 * (1.0 + np.tanh(0.5 * z))
    return (sig - q) / z.size


def target_entropy(target: np.ndarray) -> float:
    """Mean per-pixel entropy of Q: the floor no cross entropy can beat."""
    q = np.asarray(target, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(np.where(q > 0, q * np.log(q), 0.0)
              + np.where(q < 1, (1 - q) * np.log1p(-q), 0.0))
    return float(h.mean())
