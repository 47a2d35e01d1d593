"""Mini-batch SGD with momentum on the sigmoid cross-entropy loss.

Deterministic given the seed: initialization and epoch shuffles both
derive from one seeded generator, and all math is float64 numpy.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..errors import DataError, TrainingDivergedError
from ..raster import BitmapImage, ImportanceMap
from .checkpoint import ModelCheckpoint
from .loss import sigmoid_cross_entropy, sigmoid_cross_entropy_grad
from .model import (
    Architecture,
    DOWNSAMPLE,
    backward,
    forward_logits,
    image_to_input,
    init_params,
    pad_to_multiple,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainingSample:
    image: BitmapImage
    target: ImportanceMap

    def __post_init__(self):
        if (self.image.height, self.image.width) != (
            self.target.height,
            self.target.width,
        ):
            raise DataError(
                f"sample image {self.image.width}x{self.image.height} does not "
                f"match target {self.target.width}x{self.target.height}"
            )


@dataclass
class TrainConfig:
    epochs: int = 30
    learning_rate: float = 0.2
    batch_size: int = 8
    seed: int = 0
    skip_connections: bool = True
    momentum: float = 0.9
    channels: tuple[int, int, int, int] = (6, 8, 10, 12)


def train(samples: list[TrainingSample], config: TrainConfig) -> ModelCheckpoint:
    """Train a fresh toy net; returns a checkpoint with the loss curve.

    Aborts with TrainingDivergedError if the loss leaves the finite range.
    """
    if not samples:
        raise DataError("training dataset is empty")
    dims = {(s.image.height, s.image.width) for s in samples}
    if len(dims) != 1:
        raise DataError(f"samples have inconsistent dimensions: {sorted(dims)}")
    if config.epochs < 0 or config.batch_size < 1:
        raise DataError("epochs must be >= 0 and batch_size >= 1")

    h, w = next(iter(dims))
    x = np.stack([pad_to_multiple(image_to_input(s.image), DOWNSAMPLE) for s in samples])
    q = np.stack([s.target.values for s in samples])

    arch = Architecture(
        in_channels=3,
        channels=tuple(config.channels),
        skip_connections=config.skip_connections,
    )
    rng = np.random.default_rng(config.seed)
    params = init_params(arch, seed=int(rng.integers(2**31)))
    velocity = {k: np.zeros_like(v) for k, v in params.items()}

    n = len(samples)
    loss_curve: list[float] = []
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            cache: dict = {}
            logits = forward_logits(params, arch, x[idx], cache=cache)
            logits = logits[:, :h, :w]
            batch_q = q[idx]
            loss = sigmoid_cross_entropy(logits, batch_q)
            if not np.isfinite(loss):
                raise TrainingDivergedError(
                    f"loss became non-finite at epoch {epoch}"
                )
            d_logits = sigmoid_cross_entropy_grad(logits, batch_q)
            # padding columns/rows got cropped out of the loss; their
            # gradient is zero
            if logits.shape[1:] != x.shape[1:3]:
                full = np.zeros((len(idx), x.shape[1], x.shape[2]))
                full[:, :h, :w] = d_logits
                d_logits = full
            grads = backward(params, arch, cache, d_logits)
            for k in params:
                velocity[k] = config.momentum * velocity[k] - config.learning_rate * grads[k]
                params[k] = params[k] + velocity[k]
            epoch_loss += loss * len(idx)
        loss_curve.append(epoch_loss / n)
        if config.epochs <= 20 or (epoch + 1) % 10 == 0:
            log.debug("epoch %d/%d loss %.6f", epoch + 1, config.epochs, loss_curve[-1])

    metadata = {
        "epochs": config.epochs,
        "learning_rate": config.learning_rate,
        "momentum": config.momentum,
        "batch_size": config.batch_size,
        "seed": config.seed,
        "trained_samples": n,
        "sample_size": [w, h],
        "loss_curve": loss_curve,
    }
    return ModelCheckpoint(architecture=arch, params=params, metadata=metadata)
