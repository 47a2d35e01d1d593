"""Importance-map prediction: toy FCN, loss, training, checkpoints."""

from .checkpoint import MAGIC, ModelCheckpoint, load_checkpoint, save_checkpoint
from .external import (
    CheckpointPredictor,
    ExternalMapPredictor,
    ImportancePredictor,
    load_external_map,
)
from .loss import sigmoid_cross_entropy, sigmoid_cross_entropy_grad, target_entropy
from .model import (
    Architecture,
    DOWNSAMPLE,
    backward,
    forward_logits,
    init_params,
    param_count,
    predict_map,
)
from .train import TrainConfig, TrainingSample, train

__all__ = [
    "MAGIC",
    "Architecture",
    "CheckpointPredictor",
    "DOWNSAMPLE",
    "ExternalMapPredictor",
    "ImportancePredictor",
    "ModelCheckpoint",
    "TrainConfig",
    "TrainingSample",
    "backward",
    "forward_logits",
    "init_params",
    "load_checkpoint",
    "load_external_map",
    "param_count",
    "predict_map",
    "save_checkpoint",
    "sigmoid_cross_entropy",
    "sigmoid_cross_entropy_grad",
    "target_entropy",
    "train",
]
