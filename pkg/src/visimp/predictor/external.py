"""Importance predictors behind one interface, plus external-map ingest.

CheckpointPredictor runs the toy net; ExternalMapPredictor serves a map
computed elsewhere (e.g. by a full-scale third-party model), resampled
to each request's dimensions. The service and CLI depend only on the
predict() contract.
"""

from __future__ import annotations

from pathlib import Path
from typing import Protocol

from ..errors import DataError
from ..raster import BitmapImage, ImportanceMap, read_map, resize_map
from .checkpoint import ModelCheckpoint, load_checkpoint
from .model import predict_map


class ImportancePredictor(Protocol):
    def predict(self, image: BitmapImage) -> ImportanceMap: ...


def load_external_map(
    path: str | Path,
    size: tuple[int, int] | None = None,
    resample: bool = False,
) -> ImportanceMap:
    """Read a stored map, optionally checking/forcing (width, height).

    With a size and resample=False the map must already match; with
    resample=True it is bilinearly resized.
    """
    m = read_map(path)
    if size is None:
        return m
    w, h = size
    if (m.width, m.height) == (w, h):
        return m
    if not resample:
        raise DataError(
            f"map {path} is {m.width}x{m.height}, expected {w}x{h} "
            "(pass resample=True to resize)"
        )
    return resize_map(m, h, w)


class CheckpointPredictor:
    """Forward passes against an immutable loaded checkpoint."""

    def __init__(self, ckpt: ModelCheckpoint):
        self._ckpt = ckpt

    @classmethod
    def from_file(cls, path: str | Path) -> "CheckpointPredictor":
        return cls(load_checkpoint(path))

    @property
    def checkpoint(self) -> ModelCheckpoint:
        return self._ckpt

    def predict(self, image: BitmapImage) -> ImportanceMap:
        return predict_map(self._ckpt.params, self._ckpt.architecture, image)


class ExternalMapPredictor:
    """Serve one externally computed map, resampled to each input's size."""

    def __init__(self, path: str | Path):
        self._map = read_map(path)

    def predict(self, image: BitmapImage) -> ImportanceMap:
        if (self._map.width, self._map.height) == (image.width, image.height):
            return self._map
        return resize_map(self._map, image.height, image.width)
