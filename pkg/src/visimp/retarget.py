"""Importance-driven retargeting: pick the crop of a requested aspect
ratio containing the most importance, with edge-energy and random-crop
baselines handled by the same machinery.

The crop is the largest rectangle of the given aspect that fits the
image (or an exact pixel size); its position maximizes the rectangle sum
of the map, evaluated in O(1) per window via the integral table. Ties
break toward the smallest y, then smallest x, so results are exactly
reproducible against exhaustive search.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .raster import BitmapImage, ImportanceMap, integral

CROP_METHODS = ("importance", "edge", "random", "external")


@dataclass(frozen=True)
class CropSpec:
    """Either an aspect ratio (w:h) or an exact (width, height) target."""

    aspect: tuple[int, int] | None = None
    size: tuple[int, int] | None = None

    def __post_init__(self):
        if (self.aspect is None) == (self.size is None):
            raise ParameterError("specify exactly one of aspect or size")
        if self.aspect is not None and (self.aspect[0] < 1 or self.aspect[1] < 1):
            raise ParameterError(f"aspect must be positive, got {self.aspect}")
        if self.size is not None and (self.size[0] < 1 or self.size[1] < 1):
            raise ParameterError(f"size must be positive, got {self.size}")

    @classmethod
    def parse_aspect(cls, text: str) -> "CropSpec":
        """Parse "W:H" strings like "1:4"."""
        parts = text.split(":")
        if len(parts) != 2:
            raise ParameterError(f"bad aspect {text!r}; expected like '1:4'")
        try:
            w, h = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise ParameterError(f"bad aspect {text!r}; expected integers") from exc
        return cls(aspect=(w, h))


@dataclass(frozen=True)
class CropResult:
    rect: tuple[int, int, int, int]  # (x, y, w, h)
    contained_importance: float
    method: str

    def to_dict(self) -> dict:
        x, y, w, h = self.rect
        return {
            "rect": {"x": x, "y": y, "w": w, "h": h},
            "contained_importance": self.contained_importance,
            "method": self.method,
        }


def crop_dimensions(map_w: int, map_h: int, spec: CropSpec) -> tuple[int, int]:
    """Pixel size of the crop window for a map of the given dimensions."""
    if spec.size is not None:
        w, h = spec.size
        if w > map_w or h > map_h:
            raise ParameterError(
                f"requested crop {w}x{h} exceeds map {map_w}x{map_h}"
            )
        return w, h
    aw, ah = spec.aspect
    if map_w * ah >= map_h * aw:
        # image at least as wide as the aspect: full height
        h = map_h
        w = min(map_w, max(1, round(map_h * aw / ah)))
    else:
        w = map_w
        h = min(map_h, max(1, round(map_w * ah / aw)))
    return w, h


def _window_sums(map_: ImportanceMap, w: int, h: int) -> np.ndarray:
    t = integral(map_).table
    return (
        t[h:, w:]
        - t[: map_.height - h + 1, w:]
        - t[h:, : map_.width - w + 1]
        + t[: map_.height - h + 1, : map_.width - w + 1]
    )


def best_crop(
    map_: ImportanceMap, spec: CropSpec, method: str = "importance"
) -> CropResult:
    """Position of maximal contained importance; first (y,x) wins ties.

    `method` only labels the result (which map produced it: model
    importance, edge energy, an external map); the search is identical.
    """
    if method not in CROP_METHODS:
        raise ParameterError(f"unknown crop method {method!r}")
    w, h = crop_dimensions(map_.width, map_.height, spec)
    sums = _window_sums(map_, w, h)
    flat = int(np.argmax(sums))  # first occurrence in row-major = (y, x) order
    y, x = divmod(flat, sums.shape[1])
    return CropResult(
        rect=(x, y, w, h),
        contained_importance=float(sums[y, x]),
        method=method,
    )


def random_crop(map_: ImportanceMap, spec: CropSpec, seed: int) -> CropResult:
    """Uniformly random valid crop position, deterministic under seed."""
    w, h = crop_dimensions(map_.width, map_.height, spec)
    rng = np.random.default_rng(seed)
    x = int(rng.integers(0, map_.width - w + 1))
    y = int(rng.integers(0, map_.height - h + 1))
    t = integral(map_)
    return CropResult(
        rect=(x, y, w, h),
        contained_importance=t.rect_sum(x, y, w, h),
        method="random",
    )


def retarget_image(image: BitmapImage, crop: CropResult) -> BitmapImage:
    """Pixel-exact sub-image copy of the crop rectangle."""
    x, y, w, h = crop.rect
    if x < 0 or y < 0 or x + w > image.width or y + h > image.height:
        raise ParameterError(f"crop rect {crop.rect} outside image")
    return BitmapImage(image.data[y : y + h, x : x + w].copy())
