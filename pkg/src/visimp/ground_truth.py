"""Turn raw human-attention records into ground-truth importance maps.

Two record modalities are supported: point logs (crowdsourced clicks or
eye fixations, aggregated as unit impulses then Gaussian blurred and
peak-normalized) and per-participant binary annotation masks (averaged
pixel-wise, no blurring).

Wire formats: a click log is a JSON file
  {"width": W, "height": H,
   "participants": [{"id": "p1", "points": [{"x": .., "y": .., "t": ..}]}]}
with t (milliseconds) optional; an annotation set is a JSON manifest
  {"width": W, "height": H, "masks": ["p1.png", ...]}
listing per-participant binary-mask PNGs (paths relative to the manifest).
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DataError
from .raster import ImportanceMap, gaussian_blur

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ClickPoint:
    x: float
    y: float
    t: float | None = None  # milliseconds since stimulus onset, if recorded


@dataclass(frozen=True)
class Participant:
    participant_id: str
    points: tuple[ClickPoint, ...]


@dataclass(frozen=True)
class ClickLog:
    """Point records (clicks or fixations) for one stimulus image."""

    image_width: int
    image_height: int
    participants: tuple[Participant, ...]

    def __post_init__(self):
        if self.image_width < 1 or self.image_height < 1:
            raise DataError("click log image dimensions must be positive")
        ids = [p.participant_id for p in self.participants]
        if len(set(ids)) != len(ids):
            raise DataError("participant ids must be unique")


@dataclass(frozen=True)
class AnnotationSet:
    """Per-participant binary importance masks for one stimulus image."""

    image_width: int
    image_height: int
    masks: tuple[np.ndarray, ...] = field(default_factory=tuple)

    def __post_init__(self):
        shape = (self.image_height, self.image_width)
        for i, m in enumerate(self.masks):
            if m.shape != shape:
                raise DataError(
                    f"mask {i} has shape {m.shape}, expected {shape}"
                )
            if not np.isin(m, (0, 1)).all():
                raise DataError(f"mask {i} has entries outside {{0,1}}")


def aggregate_points(log_: ClickLog, sigma: float) -> ImportanceMap:
    """Accumulate unit impulses at all points, blur, peak-normalize.

    Points are rounded to the nearest pixel; out-of-bounds records are
    rejected with a logged diagnostic rather than clamped. A log whose
    points were all rejected (or that has none) yields an all-zero map.
    """
    if not log_.participants:
        raise DataError("click log has no participants")
    acc = np.zeros((log_.image_height, log_.image_width), dtype=np.float64)
    for part in log_.participants:
        for pt in part.points:
            ix = int(round(pt.x))
            iy = int(round(pt.y))
            if 0 <= ix < log_.image_width and 0 <= iy < log_.image_height:
                acc[iy, ix] += 1.0
            else:
                log.warning(
                    "rejecting out-of-bounds point (%s, %s) from participant %s",
                    pt.x, pt.y, part.participant_id,
                )
    total = acc.sum()
    if total == 0:
        return ImportanceMap(acc)
    # Scale into [0,1] before blurring; peak normalization at the end
    # removes this factor again, so only the map type's invariant needs it.
    acc /= acc.max()
    return gaussian_blur(ImportanceMap(acc), sigma, normalize_peak=True)


def aggregate_masks(set_: AnnotationSet) -> ImportanceMap:
    """Per-pixel mean of the binary masks; values are exact k/n fractions."""
    if not set_.masks:
        raise DataError("annotation set has no masks")
    stack = np.stack([m.astype(np.float64) for m in set_.masks])
    return ImportanceMap(stack.mean(axis=0))


def load_click_log(path: str | Path) -> ClickLog:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise
    except (json.JSONDecodeError, OSError) as exc:
        raise DataError(f"cannot parse click log {path}: {exc}") from exc
    return click_log_from_dict(raw)


def click_log_from_dict(raw: dict) -> ClickLog:
    try:
        width = int(raw["width"])
        height = int(raw["height"])
        participants = []
        for p in raw["participants"]:
            points = tuple(
                ClickPoint(
                    x=float(pt["x"]),
                    y=float(pt["y"]),
                    t=float(pt["t"]) if pt.get("t") is not None else None,
                )
                for pt in p.get("points", [])
            )
            participants.append(Participant(str(p["id"]), points))
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"malformed click log: {exc}") from exc
    return ClickLog(width, height, tuple(participants))


def load_annotation_set(path: str | Path) -> AnnotationSet:
    """Load a mask manifest; mask PNG paths resolve relative to it."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise
    except (json.JSONDecodeError, OSError) as exc:
        raise DataError(f"cannot parse annotation manifest {path}: {exc}") from exc
    try:
        width = int(raw["width"])
        height = int(raw["height"])
        mask_paths = [Path(p) for p in raw["masks"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"malformed annotation manifest: {exc}") from exc
    masks = []
    for mp in mask_paths:
        resolved = mp if mp.is_absolute() else path.parent / mp
        masks.append(_read_binary_mask(resolved))
    return AnnotationSet(width, height, tuple(masks))


def _read_binary_mask(path: Path) -> np.ndarray:
    """Read a mask PNG as {0,1}; samples above half-scale count as 1."""
    try:
        img = Image.open(path)
        img.load()
    except FileNotFoundError:
        raise
    except (UnidentifiedImageError, OSError) as exc:
        raise DataError(f"cannot read mask {path}: {exc}") from exc
    if img.mode in ("RGB", "RGBA", "P", "LA"):
        img = img.convert("L")
    arr = np.asarray(img)
    if arr.ndim != 2:
        raise DataError(f"mask {path} is not single-channel")
    half = 127 if arr.dtype == np.uint8 else (np.iinfo(arr.dtype).max // 2 if arr.dtype.kind == "u" else 0)
    return (arr > half).astype(np.uint8)
