"""Thumbnailing by straight-seam carving plus an alpha fade to white.

Carving repeatedly removes the full row or column with the least total
importance until the target dimensions are reached; only dimensions
still above target are eligible, and when both are, the cheaper of the
two candidates goes (exact tie: the column). Orthogonal sums are
maintained incrementally (subtract the removed cells) rather than
recomputed, an O(H+W) step whose equivalence to full recomputation is a
tested invariant.
"""

from __future__ import annotations

import numpy as np

from .errors import ParameterError
from .raster import BitmapImage, ImportanceMap, resize_bilinear

WHITE = 255.0
FADE_PERCENTILE = 95.0


def carve(
    image: BitmapImage,
    map_: ImportanceMap,
    target: tuple[int, int],
    trace: list | None = None,
) -> tuple[BitmapImage, ImportanceMap]:
    """Remove min-importance rows/columns until (width, height) = target.

    Returns the carved image and the correspondingly carved map; the two
    stay aligned after every removal. Pass a list as `trace` to receive
    ("row"|"col", index, total_importance) per removal, in order.
    """
    tw, th = target
    if (map_.height, map_.width) != (image.height, image.width):
        raise ParameterError("map dimensions must match image")
    if tw < 1 or th < 1:
        raise ParameterError("target dimensions must be at least 1")
    if tw > image.width or th > image.height:
        raise ParameterError(
            f"target {tw}x{th} exceeds source {image.width}x{image.height}"
        )
    values = map_.values.copy()
    pixels = image.data.copy()
    row_sums = values.sum(axis=1)
    col_sums = values.sum(axis=0)
    while values.shape[0] > th or values.shape[1] > tw:
        pick_row = values.shape[0] > th
        pick_col = values.shape[1] > tw
        r = int(np.argmin(row_sums)) if pick_row else -1
        c = int(np.argmin(col_sums)) if pick_col else -1
        if pick_row and pick_col:
            # equal totals favor the column
            pick_row = row_sums[r] < col_sums[c]
        if pick_row:
            if trace is not None:
                trace.append(("row", r, float(row_sums[r])))
            col_sums = col_sums - values[r, :]
            values = np.delete(values, r, axis=0)
            pixels = np.delete(pixels, r, axis=0)
            row_sums = np.delete(row_sums, r)
        else:
            if trace is not None:
                trace.append(("col", c, float(col_sums[c])))
            row_sums = row_sums - values[:, c]
            values = np.delete(values, c, axis=1)
            pixels = np.delete(pixels, c, axis=1)
            col_sums = np.delete(col_sums, c)
    return BitmapImage(pixels), ImportanceMap(np.clip(values, 0.0, 1.0))


def fade_composite(image: BitmapImage, map_: ImportanceMap) -> BitmapImage:
    """Fade low-importance pixels to white, alpha = map / 95th percentile.

    A zero 95th percentile falls back to the raw map values as alpha.
    The alpha channel of RGBA inputs passes through untouched.
    """
    if (map_.height, map_.width) != (image.height, image.width):
        raise ParameterError("map dimensions must match image")
    q95 = float(np.percentile(map_.values, FADE_PERCENTILE))
    denom = q95 if q95 > 0 else 1.0
    alpha = np.clip(map_.values / denom, 0.0, 1.0)[:, :, None]
    rgb = image.data[:, :, :3].astype(np.float64)
    faded = np.round(alpha * rgb + (1.0 - alpha) * WHITE)
    out = image.data.copy()
    out[:, :, :3] = faded.astype(np.uint8)
    return BitmapImage(out)


def make_thumbnail(image: BitmapImage, map_: ImportanceMap, side: int) -> BitmapImage:
    """Square thumbnail: carve to square, fade to white, scale to side."""
    if side < 1:
        raise ParameterError("side must be at least 1")
    edge = min(image.width, image.height)
    carved_img, carved_map = carve(image, map_, (edge, edge))
    faded = fade_composite(carved_img, carved_map)
    channels = [
        np.clip(
            np.round(resize_bilinear(faded.data[:, :, c].astype(np.float64), side, side)),
            0,
            255,
        )
        for c in range(faded.channels)
    ]
    return BitmapImage(np.stack(channels, axis=-1).astype(np.uint8))
