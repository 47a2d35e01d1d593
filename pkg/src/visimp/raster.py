"""Core raster primitives: images, importance maps, Gaussian filtering,
integral tables, gradient-magnitude energy, and bit-exact PNG I/O.

Importance maps are dense [0,1] grids, one value per pixel, and are the
currency every other module trades in. Maps are stored on disk as 16-bit
single-channel PNGs (value v encoded as round(v*65535)), images as 8-bit
RGB(A) PNGs.

All operations here are pure functions over immutable inputs; the
wrapped numpy arrays are marked read-only at construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from PIL import Image, UnidentifiedImageError

from .errors import DataError, ParameterError

# Largest supported side length for images and maps.
MAX_SIDE = 32768

# Half of one 16-bit quantization step: the PNG round-trip error bound.
MAP_QUANT_ERROR = 1.0 / (2 * 65535)

# ITU-R 601 luma weights for grayscale conversion.
_LUMA = np.array([0.299, 0.587, 0.114])


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class BitmapImage:
    """8-bit RGB or RGBA raster, shape (height, width, channels)."""

    data: np.ndarray

    def __post_init__(self):
        d = self.data
        if d.ndim != 3 or d.shape[2] not in (3, 4):
            raise DataError(f"image must be (H, W, 3|4), got shape {d.shape}")
        if d.shape[0] < 1 or d.shape[1] < 1:
            raise DataError("image dimensions must be at least 1x1")
        if d.shape[0] > MAX_SIDE or d.shape[1] > MAX_SIDE:
            raise DataError(f"image side exceeds {MAX_SIDE}")
        if d.dtype != np.uint8:
            raise DataError(f"image samples must be uint8, got {d.dtype}")
        object.__setattr__(self, "data", _freeze(np.ascontiguousarray(d)))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True)
class ImportanceMap:
    """Per-pixel importance values in [0,1], shape (height, width)."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise DataError(f"map must be 2-D, got shape {v.shape}")
        if v.shape[0] < 1 or v.shape[1] < 1:
            raise DataError("map dimensions must be at least 1x1")
        if v.shape[0] > MAX_SIDE or v.shape[1] > MAX_SIDE:
            raise DataError(f"map side exceeds {MAX_SIDE}")
        if not np.all(np.isfinite(v)):
            raise DataError("map contains non-finite values")
        # Tolerate float round-off from filtering, reject real violations.
        if v.min() < -1e-9 or v.max() > 1 + 1e-9:
            raise DataError(
                f"map values outside [0,1]: min={v.min()}, max={v.max()}"
            )
        object.__setattr__(
            self, "values", _freeze(np.ascontiguousarray(np.clip(v, 0.0, 1.0)))
        )

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class IntegralTable:
    """2-D prefix sums of a map; any rectangle sum in four lookups.

    table has shape (height+1, width+1) with table[0,:] = table[:,0] = 0
    and table[y,x] = sum of map values over rows < y, columns < x.
    """

    table: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "table", _freeze(self.table))

    @property
    def height(self) -> int:
        return self.table.shape[0] - 1

    @property
    def width(self) -> int:
        return self.table.shape[1] - 1

    def rect_sum(self, x: int, y: int, w: int, h: int) -> float:
        """Sum of map values over the rectangle [x, x+w) x [y, y+h)."""
        if x < 0 or y < 0 or w < 0 or h < 0 or x + w > self.width or y + h > self.height:
            raise ParameterError(f"rectangle ({x},{y},{w},{h}) out of bounds")
        t = self.table
        return float(t[y + h, x + w] - t[y, x + w] - t[y + h, x] + t[y, x])


def integral(map_: ImportanceMap) -> IntegralTable:
    """Build the (H+1, W+1) prefix-sum table of an importance map."""
    h, w = map_.values.shape
    table = np.zeros((h + 1, w + 1), dtype=np.float64)
    np.cumsum(map_.values, axis=0, out=table[1:, 1:])
    np.cumsum(table[1:, 1:], axis=1, out=table[1:, 1:])
    return IntegralTable(table)


def gaussian_kernel(sigma: float) -> np.ndarray:
    """1-D Gaussian kernel truncated at ceil(3*sigma) taps each side, sum 1."""
    if not sigma > 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    r = math.ceil(3.0 * sigma)
    x = np.arange(-r, r + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def _correlate1d_zeropad(arr: np.ndarray, kernel: np.ndarray, axis: int) -> np.ndarray:
    r = kernel.size // 2
    pad = [(0, 0), (0, 0)]
    pad[axis] = (r, r)
    padded = np.pad(arr, pad)
    win = sliding_window_view(padded, kernel.size, axis=axis)
    return win @ kernel


def _inbounds_mass(n: int, kernel: np.ndarray) -> np.ndarray:
    # Sum of kernel taps landing in-bounds at each of the n positions.
    return _correlate1d_zeropad(np.ones((1, n)), kernel, axis=1)[0]


def gaussian_blur(
    map_: ImportanceMap, sigma: float, normalize_peak: bool = False
) -> ImportanceMap:
    """Separable Gaussian blur with edge handling by kernel renormalization.

    Near borders the kernel is renormalized over its in-bounds taps, so a
    constant map is a fixed point. With normalize_peak the result is
    rescaled so its maximum is 1 (left untouched if all-zero).
    """
    k = gaussian_kernel(sigma)
    v = map_.values
    out = _correlate1d_zeropad(v, k, axis=0) / _inbounds_mass(v.shape[0], k)[:, None]
    out = _correlate1d_zeropad(out, k, axis=1) / _inbounds_mass(v.shape[1], k)[None, :]
    if normalize_peak:
        peak = out.max()
        if peak > 0:
            out = out / peak
    return ImportanceMap(out)


def peak_normalized(map_: ImportanceMap) -> ImportanceMap:
    """Rescale so the maximum value is 1; all-zero maps pass through."""
    peak = map_.values.max()
    if peak <= 0:
        return map_
    return ImportanceMap(map_.values / peak)


def edge_energy(image: BitmapImage) -> ImportanceMap:
    """Gradient-magnitude energy map, rescaled to [0,1].

    Grayscale via ITU-R 601 luma, central differences in the interior and
    one-sided differences at the border, magnitude sqrt(gx^2 + gy^2),
    then linear rescale so the maximum is 1 (all-zero for flat images).
    """
    luma = image.data[:, :, :3].astype(np.float64) @ _LUMA / 255.0
    if luma.shape[0] > 1:
        gy = np.gradient(luma, axis=0)
    else:
        gy = np.zeros_like(luma)
    if luma.shape[1] > 1:
        gx = np.gradient(luma, axis=1)
    else:
        gx = np.zeros_like(luma)
    mag = np.hypot(gx, gy)
    peak = mag.max()
    if peak > 0:
        mag = mag / peak
    return ImportanceMap(mag)


@lru_cache(maxsize=64)
def _interp_matrix(n_src: int, n_dst: int) -> np.ndarray:
    """Row-stochastic bilinear interpolation matrix (n_dst, n_src).

    Destination sample j reads source coordinate (j+0.5)*n_src/n_dst - 0.5,
    clamped to the valid range (half-pixel-center convention).
    """
    m = np.zeros((n_dst, n_src), dtype=np.float64)
    scale = n_src / n_dst
    for j in range(n_dst):
        src = (j + 0.5) * scale - 0.5
        src = min(max(src, 0.0), n_src - 1.0)
        i0 = int(math.floor(src))
        i1 = min(i0 + 1, n_src - 1)
        frac = src - i0
        m[j, i0] += 1.0 - frac
        m[j, i1] += frac
    return _freeze(m)


def resize_bilinear(values: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resize of a 2-D float array to (out_h, out_w)."""
    if out_h < 1 or out_w < 1:
        raise ParameterError("target dimensions must be at least 1")
    ry = _interp_matrix(values.shape[0], out_h)
    rx = _interp_matrix(values.shape[1], out_w)
    return ry @ values @ rx.T


def resize_map(map_: ImportanceMap, out_h: int, out_w: int) -> ImportanceMap:
    return ImportanceMap(resize_bilinear(map_.values, out_h, out_w))


def write_map(map_: ImportanceMap, path: str | Path) -> None:
    """Store a map as a 16-bit single-channel PNG (v -> round(v*65535))."""
    samples = np.round(map_.values * 65535.0).astype(np.uint16)
    Image.fromarray(samples).save(Path(path), format="PNG")


def read_map(path: str | Path) -> ImportanceMap:
    """Load a 16-bit single-channel PNG written by write_map."""
    try:
        img = Image.open(Path(path))
        img.load()
    except FileNotFoundError:
        raise
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise DataError(f"cannot read map file {path}: {exc}") from exc
    if img.format != "PNG":
        raise DataError(f"map file {path} is not a PNG (format={img.format})")
    if img.mode not in ("I;16", "I;16B", "I"):
        raise DataError(
            f"map file {path} has unsupported mode {img.mode}; "
            "expected 16-bit grayscale"
        )
    arr = np.asarray(img).astype(np.int64)
    if arr.ndim != 2:
        raise DataError(f"map file {path} is not single-channel")
    if arr.min() < 0 or arr.max() > 65535:
        raise DataError(f"map file {path} has samples outside 16-bit range")
    return ImportanceMap(arr.astype(np.float64) / 65535.0)


def write_image(image: BitmapImage, path: str | Path) -> None:
    Image.fromarray(image.data).save(Path(path), format="PNG")


def read_image(path: str | Path) -> BitmapImage:
    """Load an 8-bit RGB(A) PNG. Grayscale/palette PNGs are expanded to RGB."""
    try:
        img = Image.open(Path(path))
        img.load()
    except FileNotFoundError:
        raise
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise DataError(f"cannot read image file {path}: {exc}") from exc
    if img.format != "PNG":
        raise DataError(f"image file {path} is not a PNG (format={img.format})")
    if img.mode in ("L", "P"):
        img = img.convert("RGB")
    elif img.mode == "LA":
        img = img.convert("RGBA")
    if img.mode not in ("RGB", "RGBA"):
        raise DataError(f"image file {path} has unsupported mode {img.mode}")
    return BitmapImage(np.asarray(img))


def decode_image(data: bytes) -> BitmapImage:
    """Decode in-memory PNG bytes to a BitmapImage."""
    import io

    try:
        img = Image.open(io.BytesIO(data))
        img.load()
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise DataError(f"cannot decode image bytes: {exc}") from exc
    if img.format != "PNG":
        raise DataError(f"body is not a PNG (format={img.format})")
    if img.mode in ("L", "P"):
        img = img.convert("RGB")
    elif img.mode == "LA":
        img = img.convert("RGBA")
    if img.mode not in ("RGB", "RGBA"):
        raise DataError(f"unsupported image mode {img.mode}")
    return BitmapImage(np.asarray(img))


def encode_map(map_: ImportanceMap) -> bytes:
    """Encode a map to 16-bit PNG bytes (same format as write_map)."""
    import io

    samples = np.round(map_.values * 65535.0).astype(np.uint16)
    buf = io.BytesIO()
    Image.fromarray(samples).save(buf, format="PNG")
    return buf.getvalue()


def decode_map(data: bytes) -> ImportanceMap:
    import io

    try:
        img = Image.open(io.BytesIO(data))
        img.load()
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise DataError(f"cannot decode map bytes: {exc}") from exc
    if img.mode not in ("I;16", "I;16B", "I"):
        raise DataError(f"unsupported map mode {img.mode}")
    arr = np.asarray(img).astype(np.int64)
    if arr.min() < 0 or arr.max() > 65535:
        raise DataError("map samples outside 16-bit range")
    return ImportanceMap(arr.astype(np.float64) / 65535.0)


def encode_image(image: BitmapImage) -> bytes:
    import io

    buf = io.BytesIO()
    Image.fromarray(image.data).save(buf, format="PNG")
    return buf.getvalue()
