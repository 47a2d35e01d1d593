"""Procedural desk-scale training corpus.

Each sample is a plain light background with non-overlapping filled
rectangles ("bars") and text-like stripe textures painted on it. The
target importance is a peak-normalized Gaussian blur of a weight canvas:
text regions weigh 1.0, the largest rectangle 0.6, remaining rectangles
0.3 — planting the strong text-attracts-attention regularity for the
model to learn.

Everything derives from one seeded generator, so a corpus is
bitwise-reproducible: images/NNNN.png, maps/NNNN.png, meta/NNNN.json.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParameterError
from .raster import BitmapImage, ImportanceMap, gaussian_blur, write_image, write_map

TEXT_WEIGHT = 1.0
MAIN_RECT_WEIGHT = 0.6
MINOR_RECT_WEIGHT = 0.3


@dataclass(frozen=True)
class SynthSample:
    image: BitmapImage
    target: ImportanceMap
    elements: list  # [{"id", "kind", "bbox", "weight"}]
    background_probe: tuple[int, int, int, int]


def target_sigma(width: int, height: int) -> float:
    return max(2.0, min(width, height) / 16.0)


def _boxes_clash(box, taken, margin):
    x, y, w, h = box
    for (tx, ty, tw, th) in taken:
        if (
            x < tx + tw + margin
            and tx < x + w + margin
            and y < ty + th + margin
            and ty < y + h + margin
        ):
            return True
    return False


def _place_box(rng, width, height, wfrac, hfrac, taken, margin, tries=200):
    for _ in range(tries):
        w = max(3, int(round(width * rng.uniform(*wfrac))))
        h = max(3, int(round(height * rng.uniform(*hfrac))))
        if w >= width or h >= height:
            continue
        x = int(rng.integers(0, width - w + 1))
        y = int(rng.integers(0, height - h + 1))
        if not _boxes_clash((x, y, w, h), taken, margin):
            return (x, y, w, h)
    return None


def _paint_text_block(rng, canvas, box):
    """Horizontal stripe texture: ink lines broken into word-like runs."""
    x, y, w, h = box
    ink = rng.integers(0, 70, size=3)
    line_h = int(rng.integers(3, 5))
    yy = y
    while yy + line_h <= y + h:
        for row in range(line_h - 1):  # last row of each line stays blank
            xx = x
            while xx < x + w:
                run = int(rng.integers(2, 7))
                gap = int(rng.integers(1, 3))
                end = min(xx + run, x + w)
                canvas[yy + row, xx:end] = ink
                xx = end + gap
        yy += line_h
    # partial last line left unpainted keeps blocks ragged like real text


def generate_sample(rng: np.random.Generator, width: int, height: int) -> SynthSample:
    bg = rng.integers(185, 256, size=3)
    canvas = np.tile(bg.astype(np.uint8), (height, width, 1))
    weights = np.zeros((height, width), dtype=np.float64)
    elements = []
    taken: list[tuple[int, int, int, int]] = []
    margin = max(2, int(round(target_sigma(width, height))))

    rect_boxes = []
    for i in range(int(rng.integers(1, 4))):
        box = _place_box(rng, width, height, (0.15, 0.45), (0.12, 0.4), taken, margin)
        if box is None:
            continue
        taken.append(box)
        rect_boxes.append(box)
        color = rng.integers(30, 170, size=3).astype(np.uint8)
        x, y, w, h = box
        canvas[y : y + h, x : x + w] = color
    if rect_boxes:
        areas = [w * h for (_, _, w, h) in rect_boxes]
        main = int(np.argmax(areas))
        for i, box in enumerate(rect_boxes):
            weight = MAIN_RECT_WEIGHT if i == main else MINOR_RECT_WEIGHT
            x, y, w, h = box
            weights[y : y + h, x : x + w] = weight
            elements.append(
                {"id": f"rect{i}", "kind": "rect", "bbox": list(box), "weight": weight}
            )

    n_text = int(rng.integers(1, 3))
    placed_text = 0
    for i in range(n_text):
        box = _place_box(rng, width, height, (0.3, 0.6), (0.12, 0.28), taken, margin)
        if box is None:
            continue
        taken.append(box)
        _paint_text_block(rng, canvas, box)
        x, y, w, h = box
        weights[y : y + h, x : x + w] = TEXT_WEIGHT
        elements.append(
            {"id": f"text{i}", "kind": "text", "bbox": list(box), "weight": TEXT_WEIGHT}
        )
        placed_text += 1
    if placed_text == 0:
        # guarantee at least one text block: carve space at a corner
        w = max(3, int(round(width * 0.35)))
        h = max(3, int(round(height * 0.18)))
        box = (1, 1, w, h)
        canvas[1 : 1 + h, 1 : 1 + w] = bg.astype(np.uint8)
        _paint_text_block(rng, canvas, box)
        weights[1 : 1 + h, 1 : 1 + w] = TEXT_WEIGHT
        elements.append(
            {"id": "text0", "kind": "text", "bbox": list(box), "weight": TEXT_WEIGHT}
        )
        taken.append(box)

    probe = _place_box(
        rng, width, height, (0.12, 0.2), (0.12, 0.2), taken, 2 * margin, tries=400
    )
    if probe is None:
        probe = _place_box(rng, width, height, (0.08, 0.12), (0.08, 0.12), taken, margin, tries=400)
    if probe is None:
        probe = (0, 0, max(2, width // 12), max(2, height // 12))

    sigma = target_sigma(width, height)
    target = gaussian_blur(
        ImportanceMap(weights), sigma=sigma, normalize_peak=True
    )
    return SynthSample(
        image=BitmapImage(canvas),
        target=target,
        elements=elements,
        background_probe=probe,
    )


def generate_corpus(
    count: int, width: int, height: int, seed: int, out_dir: str | Path
) -> list[Path]:
    """Write `count` samples under out_dir; returns the sample ids' paths."""
    if count < 1:
        raise ParameterError("count must be at least 1")
    if width < 16 or height < 16:
        raise ParameterError("size must be at least 16x16")
    out = Path(out_dir)
    for sub in ("images", "maps", "meta"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    written = []
    for i in range(count):
        sample = generate_sample(rng, width, height)
        stem = f"{i:04d}"
        write_image(sample.image, out / "images" / f"{stem}.png")
        write_map(sample.target, out / "maps" / f"{stem}.png")
        meta = {
            "id": stem,
            "width": width,
            "height": height,
            "elements": sample.elements,
            "background_probe": list(sample.background_probe),
        }
        (out / "meta" / f"{stem}.json").write_text(json.dumps(meta, sort_keys=True))
        written.append(out / "images" / f"{stem}.png")
    return written


def load_corpus(dir_: str | Path):
    """Read back (image, map, meta) triples written by generate_corpus."""
    from .raster import read_image, read_map

    out = Path(dir_)
    triples = []
    for img_path in sorted((out / "images").glob("*.png")):
        stem = img_path.stem
        map_path = out / "maps" / f"{stem}.png"
        meta_path = out / "meta" / f"{stem}.json"
        meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
        triples.append((read_image(img_path), read_map(map_path), meta))
    return triples
