"""Evaluation suite for importance maps.

KL divergence and cross correlation compare a predicted map against a
ground-truth map treated respectively as probability distributions and
as paired pixel samples; RMSE and R² compare raw [0,1] values (the
annotation scale is absolute, not a distribution); Spearman rank
correlation and per-element max scoring support element-level ranking.

Conventions, fixed here once:
  * KL normalizes both maps to sum 1 after adding `epsilon` per pixel
    (default 1e-12) and uses natural log.
  * CC uses population (1/N) moments.
  * Spearman assigns tied values their mean rank.
No metric silently renormalizes its inputs beyond what is stated.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .raster import ImportanceMap

KL_EPSILON = 1e-12

ELEMENT_KINDS = ("title", "axis_label", "paragraph", "legend", "data", "image", "other")


@dataclass(frozen=True)
class Element:
    element_id: str
    kind: str
    bbox: tuple[int, int, int, int]  # (x, y, w, h) in pixels

    def __post_init__(self):
        if self.kind not in ELEMENT_KINDS:
            raise DataError(f"unknown element kind {self.kind!r}")
        x, y, w, h = self.bbox
        if w < 1 or h < 1:
            raise DataError(f"element {self.element_id}: bbox must be at least 1x1")
        if x < 0 or y < 0:
            raise DataError(f"element {self.element_id}: bbox origin must be non-negative")


@dataclass(frozen=True)
class ElementSegmentation:
    elements: tuple[Element, ...]

    def __post_init__(self):
        ids = [e.element_id for e in self.elements]
        if len(set(ids)) != len(ids):
            raise DataError("element ids must be unique")

    @classmethod
    def from_dict(cls, raw: dict) -> "ElementSegmentation":
        try:
            elements = tuple(
                Element(str(e["id"]), str(e["kind"]), tuple(int(v) for v in e["bbox"]))
                for e in raw["elements"]
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"malformed segmentation: {exc}") from exc
        return cls(elements)


@dataclass
class MetricReport:
    kl: float | None = None
    cc: float | None = None
    rmse: float | None = None
    r2: float | None = None
    element_scores: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {}
        for name in ("kl", "cc", "rmse", "r2"):
            v = getattr(self, name)
            if v is not None:
                out[name] = v
        if self.element_scores:
            out["element_scores"] = dict(self.element_scores)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _paired(pred: ImportanceMap, gt: ImportanceMap) -> tuple[np.ndarray, np.ndarray]:
    if pred.values.shape != gt.values.shape:
        raise DataError(
            f"map dimensions differ: pred {pred.values.shape} vs gt {gt.values.shape}"
        )
    return pred.values.ravel(), gt.values.ravel()


def kl_divergence(
    pred: ImportanceMap, gt: ImportanceMap, epsilon: float = KL_EPSILON
) -> float:
    """KL(P,Q) = sum Q_i (log Q_i - log P_i), natural log.

    Both maps are normalized to sum 1 after adding epsilon per pixel, so
    the result is 0 iff the maps are proportional and is always >= 0.
    Heavily penalizes predictions that miss ground-truth mass.
    """
    p, q = _paired(pred, gt)
    if q.sum() == 0:
        raise DataError("KL undefined: ground-truth map is all-zero")
    p = p + epsilon
    q = q + epsilon
    p = p / p.sum()
    q = q / q.sum()
    return float(np.sum(q * (np.log(q) - np.log(p))))


def cross_correlation(pred: ImportanceMap, gt: ImportanceMap) -> float:
    """Pearson correlation of pixel values with population (1/N) moments."""
    p, q = _paired(pred, gt)
    pc = p - p.mean()
    qc = q - q.mean()
    sp = math.sqrt(float(pc @ pc) / p.size)
    sq = math.sqrt(float(qc @ qc) / q.size)
    if sp == 0 or sq == 0:
        raise DataError("correlation undefined: a map has zero variance")
    return float((pc @ qc) / p.size / (sp * sq))


def rmse(pred: ImportanceMap, gt: ImportanceMap) -> float:
    """Root-mean-square error over raw [0,1] values; no normalization."""
    p, q = _paired(pred, gt)
    d = p - q
    return math.sqrt(float(d @ d) / p.size)


def r_squared(pred: ImportanceMap, gt: ImportanceMap) -> float:
    """1 - SS_res/SS_tot; 0 is the predict-the-mean baseline, 1 is perfect."""
    p, q = _paired(pred, gt)
    qc = q - q.mean()
    ss_tot = float(qc @ qc)
    if ss_tot == 0:
        raise DataError("R^2 undefined: ground truth has zero variance")
    d = q - p
    return 1.0 - float(d @ d) / ss_tot


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks; tied values share the mean of their rank range."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(a, b) -> float:
    """Spearman rank correlation: Pearson correlation of average ranks."""
    av = np.asarray(a, dtype=np.float64)
    bv = np.asarray(b, dtype=np.float64)
    if av.ndim != 1 or bv.ndim != 1:
        raise DataError("spearman expects 1-D sequences")
    if av.size != bv.size:
        raise DataError(f"length mismatch: {av.size} vs {bv.size}")
    if av.size < 2:
        raise DataError("spearman needs at least 2 entries")
    ra = _average_ranks(av)
    rb = _average_ranks(bv)
    ra -= ra.mean()
    rb -= rb.mean()
    na = math.sqrt(float(ra @ ra))
    nb = math.sqrt(float(rb @ rb))
    if na == 0 or nb == 0:
        raise DataError("spearman undefined: all values tied in one list")
    return float((ra @ rb) / (na * nb))


def score_elements(map_: ImportanceMap, seg: ElementSegmentation) -> dict[str, float]:
    """Max map value inside each element's bbox, keyed by element id.

    The map is scored as given; callers wanting the usual normalized
    scores peak-normalize first.
    """
    h, w = map_.values.shape
    scores: dict[str, float] = {}
    for e in seg.elements:
        x, y, bw, bh = e.bbox
        if x + bw > w or y + bh > h:
            raise DataError(
                f"element {e.element_id}: bbox ({x},{y},{bw},{bh}) exceeds "
                f"map bounds {w}x{h}"
            )
        scores[e.element_id] = float(map_.values[y : y + bh, x : x + bw].max())
    return scores


def compute_metrics(
    pred: ImportanceMap,
    gt: ImportanceMap,
    which: tuple[str, ...] = ("kl", "cc", "rmse", "r2"),
) -> MetricReport:
    """Evaluate the requested metrics in one pass; unknown names error."""
    fns = {"kl": kl_divergence, "cc": cross_correlation, "rmse": rmse, "r2": r_squared}
    report = MetricReport()
    for name in which:
        if name not in fns:
            raise DataError(f"unknown metric {name!r}; choose from {sorted(fns)}")
        setattr(report, name, fns[name](pred, gt))
    return report
