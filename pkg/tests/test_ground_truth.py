"""Click/fixation aggregation and binary-mask averaging."""

import json
import math

import numpy as np
import pytest
from PIL import Image

from visimp.errors import DataError
from visimp.ground_truth import (
    AnnotationSet,
    ClickLog,
    ClickPoint,
    Participant,
    aggregate_masks,
    aggregate_points,
    load_annotation_set,
    load_click_log,
)
def make_log(w, h, point_lists):
    parts = tuple(
        Participant(f"p{i}", tuple(ClickPoint(x, y) for (x, y) in pts))
        for i, pts in enumerate(point_lists)
    )
    return ClickLog(w, h, parts)


def dense_point_map_oracle(w, h, points, sigma):
    """Impulse accumulation + full renormalized 2-D blur + peak norm."""
    acc = np.zeros((h, w))
    for (x, y) in points:
        acc[int(round(y)), int(round(x))] += 1.0
    r = math.ceil(3 * sigma)
    d = np.arange(-r, r + 1, dtype=np.float64)
    k1 = np.exp(-(d * d) / (2 * sigma * sigma))
    k2 = np.outer(k1, k1)
    out = np.zeros((h, w))
    for y in range(h):
        y0, y1 = max(0, y - r), min(h, y + r + 1)
        for x in range(w):
            x0, x1 = max(0, x - r), min(w, x + r + 1)
            kw = k2[y0 - y + r : y1 - y + r, x0 - x + r : x1 - x + r]
            out[y, x] = (acc[y0:y1, x0:x1] * kw).sum() / kw.sum()
    peak = out.max()
    return out / peak if peak > 0 else out


# ------------------------------------------------------- aggregate_points


def test_single_click_peaks_at_click_with_value_one():
    log = make_log(100, 100, [[(50, 50)]])
    out = aggregate_points(log, sigma=16.0).values
    assert out.max() == pytest.approx(1.0)
    assert np.unravel_index(out.argmax(), out.shape) == (50, 50)


def test_duplicate_clicks_equal_single_click_after_normalization():
    one = aggregate_points(make_log(40, 30, [[(12, 9)]]), sigma=4.0).values
    two = aggregate_points(make_log(40, 30, [[(12, 9), (12, 9)]]), sigma=4.0).values
    assert np.allclose(one, two, atol=1e-12)


def test_three_participants_match_dense_oracle():
    point_sets = [[(3, 4), (10, 2)], [(7, 7)], [(3, 4), (0, 11)]]
    log = make_log(12, 14, point_sets)
    out = aggregate_points(log, sigma=2.0).values
    flat = [p for pts in point_sets for p in pts]
    ref = dense_point_map_oracle(12, 14, flat, 2.0)
    assert np.abs(out - ref).max() < 1e-9


def test_participant_order_invariance():
    a = aggregate_points(make_log(20, 20, [[(1, 2)], [(15, 8), (3, 3)]]), 3.0)
    b = aggregate_points(make_log(20, 20, [[(15, 8), (3, 3)], [(1, 2)]]), 3.0)
    assert np.allclose(a.values, b.values, atol=1e-15)


def test_uniform_duplication_invariance():
    pts = [[(4, 4), (9, 2)]]
    a = aggregate_points(make_log(16, 16, pts), 2.0)
    b = aggregate_points(make_log(16, 16, [pts[0] * 3]), 2.0)
    assert np.allclose(a.values, b.values, atol=1e-12)


def test_out_of_bounds_point_rejected_with_diagnostic(caplog):
    log = make_log(10, 10, [[(5, 5), (20, 3)]])
    with caplog.at_level("WARNING", logger="visimp.ground_truth"):
        out = aggregate_points(log, sigma=2.0).values
    assert "out-of-bounds" in caplog.text
    ref = aggregate_points(make_log(10, 10, [[(5, 5)]]), sigma=2.0).values
    assert np.allclose(out, ref)


def test_empty_log_is_error_but_pointless_participants_give_zero_map():
    with pytest.raises(DataError):
        aggregate_points(ClickLog(10, 10, ()), sigma=2.0)
    out = aggregate_points(make_log(10, 10, [[]]), sigma=2.0).values
    assert np.all(out == 0.0)


def test_duplicate_participant_ids_rejected():
    parts = (
        Participant("p0", (ClickPoint(1, 1),)),
        Participant("p0", (ClickPoint(2, 2),)),
    )
    with pytest.raises(DataError):
        ClickLog(10, 10, parts)


# -------------------------------------------------------- aggregate_masks


def test_single_mask_is_identity():
    rng = np.random.default_rng(0)
    m = (rng.random((6, 8)) > 0.5).astype(np.uint8)
    out = aggregate_masks(AnnotationSet(8, 6, (m,))).values
    assert np.array_equal(out, m.astype(float))


def test_complementary_masks_average_to_half():
    m = np.zeros((5, 5), dtype=np.uint8)
    m[:2] = 1
    out = aggregate_masks(AnnotationSet(5, 5, (m, 1 - m))).values
    assert np.all(out == 0.5)


def test_nineteen_masks_match_exact_mean():
    rng = np.random.default_rng(19)
    masks = tuple((rng.random((9, 7)) > 0.5).astype(np.uint8) for _ in range(19))
    out = aggregate_masks(AnnotationSet(7, 9, masks)).values
    ref = sum(m.astype(np.float64) for m in masks) / 19.0
    assert np.array_equal(out, ref)
    # every value is exactly count/19
    counts = out * 19
    assert np.allclose(counts, np.round(counts), atol=1e-12)


def test_mask_dimension_mismatch_rejected():
    with pytest.raises(DataError):
        AnnotationSet(4, 4, (np.zeros((4, 4), dtype=np.uint8), np.zeros((3, 4), dtype=np.uint8)))


def test_nonbinary_mask_rejected():
    with pytest.raises(DataError):
        AnnotationSet(3, 3, (np.full((3, 3), 2, dtype=np.uint8),))


def test_empty_annotation_set_rejected():
    with pytest.raises(DataError):
        aggregate_masks(AnnotationSet(4, 4, ()))


# ------------------------------------------------------------ file formats


def test_click_log_json_roundtrip(tmp_path):
    doc = {
        "width": 30,
        "height": 20,
        "participants": [
            {"id": "a", "points": [{"x": 3, "y": 4, "t": 120.5}, {"x": 7, "y": 1}]},
            {"id": "b", "points": []},
        ],
    }
    p = tmp_path / "log.json"
    p.write_text(json.dumps(doc))
    log = load_click_log(p)
    assert log.image_width == 30 and log.image_height == 20
    assert log.participants[0].points[0].t == 120.5
    assert log.participants[0].points[1].t is None
    assert log.participants[1].points == ()


def test_click_log_malformed_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(DataError):
        load_click_log(p)
    p2 = tmp_path / "missing_fields.json"
    p2.write_text(json.dumps({"width": 3}))
    with pytest.raises(DataError):
        load_click_log(p2)


def test_annotation_manifest_loads_relative_masks(tmp_path):
    m0 = np.zeros((4, 6), dtype=np.uint8)
    m0[:, :3] = 255
    m1 = np.zeros((4, 6), dtype=np.uint8)
    m1[2:] = 255
    Image.fromarray(m0).save(tmp_path / "p0.png")
    Image.fromarray(m1).save(tmp_path / "p1.png")
    manifest = tmp_path / "set.json"
    manifest.write_text(json.dumps({"width": 6, "height": 4, "masks": ["p0.png", "p1.png"]}))
    s = load_annotation_set(manifest)
    out = aggregate_masks(s).values
    assert out[0, 0] == 0.5 and out[3, 0] == 1.0 and out[0, 5] == 0.0
