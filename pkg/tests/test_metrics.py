"""Metric suite vs. independent naive-loop oracles and identity checks."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from visimp.errors import DataError
from visimp.metrics import (
    Element,
    ElementSegmentation,
    MetricReport,
    compute_metrics,
    cross_correlation,
    kl_divergence,
    r_squared,
    rmse,
    score_elements,
    spearman,
)
from visimp.raster import ImportanceMap


# ---------------------------------------------------------------- oracles
# Plain-Python re-derivations; no numpy vector tricks, no shared helpers.


def kl_oracle(p, q, eps=1e-12):
    p = [v + eps for v in p]
    q = [v + eps for v in q]
    sp, sq = sum(p), sum(q)
    p = [v / sp for v in p]
    q = [v / sq for v in q]
    return sum(qi * (math.log(qi) - math.log(pi)) for pi, qi in zip(p, q))


def cc_oracle(p, q):
    n = len(p)
    mp = sum(p) / n
    mq = sum(q) / n
    cov = sum((a - mp) * (b - mq) for a, b in zip(p, q)) / n
    vp = sum((a - mp) ** 2 for a in p) / n
    vq = sum((b - mq) ** 2 for b in q) / n
    return cov / (math.sqrt(vp) * math.sqrt(vq))


def rmse_oracle(p, q):
    return math.sqrt(sum((a - b) ** 2 for a, b in zip(p, q)) / len(p))


def r2_oracle(p, q):
    mq = sum(q) / len(q)
    ss_res = sum((b - a) ** 2 for a, b in zip(p, q))
    ss_tot = sum((b - mq) ** 2 for b in q)
    return 1.0 - ss_res / ss_tot


def ranks_oracle(values):
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        for k in range(i, j + 1):
            ranks[order[k]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman_oracle(a, b):
    return cc_oracle(ranks_oracle(list(a)), ranks_oracle(list(b)))


def score_oracle(values, elements):
    out = {}
    for e in elements:
        x, y, w, h = e.bbox
        best = -1.0
        for yy in range(y, y + h):
            for xx in range(x, x + w):
                best = max(best, values[yy][xx])
        out[e.element_id] = best
    return out


def rand_map(rng, h=8, w=8):
    return ImportanceMap(rng.random((h, w)))


# --------------------------------------------------------------------- KL


def test_kl_identical_maps_is_zero():
    rng = np.random.default_rng(1)
    m = rand_map(rng)
    assert abs(kl_divergence(m, m)) < 1e-9


def test_kl_hand_computed_ln2():
    # gt puts all mass on one pixel, prediction splits it evenly.
    gt = ImportanceMap(np.array([[1.0, 0.0]]))
    pred = ImportanceMap(np.array([[0.5, 0.5]]))
    assert kl_divergence(pred, gt) == pytest.approx(math.log(2), abs=1e-6)
    assert kl_oracle([0.5, 0.5], [1.0, 0.0]) == pytest.approx(math.log(2), abs=1e-6)


def test_kl_uniform_vs_uniform_is_zero():
    u = ImportanceMap(np.full((4, 4), 0.3))
    assert abs(kl_divergence(u, u)) < 1e-12


def test_kl_proportional_maps_are_zero():
    rng = np.random.default_rng(2)
    q = rng.random((6, 6))
    a = ImportanceMap(q)
    b = ImportanceMap(q * 0.25)
    assert abs(kl_divergence(b, a)) < 1e-9


def test_kl_nonnegative_on_random_pairs():
    rng = np.random.default_rng(3)
    for _ in range(50):
        assert kl_divergence(rand_map(rng), rand_map(rng)) >= 0.0


def test_kl_all_zero_gt_rejected():
    with pytest.raises(DataError):
        kl_divergence(rand_map(np.random.default_rng(0)), ImportanceMap(np.zeros((8, 8))))


def test_kl_dimension_mismatch():
    with pytest.raises(DataError):
        kl_divergence(ImportanceMap(np.zeros((2, 2))), ImportanceMap(np.zeros((3, 2))))


# --------------------------------------------------------------------- CC


def test_cc_of_map_with_itself_is_one():
    m = rand_map(np.random.default_rng(4))
    assert cross_correlation(m, m) == pytest.approx(1.0, abs=1e-12)


def test_cc_negative_affine_is_minus_one():
    rng = np.random.default_rng(5)
    q = rng.random((5, 5)) * 0.5
    pred = ImportanceMap(1.0 - 0.8 * q)  # a = -0.8 < 0
    assert cross_correlation(pred, ImportanceMap(q)) == pytest.approx(-1.0, abs=1e-12)


def test_cc_positive_affine_example():
    # [0,1,2,3] vs [1,3,5,7] after scaling into [0,1]
    pred = ImportanceMap(np.array([[0.0, 1 / 3, 2 / 3, 1.0]]) * 0.3)
    gt = ImportanceMap(np.array([[0.1, 0.3, 0.5, 0.7]]))
    assert cross_correlation(pred, gt) == pytest.approx(1.0, abs=1e-12)


def test_cc_zero_variance_rejected():
    flat = ImportanceMap(np.full((3, 3), 0.5))
    m = rand_map(np.random.default_rng(6), 3, 3)
    with pytest.raises(DataError):
        cross_correlation(flat, m)
    with pytest.raises(DataError):
        cross_correlation(m, flat)


def test_cc_symmetric():
    rng = np.random.default_rng(7)
    a, b = rand_map(rng), rand_map(rng)
    assert cross_correlation(a, b) == pytest.approx(cross_correlation(b, a), abs=1e-14)


@settings(max_examples=30, deadline=None)
@given(
    st.integers(min_value=0, max_value=2**31 - 1),
    st.floats(min_value=0.05, max_value=0.9),
    st.floats(min_value=0.0, max_value=0.1),
)
def test_cc_invariant_to_positive_affine(seed, a, b):
    rng = np.random.default_rng(seed)
    p, q = rng.random((4, 4)), rng.random((4, 4))
    base = cross_correlation(ImportanceMap(p), ImportanceMap(q))
    scaled = cross_correlation(ImportanceMap(np.clip(a * p + b, 0, 1 - 1e-12)), ImportanceMap(q))
    assert scaled == pytest.approx(base, abs=1e-9)


# ------------------------------------------------------------------- RMSE


def test_rmse_identity_and_unit_error():
    m = rand_map(np.random.default_rng(8))
    assert rmse(m, m) == 0.0
    a = ImportanceMap(np.array([[0.0, 1.0]]))
    b = ImportanceMap(np.array([[1.0, 0.0]]))
    assert rmse(a, b) == pytest.approx(1.0)


def test_rmse_matches_oracle():
    rng = np.random.default_rng(9)
    p, q = rng.random((8, 8)), rng.random((8, 8))
    got = rmse(ImportanceMap(p), ImportanceMap(q))
    assert got == pytest.approx(rmse_oracle(p.ravel(), q.ravel()), abs=1e-12)


# --------------------------------------------------------------------- R2


def test_r2_perfect_predictor():
    m = rand_map(np.random.default_rng(10))
    assert r_squared(m, m) == pytest.approx(1.0)


def test_r2_mean_predictor_is_zero():
    rng = np.random.default_rng(11)
    q = rng.random((8, 8))
    pred = ImportanceMap(np.full_like(q, q.mean()))
    assert r_squared(pred, ImportanceMap(q)) == pytest.approx(0.0, abs=1e-12)


def test_r2_reflected_predictor_is_minus_three():
    # pred = 2*mean(Q) - Q doubles every residual: R^2 = 1 - 4 = -3.
    rng = np.random.default_rng(12)
    q = rng.random((8, 8)) * 0.4 + 0.3  # keep 2*mean - q inside [0,1]
    pred_vals = 2 * q.mean() - q
    got = r_squared(ImportanceMap(pred_vals), ImportanceMap(q))
    assert got == pytest.approx(-3.0, abs=1e-9)
    assert got == pytest.approx(r2_oracle(pred_vals.ravel(), q.ravel()), abs=1e-12)


def test_r2_zero_variance_gt_rejected():
    with pytest.raises(DataError):
        r_squared(rand_map(np.random.default_rng(0), 3, 3), ImportanceMap(np.full((3, 3), 0.2)))


# ---------------------------------------------------------------- spearman


def test_spearman_identical_and_reversed():
    assert spearman([1, 2, 3], [10, 20, 30]) == pytest.approx(1.0)
    assert spearman([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)


def test_spearman_tie_handling():
    # ranks of (1,2,2,4) are (1, 2.5, 2.5, 4)
    rng = np.random.default_rng(13)
    a = [1.0, 2.0, 2.0, 4.0]
    for _ in range(10):
        b = rng.random(4).tolist()
        assert spearman(a, b) == pytest.approx(spearman_oracle(a, b), abs=1e-12)


def test_spearman_errors():
    with pytest.raises(DataError):
        spearman([1, 2], [1, 2, 3])
    with pytest.raises(DataError):
        spearman([1], [2])
    with pytest.raises(DataError):
        spearman([5, 5, 5], [1, 2, 3])


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=2**31 - 1), st.floats(min_value=0.3, max_value=3.0))
def test_spearman_invariant_to_increasing_transform(seed, gamma):
    rng = np.random.default_rng(seed)
    a = rng.random(10)
    b = rng.random(10)
    base = spearman(a, b)
    assert spearman(np.power(a, gamma), b) == pytest.approx(base, abs=1e-12)


# ----------------------------------------------------------- element scores


def seg(*boxes):
    return ElementSegmentation(
        tuple(Element(f"e{i}", "other", b) for i, b in enumerate(boxes))
    )


def test_score_elements_known_max_inside_box():
    v = np.zeros((10, 10))
    v[3, 4] = 0.9
    scores = score_elements(ImportanceMap(v), seg((2, 2, 4, 4)))
    assert scores["e0"] == pytest.approx(0.9)


def test_score_elements_disjoint_boxes_match_oracle():
    rng = np.random.default_rng(14)
    v = rng.random((12, 12))
    boxes = [(0, 0, 4, 4), (6, 0, 5, 3), (1, 7, 3, 4), (8, 8, 4, 4)]
    s = seg(*boxes)
    scores = score_elements(ImportanceMap(v), s)
    assert scores == pytest.approx(score_oracle(v.tolist(), s.elements))


def test_score_elements_full_image_box_is_global_max():
    rng = np.random.default_rng(15)
    v = rng.random((7, 9))
    scores = score_elements(ImportanceMap(v), seg((0, 0, 9, 7)))
    assert scores["e0"] == pytest.approx(v.max())


def test_score_elements_out_of_bounds_box():
    with pytest.raises(DataError):
        score_elements(ImportanceMap(np.zeros((5, 5))), seg((3, 3, 3, 1)))


def test_ranking_invariant_under_monotone_transforms():
    rng = np.random.default_rng(16)
    for _ in range(10):
        v = rng.random((16, 16))
        boxes = [(0, 0, 5, 5), (6, 1, 6, 4), (2, 8, 9, 6), (12, 6, 4, 10)]
        s = seg(*boxes)
        base = score_elements(ImportanceMap(v), s)
        base_order = sorted(base, key=base.get)
        gamma = rng.uniform(0.2, 4.0)
        a = rng.uniform(0.5, 4.0)
        transforms = [
            np.power(v, gamma),
            (np.exp(a * v) - 1) / (np.exp(a) - 1),
            np.sin(v * math.pi / 2),
        ]
        for tv in transforms:
            t = score_elements(ImportanceMap(tv), s)
            assert sorted(t, key=t.get) == base_order
            ranked = spearman([base[k] for k in base], [t[k] for k in base])
            assert ranked == pytest.approx(1.0)


# ----------------------------------------------------------- random sweeps


def test_all_metrics_match_oracles_on_random_pairs():
    rng = np.random.default_rng(17)
    for _ in range(25):
        p, q = rng.random((8, 8)), rng.random((8, 8))
        pm, qm = ImportanceMap(p), ImportanceMap(q)
        pl, ql = p.ravel().tolist(), q.ravel().tolist()
        assert kl_divergence(pm, qm) == pytest.approx(kl_oracle(pl, ql), abs=1e-9)
        assert cross_correlation(pm, qm) == pytest.approx(cc_oracle(pl, ql), abs=1e-9)
        assert rmse(pm, qm) == pytest.approx(rmse_oracle(pl, ql), abs=1e-9)
        assert r_squared(pm, qm) == pytest.approx(r2_oracle(pl, ql), abs=1e-9)


def test_metric_report_serialization():
    rng = np.random.default_rng(18)
    p, q = rand_map(rng), rand_map(rng)
    report = compute_metrics(p, q)
    doc = report.to_dict()
    assert set(doc) == {"kl", "cc", "rmse", "r2"}
    assert -1.0 <= doc["cc"] <= 1.0 and doc["kl"] >= 0.0
    assert doc["rmse"] >= 0.0 and doc["r2"] <= 1.0
    partial = compute_metrics(p, q, which=("rmse",))
    assert set(partial.to_dict()) == {"rmse"}
    with pytest.raises(DataError):
        compute_metrics(p, q, which=("nss",))
    assert isinstance(MetricReport(kl=0.1).to_json(), str)
