"""I-VT classification, clustering, and random-walk center selection."""
from __future__ import annotations

import numpy as np
import pytest

from meshgaze.fixation import (FIXATION, MISS, SACCADE, FixationError,
                               FixationPoint, LabeledSample, classify_ivt,
                               cluster_center_random_walk, extract_fixations,
                               group_clusters, load_fixations, nominal_dt,
                               saccade_amplitude, save_fixations)
from meshgaze.gaze import IntersectionRecord, PoseSample

H = 0.0075


def make_stream(points, distances, dt=1.0 / 120.0, miss_at=()):
    """Build (PoseSample, IntersectionRecord|None) pairs from plain arrays."""
    out = []
    for k, (pt, d) in enumerate(zip(points, distances)):
        sample = PoseSample(t=k * dt, p=np.array([float(k), 0.0, 0.0]),
                            o_deg=np.zeros(3), s=np.zeros(2), index=k)
        if k in miss_at:
            out.append((sample, None))
        else:
            rec = IntersectionRecord(point=np.asarray(pt, dtype=float),
                                     triangle=0,
                                     bary=np.array([1.0, 0.0, 0.0]),
                                     distance=float(d), sample_index=k)
            out.append((sample, rec))
    return out


def labels_of(traced, h=H, min_fixation_s=0.0):
    labeled = classify_ivt(traced, h, min_fixation_s=min_fixation_s)
    return [ls.label for ls in labeled]


# ---------------------------------------------------------------------------
# I-VT

def test_stationary_gaze_all_fixation():
    pts = [(0.0, 0.0, 1.0)] * 20
    traced = make_stream(pts, [1.0] * 20)
    assert labels_of(traced, min_fixation_s=0.1) == [FIXATION] * 20


def test_threshold_comparison_hand_values():
    """displacement 0.003 at D=1 -> fixation; 0.010 -> saccade (h=0.0075)."""
    pts = [(0, 0, 0), (0.003, 0, 0), (0.013, 0, 0)]
    traced = make_stream(pts, [1.0, 1.0, 1.0])
    lab = labels_of(traced)
    assert lab[1] == FIXATION and lab[2] == SACCADE


def test_distance_doubling_raises_threshold():
    pts = [(0, 0, 0), (0.003, 0, 0), (0.013, 0, 0)]
    traced = make_stream(pts, [2.0, 2.0, 2.0])
    lab = labels_of(traced)
    assert lab[1] == FIXATION and lab[2] == FIXATION  # threshold now 0.015


def test_boundary_is_inclusive():
    pts = [(0, 0, 0), (H * 1.0, 0, 0)]
    traced = make_stream(pts, [1.0, 1.0])
    assert labels_of(traced)[1] == FIXATION


def test_first_sample_takes_successor_label():
    pts = [(0, 0, 0), (0.5, 0, 0), (0.5, 0, 0)]
    traced = make_stream(pts, [1.0] * 3)
    lab = labels_of(traced)
    assert lab == [SACCADE, SACCADE, FIXATION]
    pts = [(0, 0, 0), (0.0005, 0, 0), (0.001, 0, 0)]
    lab = labels_of(make_stream(pts, [1.0] * 3))
    assert lab == [FIXATION, FIXATION, FIXATION]


def test_miss_breaks_runs_and_is_labeled_miss():
    pts = [(0, 0, 0)] * 30
    traced = make_stream(pts, [1.0] * 30, miss_at={10})
    lab = labels_of(traced, min_fixation_s=0.1)
    assert lab[10] == MISS
    # 10 samples before the miss: (t9-t0)+dt = 10 samples * dt < 0.1 s -> saccade
    assert set(lab[:10]) == {SACCADE}
    # 19 samples after: >= 0.1 s -> fixation
    assert set(lab[11:]) == {FIXATION}


def test_min_duration_boundary_is_inclusive():
    # 1/128 s grid keeps every quantity exactly representable, so the
    # run-duration comparison at the boundary is exact
    dt = 1.0 / 128.0
    min_s = 12.0 / 128.0
    pts12 = [(0, 0, 0)] * 12 + [(0.5, 0, 0), (1.0, 0, 0)]
    lab = labels_of(make_stream(pts12, [1.0] * 14, dt=dt), min_fixation_s=min_s)
    assert set(lab[:12]) == {FIXATION}
    pts11 = [(0, 0, 0)] * 11 + [(0.5, 0, 0), (1.0, 0, 0)]
    lab = labels_of(make_stream(pts11, [1.0] * 13, dt=dt), min_fixation_s=min_s)
    assert set(lab[:11]) == {SACCADE}


def test_singleton_fixation_becomes_saccade():
    # isolated sample between two misses can never pair up
    pts = [(0, 0, 0)] * 5
    traced = make_stream(pts, [1.0] * 5, miss_at={1, 3})
    lab = labels_of(traced)
    assert lab[2] == SACCADE


def test_empty_and_nonmonotonic_rejected():
    with pytest.raises(FixationError):
        classify_ivt([], H)
    traced = make_stream([(0, 0, 0)] * 3, [1.0] * 3)
    traced[2][0].t = traced[1][0].t
    with pytest.raises(FixationError):
        classify_ivt(traced, H)


def test_scale_consistency_randomized():
    """Labels invariant under joint scaling of I and D (300 streams)."""
    rng = np.random.default_rng(42)
    for _ in range(300):
        n = rng.integers(5, 40)
        pts = np.cumsum(rng.normal(scale=0.004, size=(n, 3)), axis=0)
        dists = rng.uniform(0.5, 3.0, size=n)
        s = float(rng.uniform(0.1, 10.0))
        t1 = make_stream(pts, dists)
        t2 = make_stream(pts * s, dists * s)
        assert labels_of(t1) == labels_of(t2)


def test_monotonicity_in_h_randomized():
    rng = np.random.default_rng(43)
    for _ in range(300):
        n = rng.integers(5, 40)
        pts = np.cumsum(rng.normal(scale=0.004, size=(n, 3)), axis=0)
        dists = rng.uniform(0.5, 3.0, size=n)
        traced = make_stream(pts, dists)
        lo = labels_of(traced, h=0.005, min_fixation_s=0.1)
        hi = labels_of(traced, h=0.01, min_fixation_s=0.1)
        for a, b in zip(lo, hi):
            if a == FIXATION:
                assert b == FIXATION


# ---------------------------------------------------------------------------
# clustering

def _fix_labeled(points):
    traced = make_stream(points, [1.0] * len(points))
    return [LabeledSample(sample=s, record=r, label=FIXATION)
            for s, r in traced]


def test_tight_points_one_cluster():
    pts = [(k * 1e-4, 0, 0) for k in range(10)]
    clusters = group_clusters(_fix_labeled(pts), interval=0.03)
    assert len(clusters) == 1 and len(clusters[0].members) == 10


def test_two_groups_two_clusters():
    pts = [(0, 0, 0)] * 5 + [(0.5, 0, 0)] * 5
    clusters = group_clusters(_fix_labeled(pts), interval=0.03)
    assert [len(c.members) for c in clusters] == [5, 5]


def test_alternating_points_never_interleave():
    pts = [(0, 0, 0), (0.5, 0, 0)] * 4
    clusters = group_clusters(_fix_labeled(pts), interval=0.03)
    assert len(clusters) == 8


def test_running_centroid_admits_drift():
    # each step 0.02 from the current centroid; the centroid trails behind
    pts = [(0.0, 0, 0), (0.02, 0, 0), (0.03, 0, 0)]
    clusters = group_clusters(_fix_labeled(pts), interval=0.03)
    assert len(clusters) == 1


def test_representative_pose_is_temporal_midpoint_member():
    pts = [(k * 1e-4, 0, 0) for k in range(5)]
    cluster = group_clusters(_fix_labeled(pts), 0.03)[0]
    # five samples at dt spacing: the midpoint member is sample 2, whose
    # head position make_stream set to (2, 0, 0)
    np.testing.assert_array_equal(cluster.rep_pose_p, [2.0, 0.0, 0.0])


# ---------------------------------------------------------------------------
# random-walk center (independent dense oracle)

def rw_oracle(points, sigma, lam=0.85, rho_radius=0.015):
    """Dense stationary-vector computation, written independently."""
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    d = np.linalg.norm(pts[:, None] - pts[None, :], axis=2)
    w = np.exp(-d / sigma)
    np.fill_diagonal(w, 0.0)
    t = w / w.sum(axis=1, keepdims=True)
    rho = (d <= rho_radius).sum(axis=1).astype(float)   # self included
    rho /= rho.sum()
    pi = np.full(n, 1.0 / n)
    for _ in range(1000):
        nxt = lam * (t.T @ pi) + (1 - lam) * rho
        if np.abs(nxt - pi).sum() < 1e-9:
            pi = nxt
            break
        pi = nxt
    return int(np.argmax(pi))


def _cluster_from_points(points):
    clusters = group_clusters(_fix_labeled(points), interval=10.0)
    assert len(clusters) == 1
    return clusters[0]


def test_singleton_cluster_short_circuits():
    cluster = _cluster_from_points([(0.1, 0.2, 0.3)])
    fp = cluster_center_random_walk(cluster, sigma_rw=0.03)
    np.testing.assert_allclose(fp.position, [0.1, 0.2, 0.3])
    assert fp.weight == 1


def test_collinear_symmetric_center_is_middle():
    cluster = _cluster_from_points([(-0.01, 0, 0), (0, 0, 0), (0.01, 0, 0)])
    fp = cluster_center_random_walk(cluster, sigma_rw=0.03)
    np.testing.assert_allclose(fp.position, [0, 0, 0], atol=1e-15)


def test_outlier_never_wins():
    rng = np.random.default_rng(11)
    pack = rng.normal(scale=0.002, size=(9, 3))
    pts = np.vstack([pack, [[0.2, 0.0, 0.0]]])
    cluster = _cluster_from_points(pts)
    fp = cluster_center_random_walk(cluster, sigma_rw=0.03)
    assert np.linalg.norm(fp.position - [0.2, 0, 0]) > 0.1


def test_random_walk_matches_dense_oracle():
    rng = np.random.default_rng(12)
    for trial in range(25):
        n = int(rng.integers(2, 12))
        pts = rng.normal(scale=0.01, size=(n, 3))
        cluster = _cluster_from_points(pts)
        fp = cluster_center_random_walk(cluster, sigma_rw=0.03)
        want = rw_oracle(pts, 0.03)
        np.testing.assert_allclose(fp.position, pts[want], atol=0,
                                   err_msg=f"trial {trial}")


def test_center_duration_and_weight():
    pts = [(k * 1e-4, 0, 0) for k in range(6)]
    cluster = _cluster_from_points(pts)
    fp = cluster_center_random_walk(cluster, sigma_rw=0.03, dt=1.0 / 120.0)
    assert fp.weight == 6
    assert fp.duration == pytest.approx(6 / 120.0, abs=1e-12)


# ---------------------------------------------------------------------------
# saccade amplitude

def _fp(pos, pose_p=(0, 0, 0)):
    return FixationPoint(position=np.asarray(pos, dtype=float),
                         pose_p=np.asarray(pose_p, dtype=float),
                         pose_o=np.zeros(3), duration=0.2, weight=1)


def test_saccade_amplitude_right_angle():
    a = _fp((1, 0, 0))
    b = _fp((0, 1, 0))
    assert saccade_amplitude(a, b) == pytest.approx(90.0, abs=1e-9)


def test_saccade_amplitude_extremes():
    assert saccade_amplitude(_fp((1, 0, 0)), _fp((1, 0, 0))) == pytest.approx(0.0, abs=1e-6)
    assert saccade_amplitude(_fp((1, 0, 0)), _fp((-1, 0, 0))) == pytest.approx(180.0, abs=1e-9)


def test_saccade_amplitude_measured_from_second_head_position():
    # were the first pose used instead, both points would sit in nearly the
    # same direction from (9,9,9) and the angle would be tiny
    a = _fp((1, 0, 0), pose_p=(9, 9, 9))
    b = _fp((0, 2, 0), pose_p=(0, 0, 0))
    assert saccade_amplitude(a, b) == pytest.approx(90.0, abs=1e-9)


def test_saccade_amplitude_coincident_head_rejected():
    with pytest.raises(FixationError):
        saccade_amplitude(_fp((0, 0, 0)), _fp((1, 0, 0)))


# ---------------------------------------------------------------------------
# extraction pipeline and fixation files

def test_extract_fixations_counts(cfg):
    pts = [(0, 0, 1)] * 24 + [(0.5, 0, 1)] * 24
    traced = make_stream(pts, [1.0] * 48, miss_at={5})
    points, stats = extract_fixations(traced, cfg)
    assert stats["samples"] == 48
    assert stats["miss_samples"] == 1
    # the 5 samples before the miss are too brief to keep (5/120 s < 0.1 s)
    assert stats["saccade_samples"] == 6
    assert stats["fixation_samples"] == 41
    assert stats["fixations"] == len(points) == 2
    np.testing.assert_allclose(points[0].position, [0, 0, 1])
    np.testing.assert_allclose(points[1].position, [0.5, 0, 1])
    assert points[0].weight == 18 and points[1].weight == 23


def test_fixation_file_roundtrip(tmp_path):
    pts = [_fp((0.1, 0.2, 0.3), pose_p=(0, 1.6, -1.5)),
           _fp((0.4, 0.5, 0.6), pose_p=(0.1, 1.6, -1.4))]
    path = tmp_path / "fix.csv"
    save_fixations(path, "rec7", pts)
    rows = load_fixations(path)
    assert [(r[0], r[1]) for r in rows] == [("rec7", 0), ("rec7", 1)]
    np.testing.assert_array_equal(rows[0][2].position, pts[0].position)
    np.testing.assert_array_equal(rows[1][2].pose_p, pts[1].pose_p)
    assert rows[0][2].duration == pts[0].duration
    assert rows[0][2].weight == pts[0].weight


def test_nominal_dt_median():
    samples = [PoseSample(t=t, p=np.zeros(3), o_deg=np.zeros(3),
                          s=np.zeros(2), index=i)
               for i, t in enumerate([0.0, 1 / 120, 2 / 120, 2 / 120 + 5.0])]
    assert nominal_dt(samples) == pytest.approx(1 / 120, abs=1e-12)
