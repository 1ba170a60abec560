import json

import numpy as np
import pytest

from curvescope import sift, synthetic
from curvescope.sift import Keypoint, SiftParams, detect_keypoints, match_keypoints, stability_report


def _kp(desc, x=0.0, y=0.0):
    return Keypoint(x, y, 1.6, 0.0, np.asarray(desc, dtype=float), 0, 1, 0.1)


@pytest.fixture(scope="module")
def texture_kps(texture_image):
    return detect_keypoints(texture_image)


class TestDetect:
    def test_constant_image(self):
        assert detect_keypoints(np.full((64, 64), 0.3)) == []

    def test_blob_centre(self):
        kps = detect_keypoints(synthetic.gaussian_blob())
        assert kps
        assert min(np.hypot(k.x - 31.5, k.y - 31.5) for k in kps) <= 2.0

    def test_too_small(self):
        with pytest.raises(ValueError):
            detect_keypoints(np.zeros((15, 40)))

    def test_keypoint_invariants(self, texture_image, texture_kps):
        rows, cols = texture_image.shape
        assert texture_kps
        for k in texture_kps:
            assert k.descriptor.shape == (128,)
            assert abs(np.linalg.norm(k.descriptor) - 1.0) <= 1e-6
            assert k.descriptor.min() >= 0.0
            assert 0 <= k.x < cols and 0 <= k.y < rows
            assert 0 <= k.orientation < 2 * np.pi
            assert k.sigma > 0

    def test_descriptor_clamp(self, monkeypatch):
        raw = np.ones(128)
        raw[0] = 50.0
        monkeypatch.setattr(sift._kernels, "sift_descriptor", lambda *a: raw.copy())
        desc = sift._descriptor(np.zeros((8, 8)), 4, 4, 0.0, 1.6, SiftParams())
        u = raw / np.linalg.norm(raw)
        v = np.minimum(u, 0.2)
        np.testing.assert_allclose(desc, v / np.linalg.norm(v), rtol=1e-12)
        assert abs(np.linalg.norm(desc) - 1.0) <= 1e-12

    def test_flat_patch_has_no_descriptor(self, monkeypatch):
        monkeypatch.setattr(sift._kernels, "sift_descriptor", lambda *a: np.zeros(128))
        assert sift._descriptor(np.zeros((8, 8)), 4, 4, 0.0, 1.6, SiftParams()) is None

    def test_deterministic_order(self, texture_image, texture_kps):
        again = detect_keypoints(texture_image)
        assert [(k.x, k.y, k.orientation) for k in again] == [(k.x, k.y, k.orientation) for k in texture_kps]
        keys = [(k.octave, k.interval) for k in texture_kps]
        assert keys == sorted(keys, key=lambda t: t[0])

    def test_without_upsampling(self):
        kps = detect_keypoints(synthetic.gaussian_blob(), SiftParams(upsample=False))
        assert min(np.hypot(k.x - 31.5, k.y - 31.5) for k in kps) <= 2.0

    def test_translation_equivariance(self, texture_image, texture_kps):
        bg = float(np.median(texture_image))

        def embed(dy, dx, pad=32):
            return np.pad(texture_image, ((pad + dy, pad - dy), (pad + dx, pad - dx)), constant_values=bg)

        base = detect_keypoints(embed(0, 0))
        hits = total = 0
        for dy, dx in [(5, -7), (3, 3), (-8, 1), (1, 0), (7, 6), (2, -2), (-5, -5), (8, 8), (4, 0), (0, -3)]:
            moved = np.array([[k.x, k.y] for k in detect_keypoints(embed(dy, dx))])
            for k in base:
                d = np.hypot(moved[:, 0] - (k.x + dx), moved[:, 1] - (k.y + dy)).min()
                hits += d <= 0.5
                total += 1
        assert hits / total >= 0.9


class TestMatch:
    def test_self_match(self, rng):
        kps = [_kp(rng.random(128)) for _ in range(6)]
        assert match_keypoints(kps, kps) == [(i, i) for i in range(6)]

    def test_empty(self, rng):
        kps = [_kp(rng.random(128))]
        assert match_keypoints(kps, []) == []
        assert match_keypoints([], kps) == []

    def test_single_target(self, rng):
        assert match_keypoints([_kp(rng.random(128))], [_kp(rng.random(128))]) == []

    def test_ratio_zero(self, rng):
        kps = [_kp(rng.random(128)) for _ in range(4)]
        assert match_keypoints(kps, kps, ratio=0.0) == []

    def test_ambiguous_rejected(self):
        e = np.eye(128)
        a = [_kp(e[0])]
        b = [_kp(e[1]), _kp(e[2])]
        assert match_keypoints(a, b) == []

    def test_strict_ratio(self):
        # d1 = 0.8 * d2 exactly must not match
        a = [_kp([0.0, 0.0])]
        b = [_kp([0.8, 0.0]), _kp([0.0, 1.0])]
        assert match_keypoints(a, b, ratio=0.8) == []
        assert match_keypoints(a, b, ratio=0.81) == [(0, 0)]


class TestSerialisation:
    def test_json_round_trip(self, texture_kps):
        text = sift.keypoints_to_json(texture_kps[:3])
        rows = json.loads(text)
        assert set(rows[0]) >= {"x", "y", "sigma", "orientation", "descriptor"}
        assert len(rows[0]["descriptor"]) == 128
        back = sift.keypoints_from_json(text)
        assert back[0].x == texture_kps[0].x
        np.testing.assert_array_equal(back[0].descriptor, texture_kps[0].descriptor)


@pytest.fixture(scope="module")
def report(plan_cache, texture_image):
    return stability_report(texture_image, plan_cache(*texture_image.shape))


class TestStability:
    def test_rows(self, report):
        assert [r.source for r in report.rows] == ["original"] + [f"scale{j}" for j in range(1, 6)]
        assert report.rows[0].matches == report.rows[0].keypoints
        for r in report.rows:
            assert 0 <= r.matches <= r.keypoints

    def test_trend(self, report):
        counts = {r.source: r.keypoints for r in report.rows}
        assert counts["scale4"] <= counts["scale2"] and counts["scale5"] <= counts["scale2"]
        matches = [r.matches for r in report.rows[1:]]
        assert all(b <= a for a, b in zip(matches, matches[1:]))

    def test_stable_subset(self, report):
        original = report.keypoints["original"]
        assert len(report.stable) <= report.rows[1].matches
        assert all(any(s is k for k in original) for s in report.stable)

    def test_csv_and_json(self, report):
        lines = report.to_csv().splitlines()
        assert lines[0] == "source,keypoints,matches_to_original"
        assert len(lines) == 7
        data = json.loads(report.to_json())
        assert data["rows"][0]["matches_to_original"] == data["rows"][0]["keypoints"]

    def test_constant_image(self, plan_cache):
        report = stability_report(np.full((64, 64), 0.5), plan_cache(64, 64))
        assert all(r.keypoints == 0 and r.matches == 0 for r in report.rows)
