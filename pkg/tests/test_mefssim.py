import numpy as np
import pytest

from brightfuse import mefssim
from brightfuse.errors import DegenerateInputError, DimensionMismatchError, UsageError
from brightfuse.mefssim import MefSsimConfig


def smooth_image(seed, h=48, w=48):
    rng = np.random.default_rng(seed)
    img = rng.random((h, w, 3)).astype(np.float32)
    for _ in range(2):
        img = (img + np.roll(img, 1, 0) + np.roll(img, 1, 1)) / 3.0
    return img.astype(np.float32)


class TestBasics:
    def test_self_stack_scores_one(self):
        img = smooth_image(0)
        score = mefssim.mef_ssim([img, img.copy()], img.copy())
        assert score >= 0.99
        assert score <= 1.0

    def test_mean_shift_invariance(self):
        img = smooth_image(1)
        base = mefssim.mef_ssim([img, img], img)
        shifted = mefssim.mef_ssim([img, img], img + 0.1)
        assert abs(base - shifted) < 1e-9

    def test_noise_lowers_score(self):
        img = smooth_image(2)
        scores = []
        for sigma in (0.0, 20 / 255.0):
            acc = 0.0
            for seed in range(10):
                noise = np.random.default_rng(seed).normal(0, sigma, img.shape)
                acc += mefssim.mef_ssim([img, img], (img + noise).astype(np.float32))
            scores.append(acc / 10)
        assert scores[1] < scores[0]

    def test_monotone_noise_degradation(self):
        img = smooth_image(3)
        means = []
        for sigma in (5 / 255.0, 10 / 255.0, 20 / 255.0):
            acc = 0.0
            for seed in range(10):
                noise = np.random.default_rng(seed).normal(0, sigma, img.shape)
                acc += mefssim.mef_ssim([img, img], (img + noise).astype(np.float32))
            means.append(acc / 10)
        assert means[0] > means[1] > means[2]

    def test_permutation_invariance(self):
        a, b, c = smooth_image(4), smooth_image(5), smooth_image(6)
        fused = ((a + b + c) / 3).astype(np.float32)
        s1 = mefssim.mef_ssim([a, b, c], fused)
        s2 = mefssim.mef_ssim([c, a, b], fused)
        assert s1 == s2

    def test_joint_scaling_invariance(self):
        # Scale in float64 so input storage rounding does not mask the
        # metric's own exactness.
        a, b = smooth_image(7).astype(np.float64), smooth_image(8).astype(np.float64)
        fused = (a + b) / 2
        base = mefssim.mef_ssim([a, b], fused)
        for s in (0.5, 0.7, 1.0):
            cfg = MefSsimConfig(stabilizer=(0.03 * 255.0) ** 2 * s * s)
            scaled = mefssim.mef_ssim([a * s, b * s], fused * s, cfg)
            assert abs(scaled - base) < 1e-9

    def test_flat_stack_flat_fused_is_perfect(self):
        img = np.full((16, 16, 3), 0.4, dtype=np.float32)
        assert mefssim.mef_ssim([img, img], img.copy()) == 1.0

    def test_flat_stack_structured_fused_penalized(self):
        img = np.full((16, 16, 3), 0.4, dtype=np.float32)
        fused = smooth_image(9, 16, 16)
        assert mefssim.mef_ssim([img, img], fused) < 1.0


class TestValidation:
    def test_stack_too_small(self):
        img = smooth_image(0)
        with pytest.raises(DegenerateInputError):
            mefssim.mef_ssim([img], img)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            mefssim.mef_ssim(
                [smooth_image(0), smooth_image(1, 24, 24)], smooth_image(2)
            )

    def test_tiny_images_rejected(self):
        img = np.zeros((4, 4, 3), dtype=np.float32)
        with pytest.raises(DimensionMismatchError):
            mefssim.mef_ssim([img, img], img)

    def test_bad_config(self):
        with pytest.raises(UsageError):
            MefSsimConfig(patch_size=1)
        with pytest.raises(UsageError):
            MefSsimConfig(stride=0)

    def test_stride_supported(self):
        img = smooth_image(10)
        s1 = mefssim.mef_ssim([img, img], img, MefSsimConfig(stride=4))
        assert s1 >= 0.99
