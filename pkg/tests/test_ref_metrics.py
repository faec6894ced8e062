import math

import numpy as np
import pytest

import oracles
from mrimetrics.errors import DegenerateInputError, DimensionMismatchError, MetricsError
from mrimetrics.grid import DataRangeMode, ImageGrid, LabelMask
from mrimetrics.normalize import cminmax, minmax, quantile_norm, zscore
from mrimetrics.refmetrics import (
    MetricReport,
    cw_ssim,
    dsc,
    error_metrics,
    mi,
    ms_ssim,
    nmi,
    pcc,
    psnr,
    ssim,
)


def rand_pair(rng, h=16, w=16, lo=0.0, hi=100.0):
    return (
        ImageGrid(rng.uniform(lo, hi, (h, w))),
        ImageGrid(rng.uniform(lo, hi, (h, w))),
    )


class TestSsim:
    def test_identity_is_exactly_one(self, rng):
        img = ImageGrid(rng.uniform(0, 500, (32, 32)))
        assert ssim(img, img) == 1.0

    def test_matches_naive_windowed_oracle(self, rng):
        for _ in range(5):
            a, b = rand_pair(rng)
            L = float(max(a.data.max(), b.data.max()) - min(a.data.min(), b.data.min()))
            fast = ssim(a, b, data_range=L)
            slow = oracles.ssim_naive(a.data, b.data, L)
            assert abs(fast - slow) < 1e-9

    def test_joint_scale_invariance(self, rng):
        a, b = rand_pair(rng)
        L = 120.0
        scale = 7.5
        a2 = ImageGrid(a.data * scale)
        b2 = ImageGrid(b.data * scale)
        assert abs(ssim(a, b, data_range=L) - ssim(a2, b2, data_range=L * scale)) < 1e-9

    def test_pair_mode_symmetry(self, rng):
        a, b = rand_pair(rng)
        assert ssim(a, b, data_range=DataRangeMode.pair()) == pytest.approx(
            ssim(b, a, data_range=DataRangeMode.pair()), abs=1e-15
        )

    def test_per_image_mode_is_asymmetric(self, rng):
        a = ImageGrid(rng.uniform(0, 50, (16, 16)))
        b = ImageGrid(rng.uniform(0, 200, (16, 16)))
        s_ab = ssim(a, b, data_range=DataRangeMode.per_image())
        s_ba = ssim(b, a, data_range=DataRangeMode.per_image())
        assert s_ab != s_ba

    def test_dimension_mismatch(self, rng):
        a = ImageGrid(rng.uniform(0, 1, (8, 8)))
        b = ImageGrid(rng.uniform(0, 1, (8, 9)))
        with pytest.raises(DimensionMismatchError):
            ssim(a, b)

    def test_degenerate_range(self):
        a = ImageGrid(np.full((8, 8), 3.0))
        with pytest.raises(DegenerateInputError):
            ssim(a, a, data_range=DataRangeMode.pair())


class TestMsSsim:
    def test_identity(self, phantom):
        assert abs(ms_ssim(phantom, phantom) - 1.0) < 1e-12

    def test_minimum_size_gate(self, rng):
        ok = ImageGrid(rng.uniform(0, 1, (176, 176)))
        assert ms_ssim(ok, ok) == pytest.approx(1.0)
        small = ImageGrid(rng.uniform(0, 1, (175, 175)))
        with pytest.raises(MetricsError, match="176"):
            ms_ssim(small, small)

    def test_blur_orders_scores(self, phantom):
        from mrimetrics.distort import DistortionSpec, apply

        weak = apply(phantom, DistortionSpec("gaussian_blur", 1.0, seed=0))
        strong = apply(phantom, DistortionSpec("gaussian_blur", 5.0, seed=0))
        assert ms_ssim(strong, phantom) < ms_ssim(weak, phantom)


class TestCwSsim:
    def test_identity(self, phantom):
        assert abs(cw_ssim(phantom, phantom) - 1.0) < 1e-9

    def test_translation_tolerance_vs_ssim(self, small_phantoms):
        from mrimetrics.distort import DistortionSpec, apply

        cw, ss = [], []
        for i, p in enumerate(small_phantoms):
            shifted = apply(p, DistortionSpec("translation", 1.0, seed=i))
            cw.append(cw_ssim(shifted, p))
            ss.append(ssim(shifted, p))
        assert float(np.median(cw)) >= 0.95 * 0.9  # robustly high
        assert float(np.median(cw)) - float(np.median(ss)) >= 0.10

    def test_negation_is_a_global_phase_flip(self, phantom):
        # flipping intensities flips every bandpass coefficient's sign, a
        # global pi phase shift; the magnitude form treats that as identical
        negated = ImageGrid(-phantom.data)
        assert cw_ssim(phantom, negated) == pytest.approx(1.0, abs=1e-9)

    def test_too_small_image(self, rng):
        tiny = ImageGrid(rng.uniform(0, 1, (16, 16)))
        with pytest.raises(MetricsError, match="pyramid"):
            cw_ssim(tiny, tiny)


class TestPsnr:
    def test_identity_infinite(self, rng):
        img = ImageGrid(rng.uniform(0, 9, (8, 8)))
        assert psnr(img, img) == math.inf

    def test_zero_db_case(self):
        a = ImageGrid(np.array([[0.0, 0.0]]))
        b = ImageGrid(np.array([[255.0, 255.0]]))
        assert psnr(a, b, data_range=255.0) == pytest.approx(0.0, abs=1e-12)

    def test_algebraic_identity(self, rng):
        for _ in range(10):
            a, b = rand_pair(rng)
            L = 250.0
            direct = psnr(a, b, data_range=L)
            mse = error_metrics(a, b)["mse"]
            assert abs(direct - (20 * math.log10(L) - 10 * math.log10(mse))) < 1e-12

    def test_joint_scale_invariance(self, rng):
        a, b = rand_pair(rng)
        L = 130.0
        scale = 3.25
        scaled = psnr(ImageGrid(a.data * scale), ImageGrid(b.data * scale), data_range=L * scale)
        assert abs(scaled - psnr(a, b, data_range=L)) < 1e-9


class TestErrorMetrics:
    def test_identity_all_zero(self, rng):
        img = ImageGrid(rng.uniform(0, 9, (8, 8)))
        out = error_metrics(img, img)
        assert all(v == 0.0 for v in out.values())

    def test_constant_offset(self, rng):
        img = ImageGrid(rng.uniform(0, 9, (8, 8)))
        shifted = ImageGrid(img.data + 3.0)
        out = error_metrics(shifted, img)
        assert out["mae"] == pytest.approx(3.0)
        assert out["mse"] == pytest.approx(9.0)
        assert out["rmse"] == pytest.approx(3.0)

    def test_matches_naive_oracle(self, rng):
        for _ in range(10):
            a, b = rand_pair(rng, h=4, w=4)
            fast = error_metrics(a, b)
            slow = oracles.error_metrics_naive(a.data, b.data)
            for key in ("mae", "mse", "rmse", "nmse"):
                assert fast[key] == pytest.approx(slow[key], rel=1e-12)

    def test_constant_reference_rejected(self, rng):
        img = ImageGrid(rng.uniform(0, 9, (8, 8)))
        ref = ImageGrid(np.full((8, 8), 2.0))
        with pytest.raises(DegenerateInputError):
            error_metrics(img, ref)


class TestMutualInformation:
    def test_nmi_identity(self, rng):
        img = ImageGrid(rng.uniform(0, 99, (16, 16)))
        assert nmi(img, img) == pytest.approx(2.0, abs=1e-12)

    def test_nmi_shift_invariance_exact(self, phantom):
        shifted = ImageGrid(phantom.data + 0.15 * (phantom.data.max() - phantom.data.min()))
        assert nmi(shifted, phantom) == 2.0

    def test_matches_naive_oracle_small(self, rng):
        for _ in range(10):
            a, b = rand_pair(rng, h=8, w=8)
            assert nmi(a, b, bins=4) == pytest.approx(oracles.nmi_naive(a.data, b.data, 4), abs=1e-12)
            assert mi(a, b, bins=4) == pytest.approx(oracles.mi_naive(a.data, b.data, 4), abs=1e-12)

    def test_symmetry(self, rng):
        a, b = rand_pair(rng)
        assert nmi(a, b) == pytest.approx(nmi(b, a), abs=1e-12)

    def test_invariant_under_monotone_normalizations(self, rng):
        a, b = rand_pair(rng)
        base = nmi(a, b)
        for method in (minmax, lambda i: cminmax(i, p=0.0, q=100.0), zscore, quantile_norm):
            assert nmi(method(a), method(b)) == pytest.approx(base, abs=1e-9)


class TestPcc:
    def test_perfect_linear_dependence(self, rng):
        img = ImageGrid(rng.uniform(0, 9, (12, 12)))
        scaled = ImageGrid(2.5 * img.data + 7.0)
        assert pcc(img, scaled) == pytest.approx(1.0, abs=1e-12)

    def test_negation(self, rng):
        img = ImageGrid(rng.uniform(0, 9, (12, 12)))
        assert pcc(img, ImageGrid(-img.data)) == pytest.approx(-1.0, abs=1e-12)

    def test_matches_naive_oracle(self, rng):
        for _ in range(10):
            a, b = rand_pair(rng, h=6, w=6)
            assert pcc(a, b) == pytest.approx(oracles.pcc_naive(a.data, b.data), abs=1e-12)

    def test_affine_invariance(self, rng):
        a, b = rand_pair(rng)
        base = pcc(a, b)
        for method in (minmax, zscore, quantile_norm):
            assert pcc(method(a), b) == pytest.approx(base, abs=1e-12)
            assert pcc(a, method(b)) == pytest.approx(base, abs=1e-12)

    def test_constant_image_rejected(self, rng):
        img = ImageGrid(rng.uniform(0, 9, (8, 8)))
        with pytest.raises(DegenerateInputError):
            pcc(img, ImageGrid(np.full((8, 8), 1.0)))


class TestDsc:
    def test_identity(self):
        mask = LabelMask((np.arange(64).reshape(8, 8) % 3).astype(int))
        assert dsc(mask, mask, class_id=1) == pytest.approx(1.0, abs=1e-6)

    def test_empty_masks_score_one(self):
        empty = LabelMask(np.zeros((8, 8), dtype=int))
        assert dsc(empty, empty, class_id=1) == 1.0

    def test_half_overlap(self):
        a = np.zeros((20, 10), dtype=int)
        b = np.zeros((20, 10), dtype=int)
        a[:10, :] = 1        # |A| = 100
        b[5:15, :] = 1       # |B| = 100, overlap 50
        value = dsc(LabelMask(a), LabelMask(b), class_id=1, epsilon=1e-7)
        assert value == pytest.approx((100.0 + 1e-7) / (200.0 + 1e-7))

    def test_total_foreground(self):
        a = np.zeros((6, 6), dtype=int)
        a[0, 0] = 1
        a[1, 1] = 2
        b = np.zeros((6, 6), dtype=int)
        b[0, 0] = 2
        b[1, 1] = 1
        # per-class overlap is zero but the foreground union matches
        assert dsc(LabelMask(a), LabelMask(b)) == pytest.approx(1.0, abs=1e-6)
        assert dsc(LabelMask(a), LabelMask(b), class_id=1) < 0.01

    def test_symmetry(self, rng):
        a = LabelMask((rng.random((9, 9)) > 0.5).astype(int))
        b = LabelMask((rng.random((9, 9)) > 0.5).astype(int))
        assert dsc(a, b) == dsc(b, a)


class TestIdentityAndSymmetrySuite:
    def test_symmetric_metrics(self, rng):
        a, b = rand_pair(rng)
        em_ab = error_metrics(a, b)
        em_ba = error_metrics(b, a)
        assert em_ab["mse"] == em_ba["mse"]
        assert em_ab["mae"] == em_ba["mae"]
        assert nmi(a, b) == pytest.approx(nmi(b, a), abs=1e-14)
        assert pcc(a, b) == pytest.approx(pcc(b, a), abs=1e-14)

    def test_mse_monotone_under_noise_ramp(self, small_phantoms):
        # 1000 seeded comparisons: more noise always means more MSE
        rng = np.random.default_rng(7)
        trials = 0
        while trials < 1000:
            p = small_phantoms[trials % len(small_phantoms)]
            lo = float(rng.uniform(1.0, 400.0))
            hi = lo * float(rng.uniform(1.5, 4.0))
            weak = ImageGrid(p.data + rng.normal(0, lo, p.shape))
            strong = ImageGrid(p.data + rng.normal(0, hi, p.shape))
            assert error_metrics(strong, p)["mse"] > error_metrics(weak, p)["mse"]
            trials += 1

    def test_ms_ssim_weights_sum_as_published(self):
        from mrimetrics.refmetrics import MS_SSIM_WEIGHTS

        assert sum(MS_SSIM_WEIGHTS) == pytest.approx(1.0001, abs=1e-12)


class TestMetricReport:
    def test_csv_row(self):
        row = MetricReport("ssim", 1.0, True, "pair", "zscore").to_csv_row()
        assert row == "ssim,1.0,higher,pair,zscore"

    def test_infinite_score(self):
        row = MetricReport("psnr", math.inf, True, "pair", "none").to_csv_row()
        assert row == "psnr,inf,higher,pair,none"
