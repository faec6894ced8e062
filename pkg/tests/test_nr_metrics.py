import numpy as np
import pytest

import oracles
from mrimetrics.errors import DegenerateInputError, MetricsError
from mrimetrics.grid import ImageGrid
from mrimetrics.normalize import binning, zscore
from mrimetrics.nrmetrics import (
    blur_effect,
    blur_ratio_mean_blur,
    blurred_edge_widths,
    cpbd,
    jnb,
    mlc,
    mslc,
    mtv,
    variance_of_laplacian,
)


def checkerboard(n=64, amplitude=100.0):
    yy, xx = np.mgrid[0:n, 0:n]
    return ImageGrid(amplitude * ((yy + xx) % 2).astype(float))


def step_image(n=64, height=255.0):
    data = np.zeros((n, n))
    data[:, n // 2 :] = height
    return ImageGrid(data)


class TestBlurEffect:
    def test_sharp_checkerboard_near_zero(self):
        assert blur_effect(checkerboard()) < 0.2

    def test_constant_image_error(self):
        with pytest.raises(DegenerateInputError):
            blur_effect(ImageGrid(np.full((32, 32), 5.0)))

    def test_blur_increases_score(self, small_phantoms):
        from mrimetrics.distort import DistortionSpec, apply

        for p in small_phantoms[:3]:
            weak = blur_effect(apply(p, DistortionSpec("gaussian_blur", 1.0, seed=0)))
            strong = blur_effect(apply(p, DistortionSpec("gaussian_blur", 5.0, seed=0)))
            assert strong > weak

    def test_range_bounds(self, small_phantoms):
        for p in small_phantoms[:3]:
            assert 0.0 <= blur_effect(p) <= 1.0


class TestBlurRatioMeanBlur:
    def test_constant_image_error(self):
        with pytest.raises(DegenerateInputError):
            blur_ratio_mean_blur(ImageGrid(np.full((16, 16), 3.0)))

    def test_hard_step_has_zero_blur_ratio(self):
        out = blur_ratio_mean_blur(step_image())
        assert out["br"] == 0.0
        assert out["mb"] == 0.0

    def test_normalization_divergence_under_stripes(self, small_phantoms):
        # the blur-ratio / mean-blur statistics shift substantially between
        # binning and zscore scaling of the same striped image
        from mrimetrics.distort import DistortionSpec, apply

        def fold_ratio(a, b):
            if a == b:
                return 1.0
            lo = min(a, b)
            return max(a, b) / lo if lo > 0 else float("inf")

        ratios = []
        for p in small_phantoms:
            striped = apply(p, DistortionSpec("stripe_artifact", 5.0, seed=2))
            out_bin = blur_ratio_mean_blur(binning(striped, 256))
            out_z = blur_ratio_mean_blur(zscore(striped))
            ratios.append(
                max(
                    fold_ratio(out_bin["br"], out_z["br"]),
                    fold_ratio(out_bin["mb"], out_z["mb"]),
                )
            )
        assert float(np.median(ratios)) > 2.0

    def test_deterministic(self, phantom):
        a = blur_ratio_mean_blur(phantom)
        b = blur_ratio_mean_blur(phantom)
        assert a == b


class TestVarianceOfLaplacian:
    def test_constant_zero(self):
        assert variance_of_laplacian(ImageGrid(np.full((16, 16), 9.0))) == 0.0

    def test_single_bright_pixel_closed_form(self):
        n = 33
        v = 10.0
        data = np.zeros((n, n))
        data[n // 2, n // 2] = v
        # stencil response: -4v at the pixel, +v at its four neighbors
        expected_mean = 0.0
        expected_var = (16.0 * v * v + 4.0 * v * v) / (n * n) - expected_mean**2
        assert variance_of_laplacian(ImageGrid(data)) == pytest.approx(expected_var, rel=1e-12)

    def test_matches_naive_oracle(self, rng):
        for _ in range(5):
            img = rng.uniform(0, 50, (12, 12))
            assert variance_of_laplacian(ImageGrid(img)) == pytest.approx(
                oracles.vl_naive(img), rel=1e-9
            )

    def test_blur_decreases_score(self, small_phantoms):
        from mrimetrics.distort import DistortionSpec, apply

        for p in small_phantoms[:3]:
            weak = variance_of_laplacian(apply(p, DistortionSpec("gaussian_blur", 1.0, seed=0)))
            strong = variance_of_laplacian(apply(p, DistortionSpec("gaussian_blur", 5.0, seed=0)))
            assert strong < weak


class TestBlurredEdgeWidths:
    def test_ideal_step_width_one_per_side(self):
        assert blurred_edge_widths(step_image()) == pytest.approx(2.0)

    def test_no_edges_error(self):
        # a pure linear ramp has no gradient maxima, hence no edges
        ramp = ImageGrid(np.tile(np.arange(32.0), (32, 1)))
        with pytest.raises(DegenerateInputError):
            blurred_edge_widths(ramp)
        with pytest.raises(DegenerateInputError):
            blurred_edge_widths(ImageGrid(np.full((32, 32), 5.0)))

    def test_blur_widens_edges(self, small_phantoms):
        from mrimetrics.distort import DistortionSpec, apply

        for p in small_phantoms[:3]:
            weak = blurred_edge_widths(apply(p, DistortionSpec("gaussian_blur", 1.0, seed=0)))
            strong = blurred_edge_widths(apply(p, DistortionSpec("gaussian_blur", 5.0, seed=0)))
            assert strong > weak

    def test_stable_under_mild_noise(self, small_phantoms):
        from mrimetrics.distort import DistortionSpec, apply

        devs = []
        for p in small_phantoms:
            base = blurred_edge_widths(binning(p, 256))
            for s in (1.0, 2.0):
                noisy = apply(p, DistortionSpec("gaussian_noise", s, seed=3))
                devs.append(abs(blurred_edge_widths(binning(noisy, 256)) - base) / base)
        assert float(np.median(devs)) <= 0.15


class TestJnb:
    def test_contrast_threshold_boundary(self):
        # contrast exactly 50/255 of the range keeps the wider width of 5
        from mrimetrics.nrmetrics import jnb_width

        assert jnb_width(50.0, 255.0) == 5.0
        assert jnb_width(50.0 + 1e-9, 255.0) == 3.0
        assert jnb_width(50.0 / 255.0 * 8000.0, 8000.0) == 5.0

    def test_unit_ratio_single_block(self):
        # one processed block whose every edge pixel has width == jnb width
        # contributes (sum(1^beta))^(1/beta) = count^(1/beta)
        data = np.zeros((64, 64))
        data[:, 32:] = 255.0
        img = ImageGrid(data)
        score = jnb(img, data_range=255.0)
        # ideal step edges have width 2, jnb width 3 here
        n_edges = 64
        expected = (n_edges * (2.0 / 3.0) ** 3.6) ** (1 / 3.6)
        assert score == pytest.approx(expected, rel=1e-6)

    def test_no_blocks_error(self):
        with pytest.raises(DegenerateInputError):
            jnb(ImageGrid(np.full((64, 64), 2.0)), data_range=255.0)

    def test_blur_increases_score(self, small_phantoms):
        from mrimetrics.distort import DistortionSpec, apply

        for p in small_phantoms[:3]:
            weak = jnb(binning(apply(p, DistortionSpec("gaussian_blur", 1.0, seed=0)), 256))
            strong = jnb(binning(apply(p, DistortionSpec("gaussian_blur", 5.0, seed=0)), 256))
            assert strong > weak


class TestCpbd:
    def test_width_equal_jnb_scores_zero(self):
        # P_blur = 1 - exp(-1) = 0.632 > 0.63 when W == jnb, so nothing counts
        data = np.zeros((64, 64))
        data[:, 32:] = 255.0
        img = ImageGrid(data)
        # widths are 2 and jnb is 3 -> P_blur = 1-exp(-(2/3)^3.6) = 0.21 <= 0.63
        assert cpbd(img, data_range=255.0) == 1.0

    def test_boundary_probability_rule(self):
        beta = 3.6
        p_at_unit_ratio = 1.0 - np.exp(-1.0)
        assert p_at_unit_ratio > 0.63  # the <= 0.63 gate excludes W == jnb

    def test_all_narrow_widths_score_one(self, rng):
        img = step_image(height=200.0)
        assert cpbd(img, data_range=200.0) == 1.0

    def test_no_edges_error(self):
        with pytest.raises(DegenerateInputError):
            cpbd(ImageGrid(np.full((64, 64), 1.0)), data_range=255.0)

    def test_blur_decreases_score(self, small_phantoms):
        from mrimetrics.distort import DistortionSpec, apply

        for p in small_phantoms[:3]:
            sharp = cpbd(binning(p, 256))
            blurred = cpbd(binning(apply(p, DistortionSpec("gaussian_blur", 3.0, seed=0)), 256))
            assert blurred < sharp


class TestLineCorrelations:
    def test_vertical_gradient_yields_one(self):
        # rows are constant (skipped); all columns identical -> correlation 1
        data = np.tile(np.arange(32.0).reshape(32, 1), (1, 32))
        assert mlc(ImageGrid(data)) == 1.0

    def test_reference_phantom_band(self, small_phantoms):
        values = [mlc(p) for p in small_phantoms]
        assert 0.85 <= float(np.median(values)) < 1.0

    def test_affine_invariance(self, phantom):
        scaled = ImageGrid(3.0 * phantom.data + 17.0)
        assert mlc(scaled) == pytest.approx(mlc(phantom), abs=1e-12)
        assert mslc(scaled) == pytest.approx(mslc(phantom), abs=1e-12)

    def test_stripes_raise_mslc(self, small_phantoms):
        from mrimetrics.distort import DistortionSpec, apply

        for p in small_phantoms[:3]:
            weak = mslc(apply(p, DistortionSpec("stripe_artifact", 1.0, seed=1)))
            strong = mslc(apply(p, DistortionSpec("stripe_artifact", 5.0, seed=1)))
            assert strong > weak

    def test_too_small_image(self):
        with pytest.raises(MetricsError):
            mlc(ImageGrid(np.zeros((1, 5))))

    def test_constant_image_error(self):
        with pytest.raises(DegenerateInputError):
            mlc(ImageGrid(np.full((8, 8), 2.0)))


class TestMtv:
    def test_constant_zero(self):
        assert mtv(ImageGrid(np.full((8, 8), 3.0))) == 0.0

    def test_two_pixel_example(self):
        # gradients: 3 at the first pixel, zero-padded at the last
        assert mtv(ImageGrid(np.array([[0.0], [3.0]]))) == pytest.approx(1.5)
        assert mtv(ImageGrid(np.array([[0.0, 3.0]]))) == pytest.approx(1.5)

    def test_noise_increases_score(self, phantom, rng):
        noisy = ImageGrid(phantom.data + rng.normal(0, 500, phantom.shape))
        assert mtv(noisy) > mtv(phantom)

    def test_linear_scaling(self, rng):
        img = ImageGrid(rng.uniform(0, 50, (10, 10)))
        assert mtv(ImageGrid(4.0 * img.data)) == pytest.approx(4.0 * mtv(img), rel=1e-12)

    def test_matches_naive_oracle(self, rng):
        for _ in range(5):
            data = rng.uniform(0, 20, (7, 9))
            assert mtv(ImageGrid(data)) == pytest.approx(oracles.mtv_naive(data), rel=1e-12)
