import numpy as np
import pytest

from mrimetrics.errors import MetricsError
from mrimetrics.grid import ImageGrid, compute_stats
from mrimetrics.normalize import (
    NormalizationSpec,
    PLModel,
    apply_normalization,
    binning,
    cminmax,
    minmax,
    pl_apply,
    pl_fit,
    quantile_norm,
    zscore,
)


def grid(values):
    return ImageGrid(np.atleast_2d(np.asarray(values, dtype=float)))


class TestMinmax:
    def test_default_targets(self):
        out = minmax(grid([0.0, 5.0, 10.0]))
        assert list(out.data[0]) == [0.0, 0.5, 1.0]

    def test_constant_maps_to_j1(self):
        out = minmax(grid([4.0, 4.0, 4.0]), j1=-1.0, j2=1.0)
        assert np.all(out.data == -1.0)

    def test_symmetric_target(self):
        out = minmax(grid(np.arange(256.0)), j1=-1.0, j2=1.0)
        assert out.data.ravel()[0] == -1.0
        assert out.data.ravel()[-1] == 1.0

    def test_idempotent_exact(self, rng):
        img = ImageGrid(rng.uniform(-30, 90, (12, 12)))
        once = minmax(img)
        twice = minmax(once)
        assert np.array_equal(once.data, twice.data)

    def test_bad_target(self):
        with pytest.raises(MetricsError):
            minmax(grid([1.0, 2.0]), j1=1.0, j2=1.0)


class TestCMinmax:
    def test_no_clipping_equals_minmax(self, rng):
        img = ImageGrid(rng.uniform(0, 50, (10, 10)))
        assert np.array_equal(cminmax(img, p=0.0, q=100.0).data, minmax(img).data)

    def test_ramp_clips_lower_tail(self):
        # 100-pixel ramp 1..100 with p=5: percentile(5) = 5, so 1..5 all hit j1
        img = ImageGrid(np.arange(1.0, 101.0).reshape(10, 10))
        out = cminmax(img, p=5.0)
        assert np.all(out.data.ravel()[:5] == 0.0)
        assert out.data.ravel()[5] > 0.0
        assert np.all(out.data.ravel()[95:] == 1.0)

    def test_near_constant_maps_to_j1(self):
        values = np.full(100, 3.0)
        values[0] = -10.0
        values[-1] = 50.0
        out = cminmax(ImageGrid(values.reshape(10, 10)), p=5.0)
        assert np.all(out.data == 0.0)

    def test_default_q_complement(self, rng):
        img = ImageGrid(rng.uniform(0, 50, (10, 10)))
        assert np.array_equal(cminmax(img, p=5.0).data, cminmax(img, p=5.0, q=95.0).data)


class TestZscore:
    def test_two_pixels(self):
        out = zscore(grid([1.0, 3.0]))
        assert list(out.data[0]) == [-1.0, 1.0]

    def test_constant_all_zeros(self):
        out = zscore(grid([5.0, 5.0, 5.0]))
        assert np.all(out.data == 0.0)

    def test_output_moments(self, rng):
        img = ImageGrid(rng.uniform(100, 900, (20, 20)))
        out = zscore(img)
        assert abs(float(out.data.mean())) < 1e-12 * float(img.data.std())
        assert abs(float(out.data.std()) - 1.0) < 1e-12

    def test_idempotent(self, rng):
        img = ImageGrid(rng.normal(40, 9, (15, 15)))
        once = zscore(img)
        twice = zscore(once)
        assert np.max(np.abs(once.data - twice.data)) < 1e-12


class TestQuantile:
    def test_zero_median(self, rng):
        img = ImageGrid(rng.uniform(0, 10, (11, 11)))
        out = quantile_norm(img)
        assert compute_stats(out).percentile(50.0) == 0.0

    def test_unit_iqr_on_ramp(self):
        img = ImageGrid(np.arange(0.0, 101.0).reshape(101, 1))
        out = quantile_norm(img)
        stats = compute_stats(out)
        assert abs((stats.percentile(75.0) - stats.percentile(25.0)) - 1.0) < 1e-12

    def test_zero_iqr_falls_back_to_shift(self):
        values = np.full(100, 2.0)
        values[:10] = np.arange(10.0) * 100.0
        img = ImageGrid(values.reshape(10, 10))
        out = quantile_norm(img)
        assert np.array_equal(out.data, img.data - 2.0)


class TestBinning:
    def test_identity_ramp(self):
        img = ImageGrid(np.arange(256.0).reshape(16, 16))
        out = binning(img, 256)
        assert np.array_equal(out.data, img.data)

    def test_max_pixel_clamped(self, rng):
        img = ImageGrid(rng.uniform(0, 1, (8, 8)))
        out = binning(img, 16)
        assert out.data.ravel()[np.argmax(img.data)] == 15.0

    def test_values_are_integers_in_range(self, rng):
        out = binning(ImageGrid(rng.normal(0, 5, (9, 9))), 32)
        assert np.all(out.data == np.round(out.data))
        assert out.data.min() >= 0.0 and out.data.max() <= 31.0

    def test_affine_invariance(self, rng):
        for _ in range(20):
            img = ImageGrid(rng.uniform(-5, 5, (10, 10)))
            a = float(rng.uniform(0.1, 10.0))
            b = float(rng.uniform(-100, 100))
            scaled = ImageGrid(a * img.data + b)
            assert np.array_equal(binning(img, 64).data, binning(scaled, 64).data)

    def test_constant_all_zeros(self):
        assert np.all(binning(grid([3.0, 3.0]), 256).data == 0.0)

    def test_too_few_bins(self):
        with pytest.raises(MetricsError):
            binning(grid([1.0, 2.0]), 1)


class TestOrderPreservation:
    @pytest.mark.parametrize(
        "method",
        [
            lambda img: minmax(img),
            lambda img: cminmax(img, p=5.0),
            zscore,
            quantile_norm,
            lambda img: binning(img, 64),
        ],
    )
    def test_monotone(self, method, rng):
        img = ImageGrid(rng.uniform(0, 100, (12, 12)))
        out = method(img)
        order = np.argsort(img.data, axis=None, kind="stable")
        transformed = out.data.ravel()[order]
        assert np.all(np.diff(transformed) >= 0.0)


class TestPL:
    def make_training(self, n=4):
        return [__import__("mrimetrics").make_phantom(600 + i) for i in range(n)]

    def test_fit_needs_two_images(self, phantom):
        with pytest.raises(MetricsError):
            pl_fit([phantom])

    def test_fit_landmarks_ordered(self):
        model = pl_fit(self.make_training())
        assert model.s1 < model.m_s < model.s2

    def test_apply_maps_own_mode_to_standard_mode(self):
        imgs = self.make_training()
        model = pl_fit(imgs)
        from mrimetrics.normalize import _foreground_mode

        img = imgs[0]
        out = pl_apply(img, model)
        mode_in = _foreground_mode(img)
        # the input mode maps exactly onto the standard mode landmark
        idx = np.unravel_index(np.argmin(np.abs(img.data - mode_in)), img.shape)
        mapped = out.data[idx]
        bin_width = (model.s2 - model.s1) / 256.0
        assert abs(mapped - model.m_s) <= bin_width

    def test_two_piece_continuity_and_clamp(self):
        imgs = self.make_training()
        model = pl_fit(imgs)
        out = pl_apply(imgs[1], model)
        assert out.data.min() >= model.s1 - 1e-9
        assert out.data.max() <= model.s2 + 1e-9

    def test_monotone_on_ramp(self):
        model = PLModel(s1=0.0, m_s=30.0, s2=100.0, p_low=1.0, p_high=99.0)
        ramp = ImageGrid(np.linspace(0.0, 1000.0, 400).reshape(20, 20))
        out = pl_apply(ramp, model)
        assert np.all(np.diff(out.data.ravel()) >= 0.0)

    def test_json_round_trip(self, tmp_path):
        model = pl_fit(self.make_training())
        path = tmp_path / "pl.json"
        model.save(path)
        back = PLModel.load(path)
        assert back == model

    def test_invalid_landmarks_rejected(self):
        with pytest.raises(MetricsError):
            PLModel(s1=1.0, m_s=0.5, s2=2.0, p_low=1.0, p_high=99.0)


class TestSpecDispatch:
    def test_parse_and_apply(self, rng, tmp_path):
        img = ImageGrid(rng.uniform(0, 10, (8, 8)))
        for name in ("none", "minmax", "cminmax", "zscore", "quantile", "binning"):
            spec = NormalizationSpec.parse(name)
            out = apply_normalization(img, spec)
            assert out.shape == img.shape

    def test_pl_needs_model(self):
        with pytest.raises(MetricsError):
            NormalizationSpec(method="pl")

    def test_unknown_method(self):
        with pytest.raises(MetricsError):
            NormalizationSpec(method="whitestripe")
