import numpy as np
import pytest

import facefreq.features as features
from facefreq.features import (
    FeatureKind,
    SRM_KERNEL,
    dct2d,
    extract,
    extract_dct,
    extract_dft,
    extract_ela,
    extract_srm,
    extract_svd,
    idct2d,
    kind_from_params,
)
from facefreq.image_io import decode_image, encode_jpeg, to_grayscale

from conftest import random_gray, random_rgb
from oracles import center_shift_reference, dct2d_reference, dft2d_reference


class TestDct2d:
    def test_constant_block_is_dc_only(self):
        for n, c in [(4, 1.0), (8, 3.5), (5, 200.0)]:
            out = dct2d(np.full((n, n), c))
            assert abs(out[0, 0] - c * n) < 1e-9
            off_dc = out.copy()
            off_dc[0, 0] = 0.0
            assert np.abs(off_dc).max() < 1e-9

    def test_two_by_two_closed_form(self):
        # 2-point orthonormal basis rows are (1,1)/sqrt(2) and (1,-1)/sqrt(2)
        out = dct2d(np.array([[1.0, 2.0], [3.0, 4.0]]))
        assert np.allclose(out, [[5.0, -1.0], [-2.0, 0.0]], atol=1e-12)

    def test_roundtrip_random_blocks(self, rng):
        for _ in range(10):
            x = rng.random((8, 8)) * 255
            assert np.abs(idct2d(dct2d(x)) - x).max() < 1e-9

    def test_orthonormal_parseval(self, rng):
        for _ in range(10):
            h, w = int(rng.integers(1, 17)), int(rng.integers(1, 17))
            x = rng.random((h, w)) * 255
            assert abs(np.linalg.norm(x) - np.linalg.norm(dct2d(x))) < 1e-9

    def test_matches_definition_sum(self, rng):
        for h, w in [(1, 1), (2, 3), (5, 5), (8, 8), (7, 16), (16, 16)]:
            x = rng.random((h, w)) * 255
            assert np.abs(dct2d(x) - dct2d_reference(x)).max() < 1e-9


class TestExtractDct:
    def test_uniform_image_dc_only_tiles(self):
        img = np.full((40, 40), 77, np.uint8)
        out = extract_dct(img, FeatureKind("dct", dct_block=20))
        expected_dc = np.log1p(77.0 * 20)
        for i0 in (0, 20):
            for j0 in (0, 20):
                tile = out[i0 : i0 + 20, j0 : j0 + 20]
                assert abs(tile[0, 0] - expected_dc) < 1e-9
                rest = tile.copy()
                rest[0, 0] = 0.0
                assert np.abs(rest).max() < 1e-9

    def test_tiling_arithmetic_40x40_block20(self, rng):
        img = random_gray(rng, 40, 40)
        out = extract_dct(img, FeatureKind("dct", dct_block=20))
        assert out.shape == (40, 40)
        x = img.astype(np.float64)
        assert np.allclose(out[:20, :20], np.log1p(np.abs(dct2d(x[:20, :20]))))
        assert np.allclose(out[20:, 20:], np.log1p(np.abs(dct2d(x[20:, 20:]))))

    def test_edge_tiles_shrink(self, rng):
        img = random_gray(rng, 35, 45)
        out = extract_dct(img, FeatureKind("dct", dct_block=20))
        assert out.shape == (35, 45)
        x = img.astype(np.float64)
        assert np.allclose(out[20:35, 40:45], np.log1p(np.abs(dct2d(x[20:35, 40:45]))))

    def test_sinusoid_tile_concentrates_one_column(self):
        n = np.arange(8)
        tile = np.floor(128 + 100 * np.cos(2 * np.pi * n / 8) + 0.5).astype(np.uint8)
        img = np.tile(tile, (8, 1))
        out = extract_dct(img, FeatureKind("dct", dct_block=8))
        ref = np.log1p(np.abs(dct2d_reference(img.astype(np.float64))))
        assert np.abs(out - ref).max() < 1e-9
        column_energy = (np.expm1(out) ** 2).sum(axis=0)
        assert column_energy[2:].argmax() + 2 == 2  # one ac column dominates
        assert column_energy[2] > 10 * column_energy[3:].max()

    def test_whole_image_mode(self):
        img = np.full((12, 9), 10, np.uint8)
        out = extract_dct(img, FeatureKind("dct", dct_block=None))
        assert np.count_nonzero(out > 1e-9) == 1


class TestExtractSrm:
    def test_kernel_is_zero_sum(self):
        assert SRM_KERNEL.sum() == 0.0

    def test_constant_image_gives_zeros(self):
        assert np.abs(extract_srm(np.full((9, 11), 123, np.uint8))).max() == 0.0

    def test_impulse_footprint_exact(self):
        img = np.zeros((5, 5), np.uint8)
        img[2, 2] = 255
        out = extract_srm(img)
        expected = np.zeros((5, 5))
        expected[2, 2] = -1020.0
        expected[1, 2] = expected[3, 2] = expected[2, 1] = expected[2, 3] = 255.0
        assert np.array_equal(out, expected)

    def test_affine_ramp_interior_zero(self):
        m, n = np.mgrid[0:12, 0:10]
        img = (m + n).astype(np.uint8)
        out = extract_srm(img)
        assert np.abs(out[1:-1, 1:-1]).max() == 0.0


class TestExtractDft:
    def test_constant_image_single_center_peak(self):
        for n, c in [(8, 5), (6, 240)]:
            out = extract_dft(np.full((n, n), c, np.uint8))
            center = (n // 2, n // 2)
            assert abs(out[center] - np.log1p(float(c) * n * n)) < 1e-9
            rest = out.copy()
            rest[center] = 0.0
            assert np.abs(rest).max() < 1e-9

    def test_parseval(self, rng):
        for _ in range(10):
            img = random_gray(rng, 8, 8)
            mag = np.expm1(extract_dft(img))
            lhs = (mag**2).sum()
            rhs = 64.0 * (img.astype(np.float64) ** 2).sum()
            assert abs(lhs - rhs) / rhs < 1e-9

    def test_matches_definition_sum_with_shift(self, rng):
        for h, w in [(1, 1), (3, 2), (5, 5), (8, 8), (16, 7), (16, 16)]:
            img = random_gray(rng, h, w)
            ref = center_shift_reference(
                np.log1p(np.abs(dft2d_reference(img.astype(np.float64))))
            )
            assert np.abs(extract_dft(img) - ref).max() < 1e-7

    def test_stripes_symmetric_peaks(self):
        n = np.arange(16)
        row = np.floor(128 + 80 * np.cos(2 * np.pi * 4 * n / 16) + 0.5)
        img = np.tile(row, (16, 1)).astype(np.uint8)
        out = extract_dft(img)
        flat = np.argsort(out.ravel())[::-1]
        top3 = {tuple(divmod(int(i), 16)) for i in flat[:3]}
        assert top3 == {(8, 8), (8, 4), (8, 12)}  # dc and +-4th horizontal bins


class TestExtractEla:
    def test_zero_difference_when_codec_stubbed(self, monkeypatch, rng):
        img = random_gray(rng, 16, 16)
        monkeypatch.setattr(features, "encode_jpeg", lambda im, q: im.tobytes())
        monkeypatch.setattr(
            features,
            "decode_image",
            lambda data: np.repeat(
                np.frombuffer(data, np.uint8).reshape(16, 16)[:, :, None], 3, axis=2
            ),
        )
        out = extract_ela(img, 90)
        assert np.abs(out).max() == 0.0

    def test_uniform_image_small_residual(self):
        img = np.full((32, 32), 128, np.uint8)
        recompressed = decode_image(encode_jpeg(img, 90))[:, :, 0]
        raw = np.abs(recompressed.astype(int) - 128)
        assert raw.max() <= 2
        out = extract_ela(img, 90)
        assert out.min() >= 0.0 and out.max() <= 1.0

    def test_spliced_patch_stands_out(self, rng):
        h = w = 96
        yy, xx = np.mgrid[0:h, 0:w] / h
        base = 120 + 60 * np.sin(2 * np.pi * (1.3 * xx + 0.7 * yy)) + rng.normal(0, 3, (h, w))
        carrier = decode_image(encode_jpeg(np.clip(base, 0, 255).astype(np.uint8), 95))[:, :, 0]
        y0, x0, ph, pw = 30, 25, 28, 30
        patch = decode_image(encode_jpeg(carrier[y0 : y0 + ph, x0 : x0 + pw], 50))[:, :, 0]
        spliced = carrier.copy()
        spliced[y0 : y0 + ph, x0 : x0 + pw] = patch
        out = extract_ela(spliced, 95)
        mask = np.zeros((h, w), bool)
        mask[y0 : y0 + ph, x0 : x0 + pw] = True
        assert out[mask].mean() > out[~mask].mean()

    def test_invalid_quality(self):
        with pytest.raises(Exception):
            extract_ela(np.zeros((4, 4), np.uint8), 0)


class TestExtractSvd:
    def test_full_rank_reconstruction(self, rng):
        img = random_gray(rng, 12, 17)
        out = extract_svd(img, rank=50)
        assert np.abs(out - img / 255.0).max() < 1e-6

    def test_rank_one_outer_product(self, rng):
        a = rng.integers(1, 16, 12)
        b = rng.integers(1, 16, 9)
        img = np.outer(a, b).astype(np.uint8)
        out = extract_svd(img, rank=1)
        assert np.abs(out - img / 255.0).max() < 1e-6

    def test_frobenius_error_matches_singular_values(self, rng):
        img = random_gray(rng, 24, 24)
        x = img / 255.0
        singular = np.linalg.svd(x, compute_uv=False)
        for k in (1, 3, 10):
            err = np.linalg.norm(x - extract_svd(img, rank=k))
            assert abs(err - np.sqrt((singular[k:] ** 2).sum())) < 1e-6

    def test_error_monotone_in_rank(self, rng):
        img = random_gray(rng, 32, 32)
        x = img / 255.0
        errors = [np.linalg.norm(x - extract_svd(img, rank=k)) for k in range(1, 33)]
        assert np.all(np.diff(errors) <= 1e-9)

    def test_residual_mode(self, rng):
        img = random_gray(rng, 16, 16)
        recon = extract_svd(img, rank=4)
        resid = extract_svd(img, rank=4, residual=True)
        assert np.abs(recon + resid - img / 255.0).max() < 1e-9


class TestExtractDispatch:
    def test_rgb_stacks_planes(self):
        img = np.arange(12, dtype=np.uint8).reshape(2, 2, 3)
        out = extract(img, FeatureKind("rgb"))
        assert out.shape == (6, 2)
        assert np.array_equal(out[:2], img[:, :, 0] / 255.0)
        assert np.array_equal(out[2:4], img[:, :, 1] / 255.0)
        assert np.array_equal(out[4:], img[:, :, 2] / 255.0)

    def test_srm_on_rgb_equals_gray_path(self, rng):
        img = random_rgb(rng, 10, 10)
        assert np.array_equal(extract(img, FeatureKind("srm")), extract_srm(to_grayscale(img)))

    def test_dct_whole_uniform_single_value(self):
        img = np.full((8, 8, 3), 200, np.uint8)
        out = extract(img, FeatureKind("dct", dct_block=None))
        assert np.count_nonzero(out > 1e-9) == 1

    @pytest.mark.parametrize("tag", ["rgb", "dct", "srm", "dft", "ela", "svd"])
    def test_all_finite_on_random_images(self, tag, rng):
        for _ in range(3):
            img = random_rgb(rng, int(rng.integers(8, 40)), int(rng.integers(8, 40)))
            out = extract(img, FeatureKind(tag))
            assert np.all(np.isfinite(out))

    def test_kind_validation(self):
        with pytest.raises(ValueError):
            FeatureKind("wavelet")
        with pytest.raises(ValueError):
            FeatureKind("dct", dct_block=0)
        with pytest.raises(ValueError):
            FeatureKind("svd", svd_rank=0)

    def test_kind_from_params_whole(self):
        kind = kind_from_params("dct", dct_block="whole")
        assert kind.dct_block is None
        with pytest.raises(ValueError):
            kind_from_params("dct", dct_block="big")
