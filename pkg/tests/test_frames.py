"""Frame ingestion, demosaic, downsample, white balance, ROI, directory IO."""

import numpy as np
import pytest

from rppgkit import (ArgumentError, CfaLayout, DataError, FormatError,
                     FrameSequence, RawBayerFrame, Roi, crop_roi,
                     demosaic_bilinear, downsample, gray_world_balance,
                     load_bayer_frames, load_sequence, remosaic, save_sequence)
from rppgkit.frames import load_frame_stack, read_meta, save_frame_stack, write_meta
from rppgkit.pnm import read_pnm, write_pnm


def checkerboard_rgb(h, w, a=(200, 40, 90), b=(10, 180, 60)):
    frame = np.empty((h, w, 3), dtype=np.uint8)
    ys, xs = np.indices((h, w))
    mask = (ys + xs) % 2 == 0
    frame[mask] = a
    frame[~mask] = b
    return frame


class TestPnm:
    def test_p6_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        frame = rng.integers(0, 256, (12, 10, 3), dtype=np.uint8)
        path = tmp_path / "f.ppm"
        write_pnm(path, frame)
        np.testing.assert_array_equal(read_pnm(path), frame)

    def test_p5_round_trip(self, tmp_path):
        rng = np.random.default_rng(1)
        frame = rng.integers(0, 256, (8, 14), dtype=np.uint8)
        path = tmp_path / "f.pgm"
        write_pnm(path, frame)
        np.testing.assert_array_equal(read_pnm(path), frame)

    def test_header_comments_tolerated(self, tmp_path):
        path = tmp_path / "c.pgm"
        body = bytes(range(6))
        path.write_bytes(b"P5\n# a comment\n3 2\n# another\n255\n" + body)
        arr = read_pnm(path)
        assert arr.shape == (2, 3)
        assert arr.tobytes() == body

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "x.ppm"
        path.write_bytes(b"P3\n2 2\n255\n" + bytes(12))
        with pytest.raises(FormatError):
            read_pnm(path)

    def test_truncated_payload_rejected(self, tmp_path):
        path = tmp_path / "t.ppm"
        path.write_bytes(b"P6\n2 2\n255\n" + bytes(5))
        with pytest.raises(FormatError):
            read_pnm(path)

    def test_nonstandard_maxval_rejected(self, tmp_path):
        path = tmp_path / "m.pgm"
        path.write_bytes(b"P5\n2 2\n65535\n" + bytes(8))
        with pytest.raises(FormatError):
            read_pnm(path)


class TestRoi:
    def test_parse_and_slices(self):
        roi = Roi.parse("2,3,4,5")
        assert roi == Roi(2, 3, 4, 5)
        assert roi.slices == (slice(3, 8), slice(2, 6))

    def test_fits(self):
        assert Roi(0, 0, 4, 4).fits(4, 4)
        assert not Roi(1, 0, 4, 4).fits(4, 4)
        with pytest.raises(ArgumentError):
            Roi(0, 1, 4, 4).require_fits(4, 4)

    @pytest.mark.parametrize("text", ["1,2,3", "a,b,c,d", "1,2,-3,4", "1,2,0,4"])
    def test_invalid_specs_rejected(self, text):
        with pytest.raises(ArgumentError):
            Roi.parse(text)

    def test_crop(self):
        frame = np.arange(4 * 6 * 3, dtype=np.uint8).reshape(4, 6, 3)
        out = crop_roi(frame, Roi(1, 2, 3, 2))
        np.testing.assert_array_equal(out, frame[2:4, 1:4])


class TestDemosaic:
    @pytest.mark.parametrize("layout", list(CfaLayout))
    def test_constant_field_exact(self, layout):
        raw = RawBayerFrame(np.full((6, 8), 77, dtype=np.uint8), layout)
        out = demosaic_bilinear(raw)
        assert out.shape == (6, 8, 3)
        np.testing.assert_array_equal(out, np.full((6, 8, 3), 77))

    @pytest.mark.parametrize("layout", list(CfaLayout))
    def test_sampled_sites_preserved(self, layout):
        rng = np.random.default_rng(3)
        seq = FrameSequence(rng.integers(0, 256, (1, 8, 8, 3), dtype=np.uint8), 25.0)
        mosaic = remosaic(seq, layout)[0]
        out = demosaic_bilinear(RawBayerFrame(mosaic, layout))
        from rppgkit.frames import _CFA_GRID
        grid = _CFA_GRID[layout]
        for dy in range(2):
            for dx in range(2):
                ch = grid[dy, dx]
                np.testing.assert_array_equal(out[dy::2, dx::2, ch],
                                              mosaic[dy::2, dx::2])

    def test_interior_interpolation_hand_case(self):
        # RGGB tile; green at (0,1): cross kernel averages the 4 green
        # neighbors of a checkerboard; red at (1,1) averages 4 diagonal reds
        mosaic = np.array([
            [10, 20, 30, 40],
            [50, 60, 70, 80],
            [90, 100, 110, 120],
            [130, 140, 150, 160],
        ], dtype=np.uint8)
        out = demosaic_bilinear(RawBayerFrame(mosaic, CfaLayout.RGGB))
        # (1,1) is a B site in RGGB; its R neighbors are the 4 diagonal R
        # sites 10, 30, 90, 110 -> mean 60
        assert out[1, 1, 0] == 60
        # its G neighbors are up/down/left/right: 20, 50, 70, 100 -> 60
        assert out[1, 1, 1] == 60
        assert out[1, 1, 2] == mosaic[1, 1]
        # (0,0) R site, corner: G from right 20 and below 50 -> 35
        assert out[0, 0, 1] == 35
        # corner B: single diagonal neighbor 60
        assert out[0, 0, 2] == 60

    def test_uniform_pulsatile_mosaic_round_trip(self):
        # full-frame single color: demosaic must reproduce it exactly
        for value in (0, 1, 128, 254, 255):
            rgb = np.full((1, 6, 6, 3), value, dtype=np.uint8)
            seq = FrameSequence(rgb, 25.0)
            mosaic = remosaic(seq, CfaLayout.GRBG)[0]
            out = demosaic_bilinear(RawBayerFrame(mosaic, CfaLayout.GRBG))
            np.testing.assert_array_equal(out, rgb[0])

    def test_odd_dimensions_rejected(self):
        with pytest.raises(ArgumentError):
            RawBayerFrame(np.zeros((5, 6), dtype=np.uint8), CfaLayout.RGGB)

    def test_unknown_layout_rejected(self):
        with pytest.raises(ArgumentError):
            CfaLayout.parse("xyzw")


class TestDownsample:
    def test_block_mean_exact(self):
        frame = np.zeros((6, 6, 3), dtype=np.uint8)
        frame[:3, :3] = 30
        frame[:3, 3:] = 60
        frame[3:, :3] = 90
        frame[3:, 3:] = 120
        out = downsample(frame, 3)
        assert out.shape == (2, 2, 3)
        np.testing.assert_array_equal(out[..., 0], [[30, 60], [90, 120]])

    def test_rounding_to_nearest(self):
        frame = np.array([[[0] * 3, [1] * 3], [[1] * 3, [1] * 3]], dtype=np.uint8)
        out = downsample(frame, 2)
        # mean 0.75 rounds to 1
        np.testing.assert_array_equal(out, [[[1, 1, 1]]])

    def test_trailing_rows_truncated(self):
        frame = np.zeros((7, 8, 3), dtype=np.uint8)
        frame[:6, :6] = 12
        frame[6:, :] = 255
        frame[:, 6:] = 255
        out = downsample(frame, 3)
        assert out.shape == (2, 2, 3)
        np.testing.assert_array_equal(out, np.full((2, 2, 3), 12))

    def test_factor_one_identity(self):
        rng = np.random.default_rng(4)
        frame = rng.integers(0, 256, (5, 7, 3), dtype=np.uint8)
        np.testing.assert_array_equal(downsample(frame, 1), frame)

    def test_bad_factor_rejected(self):
        frame = np.zeros((6, 6, 3), dtype=np.uint8)
        with pytest.raises(ArgumentError):
            downsample(frame, 0)
        with pytest.raises(ArgumentError):
            downsample(frame, 7)


class TestGrayWorld:
    def test_gains_equalize_channel_means(self):
        frame = np.zeros((4, 4, 3), dtype=np.uint8)
        frame[..., 0] = 120
        frame[..., 1] = 60
        frame[..., 2] = 30
        out = gray_world_balance(frame)
        grand = (120 + 60 + 30) / 3.0
        np.testing.assert_array_equal(out[..., 0], np.full((4, 4), round(120 * grand / 120)))
        np.testing.assert_array_equal(out[..., 1], np.full((4, 4), round(60 * grand / 60)))
        np.testing.assert_array_equal(out[..., 2], np.full((4, 4), round(30 * grand / 30)))

    def test_balanced_frame_unchanged(self):
        frame = np.full((3, 5, 3), 88, dtype=np.uint8)
        np.testing.assert_array_equal(gray_world_balance(frame), frame)

    def test_preserves_relative_structure(self):
        rng = np.random.default_rng(5)
        frame = rng.integers(20, 200, (6, 6, 3), dtype=np.uint8)
        out = gray_world_balance(frame).astype(np.float64)
        for c in range(3):
            base = frame[..., c].astype(np.float64)
            gain = out[..., c].sum() / base.sum()
            np.testing.assert_allclose(out[..., c], np.clip(np.rint(base * gain), 0, 255),
                                       atol=1.0)

    def test_zero_channel_rejected(self):
        frame = np.zeros((4, 4, 3), dtype=np.uint8)
        frame[..., 0] = 100
        with pytest.raises(DataError):
            gray_world_balance(frame)


class TestDirectoryIo:
    def test_rgb_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(6)
        frames = rng.integers(0, 256, (5, 6, 8, 3), dtype=np.uint8)
        seq = FrameSequence(frames, 25.0, source_id="unit")
        save_sequence(tmp_path / "d", seq)
        back = load_sequence(tmp_path / "d")
        np.testing.assert_array_equal(back.frames, frames)
        assert back.fps == 25.0
        assert back.source_id == "unit"

    def test_bayer_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(7)
        stack = rng.integers(0, 256, (3, 4, 6), dtype=np.uint8)
        save_frame_stack(tmp_path / "b", stack, 25.0, "bayer", cfa="gbrg")
        raw, meta = load_bayer_frames(tmp_path / "b")
        assert meta["cfa"] == "gbrg"
        assert len(raw) == 3
        for i, frame in enumerate(raw):
            np.testing.assert_array_equal(frame.samples, stack[i])
            assert frame.layout is CfaLayout.GBRG

    def test_lexical_order(self, tmp_path):
        d = tmp_path / "o"
        d.mkdir()
        for i, val in ((3, 30), (1, 10), (2, 20)):
            write_pnm(d / f"frame_{i:06d}.ppm", np.full((2, 2, 3), val, dtype=np.uint8))
        write_meta(d, 25.0, "rgb")
        stack, _ = load_frame_stack(d)
        assert [int(stack[k, 0, 0, 0]) for k in range(3)] == [10, 20, 30]

    def test_missing_meta_rejected(self, tmp_path):
        d = tmp_path / "nometa"
        d.mkdir()
        write_pnm(d / "frame_000001.ppm", np.zeros((2, 2, 3), dtype=np.uint8))
        with pytest.raises(FormatError, match="missing metadata"):
            load_frame_stack(d)

    def test_meta_validation(self, tmp_path):
        d = tmp_path / "m"
        d.mkdir()
        (d / "meta.json").write_text('{"fps": 25, "color": "bayer"}')
        with pytest.raises(FormatError, match="cfa"):
            read_meta(d)
        (d / "meta.json").write_text('{"fps": -1, "color": "rgb"}')
        with pytest.raises(FormatError, match="fps"):
            read_meta(d)
        (d / "meta.json").write_text('{"fps": 25, "color": "hsv"}')
        with pytest.raises(FormatError, match="color"):
            read_meta(d)

    def test_inconsistent_dimensions_rejected(self, tmp_path):
        d = tmp_path / "dim"
        d.mkdir()
        write_pnm(d / "frame_000001.ppm", np.zeros((2, 2, 3), dtype=np.uint8))
        write_pnm(d / "frame_000002.ppm", np.zeros((4, 4, 3), dtype=np.uint8))
        write_meta(d, 25.0, "rgb")
        with pytest.raises(FormatError, match="dimensions"):
            load_frame_stack(d)

    def test_color_layout_mismatch_rejected(self, tmp_path):
        d = tmp_path / "mm"
        d.mkdir()
        write_pnm(d / "frame_000001.pgm", np.zeros((2, 2), dtype=np.uint8))
        write_meta(d, 25.0, "rgb")
        with pytest.raises(FormatError):
            load_frame_stack(d)


class TestRemosaic:
    def test_layout_tiles(self):
        frame = np.zeros((1, 4, 4, 3), dtype=np.uint8)
        frame[..., 0] = 10
        frame[..., 1] = 20
        frame[..., 2] = 30
        seq = FrameSequence(frame, 25.0)
        m = remosaic(seq, CfaLayout.RGGB)[0]
        np.testing.assert_array_equal(m[0::2, 0::2], 10)
        np.testing.assert_array_equal(m[0::2, 1::2], 20)
        np.testing.assert_array_equal(m[1::2, 0::2], 20)
        np.testing.assert_array_equal(m[1::2, 1::2], 30)
        m = remosaic(seq, CfaLayout.BGGR)[0]
        np.testing.assert_array_equal(m[0::2, 0::2], 30)
        np.testing.assert_array_equal(m[1::2, 1::2], 10)

    def test_checkerboard_round_trip_interior(self):
        frame = checkerboard_rgb(8, 8)
        seq = FrameSequence(frame[None], 25.0)
        mosaic = remosaic(seq, CfaLayout.RGGB)[0]
        out = demosaic_bilinear(RawBayerFrame(mosaic, CfaLayout.RGGB))
        # sampled sites always exact regardless of scene content
        from rppgkit.frames import _CFA_GRID
        grid = _CFA_GRID[CfaLayout.RGGB]
        for dy in range(2):
            for dx in range(2):
                np.testing.assert_array_equal(
                    out[dy::2, dx::2, grid[dy, dx]], mosaic[dy::2, dx::2])
