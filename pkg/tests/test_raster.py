"""Exchange format and raster core: byte layout, error offsets, PNG I/O."""

import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rtwsynth.errors import (
    BadChannelCount,
    BadMagic,
    DimensionOverflow,
    IoFailure,
    NonFiniteSample,
    TruncatedFile,
    WrongChannelCount,
)
from rtwsynth.raster import (
    HEADER_SIZE,
    MAGIC,
    Box,
    Raster,
    boxes_from_json,
    boxes_to_json,
    clamp_box,
    load_boxes,
    load_map,
    load_mask_png,
    load_png,
    normalize_depth,
    save_map,
    save_mask_png,
    save_png,
)


def _blob(width, height, channels, samples=None):
    header = MAGIC + struct.pack("<III", width, height, channels)
    if samples is None:
        samples = np.zeros(width * height * channels, dtype="<f4")
    return header + np.asarray(samples, dtype="<f4").tobytes()


class TestMapFormat:
    def test_header_is_twenty_bytes(self):
        assert HEADER_SIZE == 20

    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(7)
        r = Raster(rng.random((5, 9, 3)).astype(np.float32))
        p = tmp_path / "m.rtwmap"
        save_map(r, p)
        assert load_map(p) == r

    def test_one_by_one_single_channel(self, tmp_path):
        p = tmp_path / "m.rtwmap"
        save_map(Raster(np.array([[0.25]], dtype=np.float32)), p)
        r = load_map(p)
        assert (r.width, r.height, r.channels) == (1, 1, 1)
        assert float(r.plane()[0, 0]) == 0.25

    def test_bad_magic_offset_zero(self, tmp_path):
        p = tmp_path / "m.rtwmap"
        p.write_bytes(b"NOTAMAP\x00" + _blob(2, 2, 1)[8:])
        with pytest.raises(BadMagic) as e:
            load_map(p)
        assert e.value.offset == 0

    def test_width_overflow_offset(self, tmp_path):
        p = tmp_path / "m.rtwmap"
        p.write_bytes(MAGIC + struct.pack("<III", 65536, 2, 1))
        with pytest.raises(DimensionOverflow) as e:
            load_map(p)
        assert e.value.offset == 8

    def test_zero_height_offset(self, tmp_path):
        p = tmp_path / "m.rtwmap"
        p.write_bytes(MAGIC + struct.pack("<III", 2, 0, 1))
        with pytest.raises(DimensionOverflow) as e:
            load_map(p)
        assert e.value.offset == 12

    def test_two_channels_rejected_at_offset_16(self, tmp_path):
        p = tmp_path / "m.rtwmap"
        p.write_bytes(_blob(2, 2, 2, np.zeros(8)))
        with pytest.raises(BadChannelCount) as e:
            load_map(p)
        assert e.value.offset == 16

    def test_truncated_body(self, tmp_path):
        p = tmp_path / "m.rtwmap"
        p.write_bytes(_blob(3, 3, 1)[:-4])
        with pytest.raises(TruncatedFile):
            load_map(p)

    def test_trailing_garbage_rejected(self, tmp_path):
        p = tmp_path / "m.rtwmap"
        p.write_bytes(_blob(3, 3, 1) + b"\x00\x00\x00\x00")
        with pytest.raises(TruncatedFile):
            load_map(p)

    def test_nan_sample_reports_byte_offset(self, tmp_path):
        samples = np.zeros(12, dtype="<f4")
        samples[5] = np.nan
        p = tmp_path / "m.rtwmap"
        p.write_bytes(_blob(4, 3, 1, samples))
        with pytest.raises(NonFiniteSample) as e:
            load_map(p)
        assert e.value.offset == HEADER_SIZE + 4 * 5

    def test_inf_sample_rejected(self, tmp_path):
        samples = np.zeros(4, dtype="<f4")
        samples[0] = np.inf
        p = tmp_path / "m.rtwmap"
        p.write_bytes(_blob(2, 2, 1, samples))
        with pytest.raises(NonFiniteSample) as e:
            load_map(p)
        assert e.value.offset == HEADER_SIZE

    def test_missing_file(self, tmp_path):
        with pytest.raises(IoFailure):
            load_map(tmp_path / "nope.rtwmap")

    @settings(max_examples=30, deadline=None)
    @given(
        w=st.integers(1, 8),
        h=st.integers(1, 8),
        c=st.sampled_from([1, 3, 4]),
        seed=st.integers(0, 2**32 - 1),
    )
    def test_round_trip_property(self, tmp_path_factory, w, h, c, seed):
        rng = np.random.default_rng(seed)
        # exercise subnormals and negatives as well as the unit range
        vals = rng.normal(0.0, 10.0, (h, w, c)).astype(np.float32)
        r = Raster(vals)
        p = tmp_path_factory.mktemp("maps") / "m.rtwmap"
        save_map(r, p)
        assert load_map(p) == r


class TestRasterType:
    def test_pixels_read_only(self):
        r = Raster(np.zeros((2, 2, 1), dtype=np.float32))
        with pytest.raises(ValueError):
            r.pixels[0, 0, 0] = 1.0

    def test_two_channel_rejected(self):
        with pytest.raises(WrongChannelCount):
            Raster(np.zeros((2, 2, 2), dtype=np.float32))

    def test_2d_promoted_to_single_channel(self):
        r = Raster(np.zeros((3, 4), dtype=np.float32))
        assert r.channels == 1 and r.width == 4 and r.height == 3

    def test_eq_is_bitwise(self):
        a = Raster(np.array([[0.0]], dtype=np.float32))
        b = Raster(np.array([[-0.0]], dtype=np.float32))
        assert a != b  # sign bit differs even though 0.0 == -0.0


class TestNormalizeDepth:
    def test_affine_rescale(self):
        d = Raster(np.array([[1.0, 2.0], [3.0, 5.0]], dtype=np.float32))
        n = normalize_depth(d).plane()
        assert n.min() == 0.0 and n.max() == 1.0
        assert np.allclose(n, (d.plane() - 1.0) / 4.0)

    def test_constant_maps_to_half(self):
        d = Raster(np.full((4, 4, 1), 7.25, dtype=np.float32))
        assert np.all(normalize_depth(d).plane() == 0.5)

    def test_three_channel_rejected(self):
        with pytest.raises(WrongChannelCount):
            normalize_depth(Raster(np.zeros((2, 2, 3), dtype=np.float32)))

    @settings(max_examples=40, deadline=None)
    @given(
        seed=st.integers(0, 2**32 - 1),
        scale=st.floats(0.1, 100.0),
        shift=st.floats(-50.0, 50.0),
    )
    def test_affine_input_invariance(self, seed, scale, shift):
        rng = np.random.default_rng(seed)
        base = rng.random((5, 5)).astype(np.float32)
        base[0, 0], base[-1, -1] = 0.0, 1.0  # pin the range
        a = normalize_depth(Raster(base))
        b = normalize_depth(
            Raster((base.astype(np.float64) * scale + shift).astype(np.float32))
        )
        # the float32 input quantizes at ulp(|shift| + |scale|); normalizing
        # divides that by the value range, which is exactly `scale` here
        eps = float(np.finfo(np.float32).eps)
        tol = max(1e-6, 8.0 * eps * (abs(shift) + abs(scale)) / abs(scale))
        assert np.allclose(a.plane(), b.plane(), atol=tol)

    def test_idempotent(self):
        rng = np.random.default_rng(3)
        d = Raster(rng.random((6, 6)).astype(np.float32) * 9.0)
        once = normalize_depth(d)
        twice = normalize_depth(once)
        assert np.allclose(once.plane(), twice.plane(), atol=1e-7)


class TestPng:
    def test_color_round_trip_exact_on_255_grid(self, tmp_path):
        rng = np.random.default_rng(5)
        q = rng.integers(0, 256, (7, 9, 3)).astype(np.float32) / np.float32(255.0)
        p = tmp_path / "im.png"
        save_png(Raster(q), p)
        back = load_png(p)
        assert np.array_equal(back.pixels, q.astype(np.float32))

    def test_mask_16bit_round_trip(self, tmp_path):
        m = np.array([[0, 1], [40000, 65535]], dtype=np.uint16)
        p = tmp_path / "m.png"
        save_mask_png(m, p)
        assert np.array_equal(load_mask_png(p), m)

    def test_mask_overflow_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            save_mask_png(np.array([[70000]], dtype=np.int64), tmp_path / "m.png")

    def test_load_png_missing(self, tmp_path):
        with pytest.raises(IoFailure):
            load_png(tmp_path / "nope.png")


class TestBoxes:
    def test_kind_checked(self):
        with pytest.raises(ValueError):
            Box("logo", [[0, 0], [1, 0], [1, 1], [0, 1]])

    def test_vertex_order_normalized(self):
        cw = [[0.0, 0.0], [0.0, 2.0], [2.0, 2.0], [2.0, 0.0]]
        b = Box("face", cw)
        q = b.quad
        area2 = float(
            np.sum(q[:, 0] * np.roll(q[:, 1], -1) - np.roll(q[:, 0], -1) * q[:, 1])
        )
        assert area2 > 0

    def test_clamp_box(self):
        b = Box("existing-text", [[-5.0, -5.0], [30.0, -5.0], [30.0, 30.0], [-5.0, 30.0]])
        c = clamp_box(b, 20, 25)
        assert c.quad[:, 0].min() >= 0 and c.quad[:, 0].max() <= 20
        assert c.quad[:, 1].min() >= 0 and c.quad[:, 1].max() <= 25

    def test_json_round_trip(self):
        boxes = [
            Box("existing-text", [[1.5, 2.0], [8.0, 2.0], [8.0, 4.0], [1.5, 4.0]]),
            Box("face", [[0.0, 0.0], [3.0, 0.0], [3.0, 3.0], [0.0, 3.0]]),
        ]
        back = boxes_from_json(boxes_to_json(boxes))
        assert [b.kind for b in back] == ["existing-text", "face"]
        for a, b in zip(boxes, back):
            assert np.allclose(a.quad, b.quad)

    def test_load_boxes_bad_json(self, tmp_path):
        p = tmp_path / "b.boxes.json"
        p.write_text("{not json", encoding="utf-8")
        with pytest.raises(Exception):
            load_boxes(p)
