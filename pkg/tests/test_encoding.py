import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import reference_encode

from pixelsnn.clusters import ClusterSample
from pixelsnn.encoding import (
    EncoderParams,
    SpikeRaster,
    encode_batch,
    encode_cluster,
    encode_pixel,
    encode_pixels,
    read_spike_dump,
    upsample,
    upsample_frames,
    write_spike_dump,
)
from pixelsnn.reduction import build_pattern, reduce_spikes

waveforms = st.lists(st.integers(0, 6000), min_size=0, max_size=40)


def _times(idx, t_res):
    return tuple(t_res * (j + 1) for j in idx)


class TestUpsample:
    def test_identity_at_native(self):
        x = [3.0, 900.0, 2400.0]
        np.testing.assert_array_equal(upsample(x, 200), x)

    def test_midpoint(self):
        out = upsample([0, 1000], 100)
        assert out[:3].tolist() == [0, 500, 1000]
        # tail slot holds the last value so the window still spans 2 * 200 ps
        assert out.tolist() == [0, 500, 1000, 1000]

    @given(st.lists(st.floats(0, 1e5), min_size=1, max_size=20))
    def test_alignment_at_50ps(self, x):
        out = upsample(x, 50)
        assert len(out) == 4 * len(x)
        np.testing.assert_allclose(out[::4], x)

    @pytest.mark.parametrize("res", [30, 7, 400, 0])
    def test_non_divisor_rejected(self, res):
        with pytest.raises(ValueError):
            upsample([1, 2], res)

    def test_frames_match_per_pixel(self):
        rng = np.random.default_rng(0)
        x = rng.uniform(0, 5000, (20, 3, 4))
        up = upsample_frames(x, 40)
        for r in range(3):
            for c in range(4):
                np.testing.assert_allclose(up[:, r, c], upsample(x[:, r, c], 40))


class TestEncodePixel:
    def test_sub_threshold_constant(self):
        p = encode_pixel([800] * 20)
        assert p.t_plus == () and p.t_minus == ()

    def test_empty_series(self):
        p = encode_pixel([])
        assert p.t_plus == () and p.t_minus == ()

    def test_step(self):
        p = encode_pixel([0, 0, 2000, 2000, 2000, 2000])
        assert p.t_plus == (600,)
        assert p.t_minus == ()

    @pytest.mark.parametrize("m", [1, 2, 5, 12])
    def test_ramp(self, m):
        x = [1000 + 400 * i for i in range(m)]
        p = encode_pixel(x)
        assert p.t_plus == tuple(200 * (j + 1) for j in range(1, m))
        assert p.t_minus == ()

    def test_peak_then_fall(self):
        # 1500 is still above x_th, so the drop to 900 is a second crossing
        p = encode_pixel([1200, 2000, 1500, 900])
        assert p.t_plus == (400,)
        assert p.t_minus == (600, 800)

    def test_onset_switch(self):
        x = [0, 0, 2000, 2000]
        assert encode_pixel(x, EncoderParams(onset=False)).t_plus == ()

    @settings(max_examples=300)
    @given(waveforms, st.booleans())
    def test_matches_reference(self, x, onset):
        rise, fall = reference_encode(x, 800, 400, onset)
        p = encode_pixel(x, EncoderParams(onset=onset))
        assert p.t_plus == _times(rise, 200)
        assert p.t_minus == _times(fall, 200)

    @settings(max_examples=300)
    @given(waveforms)
    def test_total_variation_bound(self, x):
        p = encode_pixel(x)
        tv = float(np.abs(np.diff(x)).sum()) if len(x) > 1 else 0.0
        assert len(p.t_plus) + len(p.t_minus) <= tv / 400 + 1

    @given(waveforms, st.sampled_from([10, 20, 40, 50, 100, 200]))
    def test_times_valid(self, x, t_res):
        x = upsample(x, t_res) if x else x
        p = encode_pixel(x, EncoderParams(t_res=t_res))
        window = len(x) * t_res
        for t in p.t_plus + p.t_minus:
            assert 0 < t <= window and t % t_res == 0

    @given(waveforms, st.integers(1, 50))
    def test_scale_invariance(self, x, c):
        base = encode_pixel(x)
        scaled = encode_pixel([c * v for v in x], EncoderParams(x_th=800 * c, delta_x=400 * c))
        assert base == scaled


def _frame(active=None, value=3000.0):
    charges = np.zeros((20, 13, 21), dtype=np.float32)
    if active is not None:
        r, c = active
        charges[3:, r, c] = value
        charges[2, r, c] = value / 2
    return ClusterSample(charges, 1.0)


class TestEncodeCluster:
    def test_native_has_20_steps(self):
        raster = encode_cluster(_frame((6, 10)), EncoderParams(), build_pattern("row_stride", 13, 21, 26))
        assert raster.n_timesteps == 20
        assert raster.n_channels == 52

    @pytest.mark.parametrize("t_res,steps", [(100, 40), (50, 80), (10, 400)])
    def test_steps_scale_with_resolution(self, t_res, steps):
        raster = encode_cluster(_frame(), EncoderParams(t_res=t_res), build_pattern("full", 13, 21))
        assert raster.n_timesteps == steps

    def test_all_zero(self):
        raster = encode_cluster(_frame(), EncoderParams(), build_pattern("row_stride", 13, 21, 13))
        assert not raster.spikes.any()

    def test_single_active_pixel(self):
        pattern = build_pattern("row_stride", 13, 21, 13)
        sample = _frame((4, 9))
        raster = encode_cluster(sample, EncoderParams(), pattern)
        g = pattern.assignment[4, 9]
        train = encode_pixel(sample.charges[:, 4, 9])
        assert [200 * (j + 1) for j in np.flatnonzero(raster.spikes[2 * g])] == list(train.t_plus)
        assert [200 * (j + 1) for j in np.flatnonzero(raster.spikes[2 * g + 1])] == list(train.t_minus)
        others = np.delete(raster.spikes, [2 * g, 2 * g + 1], axis=0)
        assert not others.any()

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            encode_cluster(_frame(), EncoderParams(), build_pattern("full", 5, 7))

    def test_compositional(self):
        rng = np.random.default_rng(3)
        charges = rng.uniform(0, 4000, (20, 13, 21)).astype(np.float32)
        sample = ClusterSample(charges, 1.0)
        pattern = build_pattern("box", 13, 21, 4, 8)
        per_pixel = encode_pixels(charges)
        assert encode_cluster(sample, EncoderParams(), pattern) == SpikeRaster(reduce_spikes(per_pixel, pattern))
        for r in range(13):
            for c in range(21):
                rise, fall = reference_encode(charges[:, r, c], 800, 400)
                assert np.flatnonzero(per_pixel[r, c, 0]).tolist() == rise
                assert np.flatnonzero(per_pixel[r, c, 1]).tolist() == fall

    def test_batch_stacks(self):
        pattern = build_pattern("row_stride", 13, 21, 13)
        samples = [_frame((1, 1)), _frame()]
        batch = encode_batch(samples, EncoderParams(), pattern)
        assert batch.shape == (2, 26, 20)
        assert batch[0].any() and not batch[1].any()


def test_spike_dump_round_trip(tmp_path):
    pattern = build_pattern("row_stride", 13, 21, 13)
    rasters = [encode_cluster(_frame(rc), EncoderParams(), pattern) for rc in [(2, 3), None, (12, 20)]]
    path = tmp_path / "spikes.csv"
    write_spike_dump(rasters, path)
    assert path.read_text().startswith("channel_index,time_ps\n")
    assert read_spike_dump(path) == [r.events() for r in rasters]
