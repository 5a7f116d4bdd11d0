import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pixelsnn.clusters import (
    ClusterFormatError,
    ClusterSample,
    DatasetManifest,
    SyntheticConfig,
    balance_classes,
    generate_synthetic,
    label,
    load_dataset,
    load_manifest,
    save_dataset,
    split_by_files,
    write_synthetic_files,
)


def _sample(p_t, shape=(20, 13, 21), seed=0):
    rng = np.random.default_rng(seed)
    return ClusterSample(rng.integers(0, 5000, shape).astype(np.float32), p_t, 0.25, 1)


def _manifest(n):
    return DatasetManifest(tuple(f"f{i}.csv" for i in range(n)), (10,) * n)


class TestLoadSave:
    def test_empty_file(self, tmp_path):
        p = tmp_path / "empty.csv"
        save_dataset([], p)
        assert load_dataset(p) == []

    def test_round_trip_two_rows(self, tmp_path):
        p = tmp_path / "two.csv"
        samples = [_sample(0.731, seed=1), ClusterSample(np.full((20, 13, 21), 801.5, np.float32), 3.25, -0.9, -1)]
        save_dataset(samples, p)
        back = load_dataset(p)
        assert len(back) == 2
        for a, b in zip(samples, back):
            assert a == b
            assert (a.p_t, a.y0, a.charge_sign) == (b.p_t, b.y0, b.charge_sign)

    def test_short_row_is_parse_error_with_line_number(self, tmp_path):
        p = tmp_path / "bad.csv"
        fields = ["1.0", "0.0", "1"] + ["0"] * (13 * 21 * 20 - 1)
        p.write_text("# shape=13x21x20 t_res_ps=200\n" + ",".join(fields) + "\n")
        with pytest.raises(ClusterFormatError, match=r":2:"):
            load_dataset(p)

    def test_negative_charge_rejected(self, tmp_path):
        p = tmp_path / "neg.csv"
        fields = ["1.0", "0.0", "1"] + ["0"] * (2 * 2 * 2 - 1) + ["-3"]
        p.write_text("# shape=2x2x2\n\n" + ",".join(fields) + "\n")
        with pytest.raises(ClusterFormatError, match=r":3:.*non-negative"):
            load_dataset(p)

    def test_missing_header(self, tmp_path):
        p = tmp_path / "nohead.csv"
        p.write_text("1.0,0.0,1,0\n")
        with pytest.raises(ClusterFormatError, match="header"):
            load_dataset(p)

    @settings(max_examples=25, deadline=None)
    @given(
        st.lists(
            st.tuples(
                st.floats(1e-3, 100, allow_nan=False),
                st.floats(-1, 1, allow_nan=False),
                st.sampled_from([1, -1]),
                st.lists(st.floats(0, 1e6, width=32, allow_nan=False, allow_infinity=False), min_size=12, max_size=12),
            ),
            max_size=4,
        )
    )
    def test_round_trip_property(self, tmp_path_factory, rows):
        p = tmp_path_factory.mktemp("rt") / "x.csv"
        samples = [ClusterSample(np.array(ch, np.float32).reshape(3, 2, 2), pt, y0, s) for pt, y0, s, ch in rows]
        save_dataset(samples, p, shape=(2, 2, 3))
        assert load_dataset(p) == samples


class TestLabel:
    @pytest.mark.parametrize("pt,expected", [(1.0, 1), (0.2, 0), (0.5, 0)])
    def test_examples(self, pt, expected):
        assert label(_sample(pt), 0.5) == expected

    @given(st.floats(0.01, 50), st.floats(0.01, 50), st.floats(0.05, 5))
    def test_monotone(self, a, b, cut):
        lo, hi = sorted((a, b))
        s_lo = ClusterSample(np.zeros((1, 1, 1)), lo)
        s_hi = ClusterSample(np.zeros((1, 1, 1)), hi)
        assert label(s_lo, cut) <= label(s_hi, cut)


class TestSplit:
    def test_160_files(self):
        train, test = split_by_files(_manifest(160), 0.2, seed=4)
        assert (len(train), len(test)) == (128, 32)

    def test_two_files(self):
        train, test = split_by_files(_manifest(2), 0.5, seed=0)
        assert (len(train), len(test)) == (1, 1)

    def test_deterministic(self):
        assert split_by_files(_manifest(17), 0.3, 9) == split_by_files(_manifest(17), 0.3, 9)

    def test_needs_two_files(self):
        with pytest.raises(ValueError):
            split_by_files(_manifest(1), 0.5, 0)

    @given(st.integers(2, 60), st.floats(0.01, 0.99), st.integers(0, 2**31))
    def test_partition(self, n, frac, seed):
        m = _manifest(n)
        train, test = split_by_files(m, frac, seed)
        assert set(train.file_paths) | set(test.file_paths) == set(m.file_paths)
        assert not set(train.file_paths) & set(test.file_paths)
        assert len(test) >= 1 and len(train) >= 1


class TestBalance:
    @staticmethod
    def _pop(n_low, n_high):
        z = np.zeros((1, 1, 1))
        return [ClusterSample(z, 0.3) for _ in range(n_low)] + [ClusterSample(z, 1.0 + i) for i in range(n_high)]

    def test_downsample_majority(self):
        out = balance_classes(self._pop(90, 10), 0.5, seed=0)
        assert sum(s.p_t > 0.5 for s in out) == 10
        assert sum(s.p_t <= 0.5 for s in out) == 10

    def test_already_balanced_unchanged(self):
        pop = self._pop(50, 50)
        out = balance_classes(pop, 0.5, seed=3)
        assert sorted(id(s) for s in out) == sorted(id(s) for s in pop)

    def test_seeds_may_differ_but_counts_hold(self):
        rng = np.random.default_rng(0)
        z = np.zeros((1, 1, 1))
        pop = [ClusterSample(z, float(p)) for p in rng.uniform(0.2, 0.49, 1000)] + self._pop(0, 100)
        a = balance_classes(pop, 0.5, seed=1)
        b = balance_classes(pop, 0.5, seed=2)
        for out in (a, b):
            assert sum(s.p_t > 0.5 for s in out) == 100
            assert sum(s.p_t <= 0.5 for s in out) == 100
        assert {id(s) for s in a} != {id(s) for s in b}

    def test_missing_class(self):
        with pytest.raises(ValueError):
            balance_classes(self._pop(5, 0), 0.5, 0)

    @given(st.integers(1, 40), st.integers(1, 40), st.integers(0, 1000))
    def test_sub_multiset(self, n_low, n_high, seed):
        pop = self._pop(n_low, n_high)
        out = balance_classes(pop, 0.5, seed)
        ids = [id(s) for s in out]
        assert len(set(ids)) == len(ids)
        assert set(ids) <= {id(s) for s in pop}
        assert sum(s.p_t > 0.5 for s in out) == sum(s.p_t <= 0.5 for s in out) == min(n_low, n_high)


class TestSynthetic:
    def test_single_sample_shape(self):
        (s,) = generate_synthetic(1, seed=0)
        assert s.charges.shape == (20, 13, 21)
        assert s.frame_shape == (13, 21, 20)
        assert s.charge_sign == 1 and -1 < s.y0 < 1

    def test_zero_disallowed(self):
        with pytest.raises(ValueError):
            generate_synthetic(0, seed=0)

    def test_bad_config(self):
        with pytest.raises(ValueError):
            generate_synthetic(1, 0, SyntheticConfig(pt_min=-1.0))

    def test_low_pt_fraction(self):
        pts = np.array([s.p_t for s in generate_synthetic(10000, seed=5)])
        assert np.mean(pts < 2.0) >= 0.8
        assert pts.min() >= 0.15 and np.quantile(pts, 0.05) < 0.2

    def test_bit_identical(self):
        assert generate_synthetic(20, seed=8) == generate_synthetic(20, seed=8)

    def test_track_length_anticorrelated_with_pt(self):
        samples = generate_synthetic(600, seed=1)
        pts = np.array([s.p_t for s in samples])
        rows_hit = np.array([np.count_nonzero(s.charges[-1].max(axis=1) > 800) for s in samples])
        # Spearman-style check on ranks
        r = np.corrcoef(np.argsort(np.argsort(pts)), np.argsort(np.argsort(rows_hit)))[0, 1]
        assert r < -0.7

    def test_charge_builds_up_over_slices(self):
        s = generate_synthetic(1, seed=2)[0]
        total = s.charges.sum(axis=(1, 2))
        assert total[0] < total[5] and total[5] > 0

    def test_files_and_manifest(self, tmp_path):
        m = write_synthetic_files(tmp_path, 30, 3, seed=0)
        back = load_manifest(tmp_path / "manifest.txt")
        assert back.samples_per_file == (10, 10, 10)
        assert back.frame_shape == (13, 21, 20)
        assert [load_dataset(f)[0] for f in back.file_paths] == [load_dataset(f)[0] for f in m.file_paths]
