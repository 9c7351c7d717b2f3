import numpy as np
import pytest

from data import (Normalizer, Split, TrafficDataset, WindowSet, aggregate, ingest, read_region_labels, region_graph,
                  split_and_normalize, split_sizes, synth, windows, write_csv, write_hstd1, write_region_labels)
from data.dataset import HEADER_SIZE
from data.synth import DEFAULT_START_EPOCH
from utils.errors import ConfigError, DataError, DataFormatError


def make_split(length, nodes=2, segments=None):
    raw = np.arange(nodes * length, dtype=np.float64).reshape(nodes, length)
    return Split(role="train", raw=raw, values=raw / 10.0, minute_slot=np.arange(length) % 96,
                 weekday=np.zeros(length, dtype=np.int64), segments=segments or [(0, length)])


class TestIngest:
    def test_hstd1_round_trip(self, small_dataset, tmp_path):
        path = write_hstd1(small_dataset, tmp_path / "d.hstd1")
        assert path.stat().st_size == HEADER_SIZE + 4 * 8 * 384
        loaded = ingest(path)
        np.testing.assert_array_equal(loaded.series, small_dataset.series)
        assert (loaded.start_epoch, loaded.interval_minutes) == (DEFAULT_START_EPOCH, 15)

    def test_truncated_payload(self, small_dataset, tmp_path):
        path = write_hstd1(small_dataset, tmp_path / "d.hstd1")
        expected = path.stat().st_size
        path.write_bytes(path.read_bytes()[:-6])
        with pytest.raises(DataFormatError, match=f"truncated payload: expected {expected} bytes, got {expected - 6}"):
            ingest(path)

    def test_trailing_bytes(self, small_dataset, tmp_path):
        path = write_hstd1(small_dataset, tmp_path / "d.hstd1")
        path.write_bytes(path.read_bytes() + b"\x00" * 4)
        with pytest.raises(DataFormatError, match="trailing bytes"):
            ingest(path)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "d.hstd1"
        path.write_bytes(b"HSTD2" + bytes(40))
        with pytest.raises(DataFormatError, match="magic"):
            ingest(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            ingest(tmp_path / "nothing.hstd1")

    def test_csv_round_trip(self, small_dataset, tmp_path):
        loaded = ingest(write_csv(small_dataset, tmp_path / "d.csv"))
        np.testing.assert_allclose(loaded.series, small_dataset.series, rtol=1e-6)
        assert loaded.start_epoch == small_dataset.start_epoch
        assert loaded.interval_minutes == 15

    def test_csv_iso_timestamps(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("timestamp,node_0,node_1\n"
                        "2024-01-01T00:00:00Z,1,2\n"
                        "2024-01-01T00:05:00Z,3,4\n"
                        "2024-01-01T00:10:00Z,5,6\n")
        loaded = ingest(path)
        np.testing.assert_array_equal(loaded.series, [[1, 3, 5], [2, 4, 6]])
        assert loaded.interval_minutes == 5
        assert loaded.start_epoch == DEFAULT_START_EPOCH

    def test_csv_non_monotone(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("timestamp,node_0\n0,1\n1800,2\n900,3\n")
        with pytest.raises(DataFormatError, match="non-monotone"):
            ingest(path)

    def test_csv_irregular_grid(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("timestamp,node_0\n0,1\n900,2\n2700,3\n")
        with pytest.raises(DataFormatError, match="fixed"):
            ingest(path)

    def test_time_features(self):
        ds = TrafficDataset(np.zeros((1, 100)), DEFAULT_START_EPOCH, 15)
        slot, weekday = ds.time_features()
        assert (slot[0], weekday[0]) == (0, 0)
        assert (slot[95], weekday[95]) == (95, 0)
        assert (slot[97], weekday[97]) == (1, 1)

    def test_interval_must_divide_day(self):
        with pytest.raises(DataError):
            TrafficDataset(np.zeros((1, 4)), 0, 7)


class TestAggregate:
    def test_group_mean(self):
        ds = TrafficDataset(np.array([[1.0, 2.0, 3.0]] * 3), 0, 5)
        out = aggregate(ds, 3)
        np.testing.assert_array_equal(out.series, [[2.0]] * 3)
        assert out.interval_minutes == 15

    def test_drops_partial_group(self, caplog):
        ds = TrafficDataset(np.arange(8, dtype=float).reshape(1, 8), 0, 5)
        out = aggregate(ds, 3)
        np.testing.assert_array_equal(out.series, [[1.0, 4.0]])
        assert "Dropping 2 trailing steps" in caplog.text

    def test_ingest_with_factor(self, small_dataset, tmp_path):
        loaded = ingest(write_hstd1(small_dataset, tmp_path / "d.hstd1"), aggregate_factor=4)
        assert (loaded.num_steps, loaded.interval_minutes) == (96, 60)


class TestSplits:
    def test_sizes(self):
        assert split_sizes(100, (0.6, 0.2, 0.2)) == (60, 20, 20)
        assert split_sizes(10, (0.7, 0.1, 0.2)) == (7, 1, 2)

    def test_boundaries_and_train_statistics(self):
        ds = TrafficDataset(np.arange(10, dtype=float).reshape(1, 10), DEFAULT_START_EPOCH, 15)
        data = split_and_normalize(ds)
        assert [len(data[r]) for r in ("train", "val", "test")] == [6, 2, 2]
        np.testing.assert_array_equal(data.val.raw, [[6.0, 7.0]])
        assert data.normalizer.mean.item() == pytest.approx(2.5)
        assert data.normalizer.std.item() == pytest.approx(np.sqrt(35 / 12))
        np.testing.assert_allclose(data.test.values, (np.array([[8.0, 9.0]]) - 2.5) / np.sqrt(35 / 12))
        np.testing.assert_array_equal(data.test.minute_slot, [8, 9])

    def test_per_node_statistics(self):
        series = np.vstack([np.arange(10.0), 100.0 + 2 * np.arange(10.0)])
        data = split_and_normalize(TrafficDataset(series, 0, 15), per_node=True)
        np.testing.assert_allclose(data.normalizer.mean.ravel(), [2.5, 105.0])
        np.testing.assert_allclose(data.train.values.mean(axis=1), 0.0, atol=1e-12)

    def test_constant_series(self):
        data = split_and_normalize(TrafficDataset(np.full((2, 20), 7.0), 0, 15))
        assert data.normalizer.std.item() > 0
        np.testing.assert_array_equal(data.val.values, 0.0)
        np.testing.assert_allclose(data.normalizer.denormalize(data.val.values), 7.0)

    def test_empty_split(self):
        with pytest.raises(DataError, match="empty val split"):
            split_and_normalize(TrafficDataset(np.zeros((1, 20)), 0, 15), ratios=(1.0, 0.0, 0.0))

    @pytest.mark.parametrize("ratios", [(0.5, 0.5, 0.5), (0.5, 0.5), (1.2, -0.1, -0.1)])
    def test_bad_ratios(self, ratios):
        with pytest.raises(ConfigError):
            split_and_normalize(TrafficDataset(np.zeros((1, 20)), 0, 15), ratios=ratios)

    def test_seasonal(self):
        data = split_and_normalize(TrafficDataset(np.arange(40.0).reshape(1, 40), 0, 15), seasonal=True)
        assert data.train.segments == [(0, 6), (6, 12), (12, 18), (18, 24)]
        np.testing.assert_array_equal(data.val.raw, [[6, 7, 16, 17, 26, 27, 36, 37]])

    def test_normalizer_inverse(self, rng):
        values = rng.normal(50, 10, (3, 30))
        norm = Normalizer.fit(values, per_node=True)
        np.testing.assert_allclose(norm.denormalize(norm.normalize(values)), values)


class TestWindows:
    def test_count(self):
        assert len(windows(make_split(25), 12, 12)) == 2
        assert len(windows(make_split(24), 12, 12)) == 1

    def test_stride(self):
        ws = windows(make_split(27), 12, 12, stride=2)
        assert ws.offsets.tolist() == [0, 2]

    def test_too_short(self):
        with pytest.raises(DataError, match="too short"):
            windows(make_split(23), 12, 12)

    def test_segments_are_not_crossed(self, caplog):
        ws = windows(make_split(40, segments=[(0, 20), (20, 25), (25, 40)]), 3, 2)
        assert ws.offsets.tolist() == list(range(0, 16)) + list(range(20, 21)) + list(range(25, 36))
        ws = windows(make_split(40, segments=[(0, 20), (20, 23), (23, 40)]), 3, 2)
        assert 20 not in ws.offsets
        assert "shorter than one window" in caplog.text

    def test_sample_layout(self):
        split = make_split(30)
        sample = WindowSet(split, 4, 3)[5]
        assert sample.size == 1
        np.testing.assert_array_equal(sample.x[0], split.values[:, 5:9])
        np.testing.assert_array_equal(sample.y[0], split.raw[:, 9:12])
        np.testing.assert_array_equal(sample.minute_slot[0], [5, 6, 7, 8])

    def test_target_is_later_input(self, small_splits):
        ws = windows(small_splits.train, 12, 12)
        first, later = ws[0], ws[12]
        np.testing.assert_allclose(small_splits.normalizer.denormalize(later.x[0]), first.y[0], rtol=1e-6)

    def test_batches_cover_everything(self, rng):
        ws = windows(make_split(40), 4, 2)
        seen = np.concatenate([b.x[:, 0, 0] for b in ws.batches(8, rng=rng)])
        assert sorted(seen.tolist()) == sorted((ws.offsets / 10.0).tolist())
        sizes = [b.size for b in ws.batches(8)]
        assert sizes == [8, 8, 8, 8, 3]


class TestSynth:
    def test_no_noise_single_region(self):
        ds = synth(num_nodes=5, num_steps=200, num_regions=1, seed=0, sigma=0.0)
        np.testing.assert_array_equal(ds.series, np.broadcast_to(ds.series[0], ds.series.shape))
        assert np.all(ds.series > 0)

    def test_deterministic(self):
        a = synth(6, 100, 2, seed=4)
        b = synth(6, 100, 2, seed=4)
        c = synth(6, 100, 2, seed=5)
        np.testing.assert_array_equal(a.series, b.series)
        np.testing.assert_array_equal(a.regions, b.regions)
        assert not np.array_equal(a.series, c.series)

    def test_region_labels_balanced(self):
        ds = synth(10, 50, 3, seed=1)
        assert sorted(np.bincount(ds.regions).tolist()) == [3, 3, 4]

    def test_invalid_region_count(self):
        with pytest.raises(ConfigError):
            synth(4, 10, 0, seed=0)
        with pytest.raises(ConfigError):
            synth(4, 10, 5, seed=0)

    def test_regions_correlate_inside(self):
        ds = synth(16, 384, 4, seed=2, sigma=0.3)
        corr = np.corrcoef(ds.series)
        same = ds.regions[:, None] == ds.regions[None, :]
        off_diagonal = ~np.eye(16, dtype=bool)
        within = corr[same & off_diagonal].mean()
        between = corr[~same].mean()
        assert within - between > 0.2

    def test_daily_period(self):
        ds = synth(3, 96 * 14, 2, seed=0, sigma=0.1)
        x = ds.series[0].astype(np.float64)
        x = x - x.mean()
        lags = np.arange(48, 193)
        acf = np.array([np.dot(x[:-k], x[k:]) for k in lags]) / np.dot(x, x)
        assert abs(lags[np.argmax(acf)] - 96) <= 1

    def test_region_graph(self):
        edges = region_graph(np.array([0, 0, 1, 1, 1]))
        pairs = {tuple(sorted(e)) for e in edges[:, :2].astype(int).tolist()}
        assert pairs == {(0, 1), (2, 3), (3, 4), (2, 4), (0, 2)}
        np.testing.assert_array_equal(edges[:, 2], 1.0)

    def test_label_file_round_trip(self, tmp_path):
        labels = np.array([2, 0, 1, 1])
        np.testing.assert_array_equal(read_region_labels(write_region_labels(labels, tmp_path / "r.csv")), labels)
