import numpy as np
import pytest

from embedding import (DataEmbedding, TemporalEmbedding, TimestampError, load_static_embeddings, normalized_laplacian,
                       read_adjacency, spectral_embedding)
from tensor import Tape, Tensor, ops
from utils.errors import ConfigError, DataFormatError


class TestStaticEmbeddings:
    def test_csv_passthrough(self, tmp_path):
        values = np.arange(6, dtype=np.float64).reshape(3, 2) / 4.0
        path = tmp_path / "static.csv"
        np.savetxt(path, values, delimiter=",")
        loaded = load_static_embeddings(path, num_nodes=3, dim=2)
        np.testing.assert_allclose(loaded.data, values)
        assert not loaded.requires_grad

    def test_csv_shape_mismatch(self, tmp_path):
        path = tmp_path / "static.csv"
        np.savetxt(path, np.ones((3, 2)), delimiter=",")
        with pytest.raises(DataFormatError, match="expected 4 rows x 2 columns"):
            load_static_embeddings(path, num_nodes=4, dim=2)

    def test_two_node_path_graph(self, tmp_path):
        path = tmp_path / "adj.csv"
        path.write_text("0,1\n")
        edges = read_adjacency(path, 2)
        np.testing.assert_array_equal(edges, [[0, 1, 1]])
        static = load_static_embeddings(None, num_nodes=2, dim=1, adjacency_path=path)
        np.testing.assert_allclose(np.abs(static.data[:, 0]), [0.70711, 0.70711], atol=1e-4)
        assert static.data[0, 0] > 0 > static.data[1, 0]

    def test_laplacian_rows(self):
        lap = normalized_laplacian(np.array([[0, 1, 1.0], [1, 2, 1.0]]), 4)
        np.testing.assert_allclose(np.diag(lap), 1.0)
        # isolated node 3 has no off-diagonal entries
        np.testing.assert_array_equal(lap[3, :3], 0.0)
        np.testing.assert_allclose(lap, lap.T)

    def test_spectral_padding(self):
        emb = spectral_embedding(np.array([[0, 1, 1.0]]), 2, 3)
        assert emb.shape == (2, 3)
        np.testing.assert_array_equal(emb[:, 1:], 0.0)

    def test_bad_node_id(self, tmp_path):
        path = tmp_path / "adj.csv"
        path.write_text("0,5\n")
        with pytest.raises(DataFormatError):
            read_adjacency(path, 3)

    def test_nothing_available(self, tmp_path):
        with pytest.raises(ConfigError):
            load_static_embeddings(tmp_path / "missing.csv", 3, 2, adjacency_path=tmp_path / "missing_adj.csv")


class TestDataEmbedding:
    def test_hand_oracle(self, rng):
        layer = DataEmbedding(num_nodes=2, dim=3, interval_minutes=720, rng=rng,
                              static=Tensor(np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])))
        layer.proj_weight.data[:] = [[1.0, 2.0, 3.0]]
        layer.proj_bias.data[:] = [0.5, 0.5, 0.5]
        layer.spatial.dynamic.data[:] = 0.25
        layer.temporal.day_table.data[:] = [[0.0, 0.0, 0.0], [10.0, 10.0, 10.0]]
        layer.temporal.week_table.data[:] = np.arange(7)[:, None] * 100.0

        x = Tensor(np.array([[[1.0, -1.0], [2.0, 0.0]]]))
        out = layer(x, minute_slot=np.array([[0, 1]]), weekday=np.array([[6, 0]]))
        assert out.shape == (1, 2, 2, 3)
        # node 1, step 0: 2*[1,2,3] + 0.5 + [0,1,0] + 0.25 + day slot 0 + Sunday
        np.testing.assert_allclose(out.data[0, 1, 0], [2.75 + 600, 5.75 + 600, 6.75 + 600])
        # node 0, step 1: -[1,2,3] + 0.5 + [1,0,0] + 0.25 + day slot 1 + Monday
        np.testing.assert_allclose(out.data[0, 0, 1], [10.75, 8.75, 7.75])

    def test_static_is_frozen(self, rng):
        layer = DataEmbedding(num_nodes=3, dim=2, interval_minutes=60, rng=rng,
                              static=Tensor(np.ones((3, 2)), requires_grad=True))
        names = [name for name, _ in layer.named_parameters()]
        assert "spatial.static" not in names
        assert "spatial.dynamic" in names

        with Tape() as tape:
            out = layer(Tensor(np.ones((1, 3, 4))), np.zeros((1, 4), dtype=int), np.zeros((1, 4), dtype=int))
            loss = ops.sum(out)
        tape.backward(loss)
        assert layer.spatial.static.grad is None
        np.testing.assert_allclose(layer.spatial.dynamic.grad, 4.0)

    def test_repeated_slots_accumulate(self, rng):
        layer = TemporalEmbedding(dim=2, interval_minutes=60, rng=rng)
        with Tape() as tape:
            loss = ops.sum(layer(np.array([[5, 5, 5]]), np.array([[2, 2, 3]])))
        tape.backward(loss)
        np.testing.assert_allclose(layer.day_table.grad[5], 3.0)
        np.testing.assert_allclose(layer.week_table.grad[2], 2.0)
        np.testing.assert_allclose(layer.week_table.grad[0], 0.0)

    def test_timestamp_range(self, rng):
        layer = TemporalEmbedding(dim=2, interval_minutes=15, rng=rng)
        with pytest.raises(TimestampError):
            layer(np.array([[96]]), np.array([[0]]))
        with pytest.raises(TimestampError):
            layer(np.array([[0]]), np.array([[7]]))

    def test_timestamp_shape(self, rng):
        layer = DataEmbedding(num_nodes=2, dim=2, interval_minutes=15, rng=rng)
        with pytest.raises(TimestampError):
            layer(Tensor(np.zeros((1, 2, 3))), np.zeros((1, 2), dtype=int), np.zeros((1, 2), dtype=int))
