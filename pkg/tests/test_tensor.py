import numpy as np
import pytest

from tensor import (Linear, Module, PrecisionError, ShapeError, Tape, Tensor, default_dtype, gradcheck,
                    load_checkpoint, ops, parameter, save_checkpoint)
from utils.errors import DataFormatError


def leaf(rng, *shape):
    return Tensor(rng.uniform(-2.0, 2.0, size=shape), requires_grad=True)


class TestMatmul:
    def test_identity(self):
        out = ops.matmul(Tensor([[1.0, 0.0], [0.0, 1.0]]), Tensor([[3.0, 4.0], [5.0, 6.0]]))
        np.testing.assert_array_equal(out.data, [[3, 4], [5, 6]])

    def test_hand_arithmetic(self):
        out = Tensor([[1.0, 2.0]]) @ Tensor([[3.0], [4.0]])
        assert out.data.tolist() == [[11.0]]

    def test_gradients_match_finite_differences(self, rng, float64):
        a, b = leaf(rng, 3, 4), leaf(rng, 4, 2)
        report = gradcheck(lambda: ops.sum(ops.matmul(a, b)), [a, b])
        assert report.max_error < 1e-6

    def test_mismatch_names_both_shapes(self):
        with pytest.raises(ShapeError, match=r"\(2, 3\).*\(4, 2\)"):
            ops.matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((4, 2))))

    def test_batch_axes_broadcast(self, rng, float64):
        a, b = leaf(rng, 2, 3, 4), leaf(rng, 4, 5)
        assert ops.matmul(a, b).shape == (2, 3, 5)
        assert gradcheck(lambda: ops.sum(ops.matmul(a, b)), [a, b]).max_error < 1e-6


class TestSoftmax:
    def test_uniform(self):
        np.testing.assert_allclose(ops.softmax(Tensor([0.0, 0.0, 0.0])).data, [1 / 3] * 3, atol=1e-7)

    def test_singleton_axis_is_one(self):
        np.testing.assert_array_equal(ops.softmax(Tensor(np.array([[3.0], [-7.0]])), axis=-1).data, [[1.0], [1.0]])

    def test_known_values(self):
        np.testing.assert_allclose(ops.softmax(Tensor([1.0, 2.0, 3.0])).data, [0.09003, 0.24473, 0.66524],
                                   atol=1e-4)

    def test_sums_to_one_for_large_inputs(self, rng):
        x = Tensor(rng.normal(0, 50, size=(10, 7)))
        np.testing.assert_allclose(ops.softmax(x, axis=-1).data.sum(axis=-1), 1.0, atol=1e-6)

    def test_random_rows_sum_to_one(self, rng):
        for _ in range(100):
            x = Tensor(rng.normal(0, rng.uniform(0.1, 30.0), size=(rng.integers(1, 6), rng.integers(1, 9))))
            out = ops.softmax(x, axis=-1).data
            assert np.all(out >= 0.0)
            np.testing.assert_allclose(out.sum(axis=-1), 1.0, atol=1e-5)

    def test_gradient(self, rng, float64):
        x = leaf(rng, 3, 4)
        w = Tensor(rng.standard_normal((3, 4)))
        assert gradcheck(lambda: ops.sum(ops.softmax(x, axis=0) * w), [x]).max_error < 1e-5


class TestGatedFuse:
    def test_zero_tanh_branch(self, rng):
        out = ops.gated_fuse(Tensor(np.zeros(5)), Tensor(rng.standard_normal(5)))
        np.testing.assert_array_equal(out.data, 0.0)

    def test_saturated_gate(self, rng, float64):
        a = rng.uniform(-2, 2, 6)
        np.testing.assert_allclose(ops.gated_fuse(Tensor(a), Tensor(np.full(6, 20.0))).data, np.tanh(a), atol=1e-8)

    def test_scalar_value(self):
        assert ops.gated_fuse(Tensor([1.0]), Tensor([0.0])).item() == pytest.approx(0.38080, abs=1e-4)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            ops.gated_fuse(Tensor(np.zeros(3)), Tensor(np.zeros(4)))


class TestLayerNorm:
    def test_constant_vector(self):
        out = ops.layernorm(Tensor(np.full(4, 3.0)), -1, Tensor(np.ones(4)), Tensor(np.zeros(4)))
        np.testing.assert_array_equal(out.data, 0.0)

    def test_population_variance(self):
        out = ops.layernorm(Tensor([1.0, 3.0]), -1, Tensor(np.ones(2)), Tensor(np.zeros(2)))
        np.testing.assert_allclose(out.data, [-1.0, 1.0], atol=1e-4)

    def test_gradcheck(self, rng, float64):
        x = leaf(rng, 2, 5)
        gamma, beta = leaf(rng, 5), leaf(rng, 5)
        w = Tensor(rng.standard_normal((2, 5)))
        report = gradcheck(lambda: ops.sum(ops.layernorm(x, -1, gamma, beta) * w), [x, gamma, beta])
        assert report.max_error < 1e-5

    def test_other_axis(self, rng, float64):
        x = leaf(rng, 3, 4)
        w = Tensor(rng.standard_normal((3, 4)))
        out = ops.layernorm(x, 0)
        np.testing.assert_allclose(out.data.mean(axis=0), 0.0, atol=1e-12)
        assert gradcheck(lambda: ops.sum(ops.layernorm(x, 0) * w), [x]).max_error < 1e-5


class TestPrimitiveGradients:
    """Central differences at 64-bit on inputs in [-2, 2]"""

    CASES = {
        "add": lambda a, b: ops.add(a, b),
        "mul": lambda a, b: ops.mul(a, b),
        "sub_div": lambda a, b: ops.div(ops.sub(a, b), ops.add(ops.mul(b, b), 1.0)),
        "tanh": lambda a, b: ops.mul(ops.tanh(a), b),
        "sigmoid": lambda a, b: ops.mul(ops.sigmoid(a), b),
        "gelu": lambda a, b: ops.mul(ops.gelu(a), b),
        "permute": lambda a, b: ops.mul(ops.transpose(ops.permute(a, (1, 0)), 0, 1), b),
        "reshape": lambda a, b: ops.mul(ops.reshape(ops.reshape(a, (12,)), (3, 4)), b),
        "concat_slice": lambda a, b: ops.mul(ops.concat([a[:, :2], a[:, 2:]], axis=1), b),
        "mean": lambda a, b: ops.mul(ops.mean(ops.mul(a, b), axis=1, keepdims=True), 3.0),
        "cosine": lambda a, b: ops.cosine_similarity(a, b),
        "take": lambda a, b: ops.mul(ops.take(a, [0, 2, 2, 1], axis=0), ops.take(b, [0, 0, 1, 2], axis=0)),
        "broadcast": lambda a, b: ops.mul(ops.broadcast_to(ops.sum(a, axis=0), (3, 4)), b),
        "stack": lambda a, b: ops.mul(ops.stack([a, b], axis=0), 2.0),
    }

    @pytest.mark.parametrize("name", sorted(CASES))
    def test_op(self, name, rng, float64):
        a, b = leaf(rng, 3, 4), leaf(rng, 3, 4)
        op = self.CASES[name]
        assert gradcheck(lambda: ops.sum(op(a, b)), [a, b]).max_error < 1e-5

    def test_mae(self, rng, float64):
        a = leaf(rng, 3, 4)
        target = Tensor(rng.uniform(-2, 2, (3, 4)) + 5.0)
        assert gradcheck(lambda: ops.mae(a, target), [a]).max_error < 1e-5

    def test_pairwise_cosine(self, rng, float64):
        a = leaf(rng, 2, 3, 5)
        assert gradcheck(lambda: ops.mean(ops.pairwise_cosine(a)), [a]).max_error < 1e-5


class TestShapes:
    def test_suffix_broadcast_only(self):
        ops.add(Tensor(np.ones((2, 3, 4))), Tensor(np.ones((3, 4))))
        with pytest.raises(ShapeError):
            ops.add(Tensor(np.ones((2, 3, 4))), Tensor(np.ones((2, 1, 4))))

    def test_reshape_permute_round_trip(self, rng):
        x = Tensor(rng.standard_normal((2, 3, 4)))
        back = ops.permute(ops.permute(x, (2, 0, 1)), (1, 2, 0))
        np.testing.assert_array_equal(back.data, x.data)
        np.testing.assert_array_equal(ops.reshape(ops.reshape(x, (6, 4)), (2, 3, 4)).data, x.data)

    def test_bad_permutation(self):
        with pytest.raises(ShapeError):
            ops.permute(Tensor(np.ones((2, 3))), (0, 0))

    def test_take_out_of_range(self):
        with pytest.raises(ShapeError):
            ops.take(Tensor(np.ones((3, 2))), [3], axis=0)


class TestTape:
    def test_no_tape_records_nothing(self, rng):
        x = leaf(rng, 2)
        y = ops.mul(x, 2.0)
        assert not y.requires_grad
        assert x.grad is None

    def test_only_leaves_get_gradients(self, rng):
        x, frozen = leaf(rng, 3), Tensor(np.ones(3))
        with Tape() as tape:
            hidden = ops.mul(x, frozen)
            loss = ops.sum(ops.tanh(hidden))
        tape.backward(loss)
        assert x.grad is not None and x.grad.shape == x.shape
        assert hidden.grad is None
        assert frozen.grad is None

    def test_reverse_order(self, rng):
        x = leaf(rng, 2)
        with Tape() as tape:
            loss = ops.sum(ops.tanh(ops.mul(x, 3.0)))
        assert tape.ops == ["mul", "tanh", "sum"]
        tape.backward(loss)
        assert len(tape) == 0

    def test_gradients_accumulate(self, rng, float64):
        x = leaf(rng, 3)
        for _ in range(2):
            with Tape() as tape:
                loss = ops.sum(x)
            tape.backward(loss)
        np.testing.assert_array_equal(x.grad, 2.0)

    def test_backward_is_deterministic(self, rng):
        data = rng.standard_normal((4, 5))
        grads = []
        for _ in range(2):
            x = Tensor(data, requires_grad=True)
            w = Tensor(np.linspace(-1, 1, 20).reshape(5, 4), requires_grad=True)
            with Tape() as tape:
                loss = ops.mean(ops.gelu(ops.matmul(x, w)))
            tape.backward(loss)
            grads.append((x.grad.copy(), w.grad.copy()))
        np.testing.assert_array_equal(grads[0][0], grads[1][0])
        np.testing.assert_array_equal(grads[0][1], grads[1][1])

    def test_non_scalar_loss(self, rng):
        x = leaf(rng, 3)
        with Tape() as tape:
            y = ops.mul(x, 2.0)
        with pytest.raises(ShapeError):
            tape.backward(y)


class TestScalars:
    def test_full_reductions_are_zero_dimensional(self, rng):
        x = leaf(rng, 2, 3)
        assert ops.sum(x).shape == ()
        assert ops.mean(x).shape == ()
        assert ops.mae(x, np.zeros((2, 3))).shape == ()
        assert Tensor(2.5).shape == ()

    def test_backward_from_full_sum(self, float64):
        x = Tensor(np.ones((2, 3)), requires_grad=True)
        with Tape() as tape:
            loss = ops.sum(x)
        tape.backward(loss)
        np.testing.assert_array_equal(x.grad, np.ones((2, 3)))

    def test_scalar_tensor_operand(self, rng, float64):
        x = leaf(rng, 3)
        scale = Tensor(np.array(2.0), requires_grad=True)
        with Tape() as tape:
            loss = ops.sum(ops.mul(x, scale))
        tape.backward(loss)
        np.testing.assert_allclose(x.grad, [2.0, 2.0, 2.0])
        assert scale.grad.shape == ()
        assert float(scale.grad) == pytest.approx(float(x.data.sum()))

    def test_scaled_scalar_losses(self, rng, float64):
        x = leaf(rng, 4)
        with Tape() as tape:
            loss = ops.add(ops.mul(ops.mean(x), 2.0), ops.mul(ops.mae(x, np.zeros(4)), 0.5))
        tape.backward(loss)
        np.testing.assert_allclose(x.grad, 0.5 + 0.125 * np.sign(x.data))

    def test_item(self):
        assert Tensor(np.array([[3.0]])).item() == 3.0
        assert Tensor(1.5).item() == 1.5
        with pytest.raises(ShapeError, match=r"\(2,\)"):
            Tensor(np.ones(2)).item()


class TestGradcheck:
    def test_sum(self, rng, float64):
        x = leaf(rng, 4, 3)
        report = gradcheck(lambda: ops.sum(x), [x])
        np.testing.assert_array_equal(x.grad, 1.0)
        assert report.max_error < 1e-10

    def test_sum_of_matmul(self, rng, float64):
        x, w = leaf(rng, 3, 4), leaf(rng, 4, 2)
        assert gradcheck(lambda: ops.sum(ops.matmul(x, w)), [x, w]).max_error < 1e-7

    def test_requires_float64(self, rng):
        x = leaf(rng, 3)
        with pytest.raises(PrecisionError):
            gradcheck(lambda: ops.sum(x), [x])

    def test_rejects_non_scalar(self, rng, float64):
        x = leaf(rng, 3)
        with pytest.raises(ShapeError):
            gradcheck(lambda: ops.mul(x, 2.0), [x])

    def test_sampled_coordinates(self, rng, float64):
        x = leaf(rng, 10, 10)
        report = gradcheck(lambda: ops.sum(ops.tanh(x)), [x], samples=7, names=["x"])
        assert report.checked == {"x": 7}
        assert report.passed()


class TestModule:
    def test_linear_on_inner_axis(self, rng):
        layer = Linear(3, 5, rng, axis=1)
        out = layer(Tensor(rng.standard_normal((2, 3, 4))))
        assert out.shape == (2, 5, 4)

    def test_parameter_discovery_and_state(self, rng):
        class Pair(Module):
            def __init__(self):
                self.layers = [Linear(2, 3, rng), Linear(3, 1, rng, bias=False)]
                self.scale = parameter(np.ones(1))
                self.buffer = Tensor(np.zeros(2))

        pair = Pair()
        names = [name for name, _ in pair.named_parameters()]
        assert names == ["layers.0.weight", "layers.0.bias", "layers.1.weight", "scale"]
        assert pair.num_parameters() == 6 + 3 + 3 + 1
        assert "buffer" in pair.state_dict()

        other = Pair()
        other.load_state_dict(pair.state_dict())
        np.testing.assert_array_equal(other.layers[0].weight.data, pair.layers[0].weight.data)

    def test_load_state_shape_mismatch(self, rng):
        layer = Linear(2, 3, rng)
        state = layer.state_dict()
        state["weight"] = np.zeros((3, 3))
        with pytest.raises(ShapeError):
            layer.load_state_dict(state)


class TestCheckpoint:
    def test_round_trip(self, rng, tmp_path):
        tensors = {"a": rng.standard_normal((2, 3)).astype(np.float32), "scalar": np.array(1.5, dtype=np.float32),
                   "nested.name": np.arange(4, dtype=np.float32)}
        path = save_checkpoint(tmp_path / "m.ckpt", tensors)
        assert path.read_bytes().startswith(b"HSTCKPT 1\n")
        loaded = load_checkpoint(path)
        assert list(loaded) == list(tensors)
        for name, value in tensors.items():
            np.testing.assert_array_equal(loaded[name], value)

    def test_truncated(self, rng, tmp_path):
        path = save_checkpoint(tmp_path / "m.ckpt", {"a": np.ones((4, 4), dtype=np.float32)})
        path.write_bytes(path.read_bytes()[:-5])
        with pytest.raises(DataFormatError, match="expected 64 bytes"):
            load_checkpoint(path)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "bad.ckpt"
        path.write_bytes(b"NOTACKPT\n")
        with pytest.raises(DataFormatError):
            load_checkpoint(path)


def test_default_dtype_switch():
    assert Tensor([1.0]).dtype == np.float32
    with default_dtype(np.float64):
        assert Tensor([1.0]).dtype == np.float64
    assert Tensor([1.0]).dtype == np.float32
