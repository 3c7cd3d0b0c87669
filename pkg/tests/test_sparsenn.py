"""
sparsenn 패키지 테스트 (dense 합성곱 대조, adjoint, Tape gradient)
"""

import numpy as np
import pytest

from sayou.voxmae.errors import ConfigurationError, TapeError
from sayou.voxmae.geometry import GridConfig
from sayou.voxmae.sparsenn import (
    SparseTensor,
    Tape,
    batch_norm,
    generative_transposed_conv,
    kernel_offsets,
    make_batch_norm,
    make_conv,
    occupancy_head,
    probabilities,
    prune,
    relu,
    strided_sparse_conv,
    submanifold_conv,
)

GRID = GridConfig(voxel_size=(1.0, 1.0, 1.0), extent=(8, 8, 8))


def random_tensor(rng, n: int, channels: int, stride=(1, 1, 1)) -> SparseTensor:
    dims = GRID.dims_at(stride)
    keys = rng.choice(int(np.prod(dims)), size=n, replace=False)
    coords = GRID.coords_from_keys(np.sort(keys), stride)
    return SparseTensor(coords, rng.normal(size=(n, channels)), stride, GRID)


def random_conv(rng, name, c_in, c_out, kernel, stride=(1, 1, 1)):
    params = make_conv(name, c_in, c_out, kernel, stride, rng, np.float64)
    params.bias.data = rng.normal(size=c_out)
    return params


def densify(x: SparseTensor) -> np.ndarray:
    dense = np.zeros(GRID.dims_at(x.stride) + (x.channels,))
    dense[tuple(x.coords.T)] = x.features
    return dense


def dense_at(dense: np.ndarray, coords: np.ndarray) -> np.ndarray:
    """그리드 밖 좌표는 0"""
    dims = np.asarray(dense.shape[:3])
    inside = np.all((coords >= 0) & (coords < dims), axis=1)
    out = np.zeros((coords.shape[0], dense.shape[3]))
    out[inside] = dense[tuple(coords[inside].T)]
    return out


class TestDenseEquivalence:

    def test_submanifold(self):
        rng = np.random.default_rng(0)
        x = random_tensor(rng, 60, 3)
        params = random_conv(rng, "ssc", 3, 5, (3, 3, 3))
        y = submanifold_conv(x, params)

        dense = densify(x)
        expected = np.tile(params.bias.data, (len(x), 1))
        for k, offset in enumerate(kernel_offsets((3, 3, 3), centered=True)):
            expected += dense_at(dense, x.coords + offset) @ params.weight.data[k]
        np.testing.assert_array_equal(y.coords, x.coords)
        np.testing.assert_allclose(y.features, expected, atol=1e-6)

    @pytest.mark.parametrize("kernel, stride", [((2, 2, 2), (2, 2, 2)), ((3, 3, 3), (2, 2, 2)), ((1, 1, 2), (1, 1, 2))])
    def test_strided(self, kernel, stride):
        rng = np.random.default_rng(1)
        x = random_tensor(rng, 80, 2)
        params = random_conv(rng, "down", 2, 4, kernel, stride)
        y = strided_sparse_conv(x, params)

        expected_coords = np.unique(x.coords // np.asarray(stride), axis=0)
        np.testing.assert_array_equal(y.coords, expected_coords)
        assert y.stride == stride

        dense = densify(x)
        expected = np.tile(params.bias.data, (len(y), 1))
        for k, offset in enumerate(kernel_offsets(kernel)):
            expected += dense_at(dense, y.coords * np.asarray(stride) + offset) @ params.weight.data[k]
        np.testing.assert_allclose(y.features, expected, atol=1e-6)

    @pytest.mark.parametrize("kernel, stride", [((2, 2, 2), (2, 2, 2)), ((1, 1, 3), (1, 1, 2))])
    def test_transposed(self, kernel, stride):
        rng = np.random.default_rng(2)
        x = random_tensor(rng, 12, 3, stride=stride)
        params = random_conv(rng, "up", 3, 2, kernel, stride)
        y = generative_transposed_conv(x, params)
        assert y.stride == (1, 1, 1)

        dims = GRID.dims_at((1, 1, 1))
        dense = np.zeros(dims + (2,))
        touched = np.zeros(dims, dtype=bool)
        for row, parent in enumerate(x.coords):
            for k, offset in enumerate(kernel_offsets(kernel)):
                child = parent * np.asarray(stride) + offset
                if np.all(child < np.asarray(dims)):
                    dense[tuple(child)] += x.features[row] @ params.weight.data[k]
                    touched[tuple(child)] = True

        np.testing.assert_array_equal(y.coords, np.argwhere(touched))
        expected = dense[tuple(y.coords.T)] + params.bias.data
        np.testing.assert_allclose(y.features, expected, atol=1e-6)

    def test_single_parent_children(self):
        rng = np.random.default_rng(3)
        x = SparseTensor(np.array([[1, 1, 1]]), rng.normal(size=(1, 2)), (1, 1, 2), GRID)
        y = generative_transposed_conv(x, random_conv(rng, "up", 2, 2, (1, 1, 3), (1, 1, 2)))
        assert len(y) <= 3
        np.testing.assert_array_equal(y.coords, [[1, 1, 2], [1, 1, 3], [1, 1, 4]])

    def test_occupancy_head(self):
        rng = np.random.default_rng(4)
        x = random_tensor(rng, 30, 4)
        params = random_conv(rng, "head", 4, 1, (1, 1, 1))
        y = occupancy_head(x, params)
        np.testing.assert_allclose(y.features, x.features @ params.weight.data[0] + params.bias.data, atol=1e-6)
        np.testing.assert_allclose(probabilities(np.zeros(3)), 0.5)

    def test_head_shape_checked(self):
        rng = np.random.default_rng(4)
        with pytest.raises(ConfigurationError):
            occupancy_head(random_tensor(rng, 3, 4), random_conv(rng, "head", 4, 2, (1, 1, 1)))

    def test_submanifold_requires_odd_kernel(self):
        rng = np.random.default_rng(5)
        with pytest.raises(ConfigurationError):
            submanifold_conv(random_tensor(rng, 3, 2), random_conv(rng, "ssc", 2, 2, (2, 2, 2)))


class TestAdjoint:

    @pytest.mark.parametrize("op, kernel, stride, in_stride", [
        (submanifold_conv, (3, 3, 3), (1, 1, 1), (1, 1, 1)),
        (strided_sparse_conv, (2, 2, 2), (2, 2, 2), (1, 1, 1)),
        (generative_transposed_conv, (2, 2, 2), (2, 2, 2), (2, 2, 2)),
    ])
    def test_inner_product_identity(self, op, kernel, stride, in_stride):
        rng = np.random.default_rng(6)
        x = random_tensor(rng, 20, 3, stride=in_stride)
        params = make_conv("conv", 3, 4, kernel, stride, rng, np.float64)

        tape = Tape()
        x.value_id = tape.new_value()
        y = op(x, params, tape)
        seed = rng.normal(size=y.features.shape)
        grads = tape.backward({y.value_id: seed})

        assert np.sum(y.features * seed) == pytest.approx(np.sum(x.features * grads[x.value_id]), abs=1e-6)


class TestTape:

    def test_backward_without_nodes(self):
        with pytest.raises(TapeError):
            Tape().backward({0: np.ones(1)})

    def test_relu_and_prune_gradients(self):
        x = SparseTensor(np.array([[0, 0, 0], [0, 0, 1], [0, 0, 2]]), np.array([[1.0], [-2.0], [3.0]]), (1, 1, 1), GRID)
        tape = Tape()
        x.value_id = tape.new_value()
        y = prune(relu(x, tape), np.array([True, True, False]), tape)
        assert len(y) == 2
        grads = tape.backward({y.value_id: np.ones((2, 1))})
        np.testing.assert_array_equal(grads[x.value_id], [[1.0], [0.0], [0.0]])

    def test_finite_differences(self):
        rng = np.random.default_rng(8)
        x = random_tensor(rng, 25, 2)
        conv = random_conv(rng, "ssc", 2, 3, (3, 3, 3))
        bn = make_batch_norm("bn", 3, np.float64)
        head = random_conv(rng, "head", 3, 1, (1, 1, 1))
        target = rng.normal(size=(25, 1))

        def loss() -> tuple[float, Tape, SparseTensor]:
            tape = Tape()
            inputs = x.with_features(x.features, value_id=tape.new_value())
            h = batch_norm(submanifold_conv(inputs, conv, tape), bn, True, tape)
            out = occupancy_head(h, head, tape)
            return float(np.sum((out.features - target) ** 2)), tape, out

        _, tape, out = loss()
        for param in conv.parameters() + bn.parameters() + head.parameters():
            param.zero_grad()
        tape.backward({out.value_id: 2.0 * (out.features - target)})

        h = 1e-5
        for param in conv.parameters() + bn.parameters() + head.parameters():
            flat = param.data.reshape(-1)
            for index in rng.choice(flat.size, size=min(5, flat.size), replace=False):
                original = flat[index]
                flat[index] = original + h
                plus = loss()[0]
                flat[index] = original - h
                minus = loss()[0]
                flat[index] = original
                numeric = (plus - minus) / (2 * h)
                assert param.grad.reshape(-1)[index] == pytest.approx(numeric, rel=1e-4, abs=1e-6)


class TestBatchNorm:

    def test_single_row_uses_eps_floor(self):
        bn = make_batch_norm("bn", 2, np.float64)
        x = SparseTensor(np.array([[1, 1, 1]]), np.array([[3.0, -1.0]]), (1, 1, 1), GRID)
        y = batch_norm(x, bn, training=True)
        np.testing.assert_allclose(y.features, 0.0)

    def test_empty_input(self):
        bn = make_batch_norm("bn", 2, np.float64)
        y = batch_norm(SparseTensor.empty(GRID, (1, 1, 1), 2, np.float64), bn, training=True)
        assert len(y) == 0
        np.testing.assert_array_equal(bn.running_mean, 0.0)

    def test_inference_uses_running_stats(self):
        bn = make_batch_norm("bn", 1, np.float64)
        bn.running_mean = np.array([1.0])
        bn.running_var = np.array([4.0])
        x = SparseTensor(np.array([[0, 0, 0]]), np.array([[5.0]]), (1, 1, 1), GRID)
        y = batch_norm(x, bn, training=False)
        assert y.features[0, 0] == pytest.approx(4.0 / np.sqrt(4.0 + bn.eps))

    def test_running_stats_keep_parameter_dtype(self):
        bn = make_batch_norm("bn", 2)
        x = SparseTensor(np.array([[0, 0, 0], [1, 0, 0]]), np.array([[1.0, 2.0], [3.0, 5.0]], dtype=np.float32),
                         (1, 1, 1), GRID)
        batch_norm(x, bn, training=True)
        assert bn.running_mean.dtype == np.float32
        assert bn.running_var.dtype == np.float32


class TestSparseTensor:

    def test_rejects_unsorted(self):
        with pytest.raises(ConfigurationError):
            SparseTensor(np.array([[1, 0, 0], [0, 0, 0]]), np.zeros((2, 1)), (1, 1, 1), GRID)

    def test_rejects_out_of_grid(self):
        with pytest.raises(ConfigurationError):
            SparseTensor(np.array([[4, 0, 0]]), np.zeros((1, 1)), (2, 2, 2), GRID)

    def test_from_coords_sorts(self):
        x = SparseTensor.from_coords(np.array([[1, 0, 0], [0, 0, 0]]), np.array([[1.0], [0.0]]), GRID)
        np.testing.assert_array_equal(x.features[:, 0], [0.0, 1.0])
