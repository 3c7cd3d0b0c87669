# Copyright (c) 2025-2026, Sayouzone
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""
희소 텐서 연산

submanifold 합성곱, strided 희소 합성곱(다운샘플링), generative transposed 합성곱(업샘플링),
pruning, 점유 head, 배치 정규화, ReLU를 제공합니다.
모든 연산은 tape가 주어지면 backward 함수를 기록합니다.

합성곱은 커널 맵(오프셋별 입력 행 → 출력 행)으로 표현됩니다.
- submanifold: out[o] = Σ_k W[k]ᵀ x[o + k - K//2]
- strided:     out[o] = Σ_k W[k]ᵀ x[o·S + k],  k ∈ [0, K)
- transposed:  out[p·S + k] += W[k]ᵀ x[p]
"""

import logging
from typing import Optional

import numpy as np

from scipy.special import expit

from ..errors import ConfigurationError
from .models import BatchNormState, ConvParams, KernelMap, SparseTensor
from .tape import Tape

logger = logging.getLogger(__name__)


def kernel_offsets(kernel_size, centered: bool = False) -> np.ndarray:
    """
    커널 오프셋 (K_x·K_y·K_z, 3), z가 가장 빠른 row-major 순

    centered=True이면 홀수 커널의 중심이 (0, 0, 0)이 되도록 이동합니다.
    """
    axes = [np.arange(int(k), dtype=np.int64) for k in kernel_size]
    offsets = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    if centered:
        offsets = offsets - np.asarray(kernel_size, dtype=np.int64) // 2
    return offsets


def find_rows(x: SparseTensor, coords: np.ndarray, keys: Optional[np.ndarray] = None) -> tuple[np.ndarray, np.ndarray]:
    """
    좌표가 x의 몇 번째 행인지 조회

    Returns:
        (found (M,) bool, rows (M,) int64) - found가 False인 행의 rows 값은 의미 없음
    """
    coords = np.asarray(coords, dtype=np.int64).reshape(-1, 3)
    found = np.zeros(coords.shape[0], dtype=bool)
    rows = np.zeros(coords.shape[0], dtype=np.int64)
    if len(x) == 0 or coords.shape[0] == 0:
        return found, rows

    keys = x.keys if keys is None else keys
    valid = np.nonzero(x.grid.is_valid(coords, x.stride))[0]
    query = x.grid.keys(coords[valid], x.stride)
    index = np.minimum(np.searchsorted(keys, query), len(x) - 1)
    hit = keys[index] == query
    found[valid[hit]] = True
    rows[valid[hit]] = index[hit]
    return found, rows


def _cast(features: np.ndarray, params: ConvParams) -> np.ndarray:
    return features.astype(params.weight.data.dtype, copy=False)


def _conv(
    op: str,
    x: SparseTensor,
    params: ConvParams,
    out_coords: np.ndarray,
    out_stride,
    kernel_map: KernelMap,
    tape: Optional[Tape],
) -> SparseTensor:
    features = _cast(x.features, params)
    weight = params.weight.data
    out = np.zeros((kernel_map.n_out, params.out_channels), dtype=weight.dtype)
    for k, in_rows, out_rows in kernel_map.pairs:
        out[out_rows] += features[in_rows] @ weight[k]
    out += params.bias.data

    value_id = None
    if tape is not None:
        def backward(grad: np.ndarray):
            grad = grad.astype(weight.dtype, copy=False)
            grad_x = np.zeros_like(features)
            grad_w = np.zeros_like(weight)
            for k, in_rows, out_rows in kernel_map.pairs:
                grad_w[k] += features[in_rows].T @ grad[out_rows]
                grad_x[in_rows] += grad[out_rows] @ weight[k].T
            params.weight.accumulate(grad_w)
            params.bias.accumulate(grad.sum(axis=0))
            return (grad_x,)

        value_id = tape.record(op, (x.value_id,), backward, kernel_pairs=kernel_map.n_pairs)

    return SparseTensor(out_coords, out, out_stride, x.grid, value_id=value_id)


def submanifold_conv(x: SparseTensor, params: ConvParams, tape: Optional[Tape] = None) -> SparseTensor:
    """
    submanifold 희소 합성곱

    커널 중심은 활성 좌표에만 놓이고, 커널이 덮는 활성 이웃만 더합니다.
    출력 좌표 = 입력 좌표.

    Args:
        x: 입력 희소 텐서
        params: 합성곱 파라미터 (stride (1, 1, 1), 홀수 커널)
        tape: gradient 기록용 Tape

    Returns:
        같은 좌표의 SparseTensor
    """
    if params.stride != (1, 1, 1):
        raise ConfigurationError(f"stride (1, 1, 1)이어야 합니다: {params.stride}", key="conv.stride")
    if any(k % 2 == 0 for k in params.kernel_size):
        raise ConfigurationError(f"홀수 커널이어야 합니다: {params.kernel_size}", key="conv.kernel_size")
    if x.channels != params.in_channels:
        raise ConfigurationError(f"입력 채널 {x.channels} != {params.in_channels}", key=params.weight.name)

    keys = x.keys
    positions = np.arange(len(x), dtype=np.int64)
    pairs = []
    for k, offset in enumerate(kernel_offsets(params.kernel_size, centered=True)):
        found, rows = find_rows(x, x.coords + offset, keys)
        if found.any():
            pairs.append((k, rows[found], positions[found]))
    return _conv("submanifold_conv", x, params, x.coords, x.stride, KernelMap(pairs, len(x)), tape)


def strided_sparse_conv(x: SparseTensor, params: ConvParams, tape: Optional[Tape] = None) -> SparseTensor:
    """
    strided 희소 합성곱 (다운샘플링)

    출력 stride = 입력 stride ⊙ params.stride,
    출력 좌표 = floor(입력 좌표 / params.stride)의 고유 집합.

    Args:
        x: 입력 희소 텐서
        params: 합성곱 파라미터
        tape: gradient 기록용 Tape

    Returns:
        다운샘플된 SparseTensor
    """
    if x.channels != params.in_channels:
        raise ConfigurationError(f"입력 채널 {x.channels} != {params.in_channels}", key=params.weight.name)

    step = np.asarray(params.stride, dtype=np.int64)
    out_stride = tuple(int(s) for s in np.asarray(x.stride) * step)
    if len(x) == 0:
        out_coords = np.zeros((0, 3), dtype=np.int64)
    else:
        out_keys = np.unique(x.grid.keys(x.coords // step, out_stride))
        out_coords = x.grid.coords_from_keys(out_keys, out_stride)

    keys = x.keys
    positions = np.arange(out_coords.shape[0], dtype=np.int64)
    pairs = []
    for k, offset in enumerate(kernel_offsets(params.kernel_size)):
        found, rows = find_rows(x, out_coords * step + offset, keys)
        if found.any():
            pairs.append((k, rows[found], positions[found]))
    return _conv("strided_sparse_conv", x, params, out_coords, out_stride, KernelMap(pairs, out_coords.shape[0]), tape)


def generative_transposed_conv(x: SparseTensor, params: ConvParams, tape: Optional[Tape] = None) -> SparseTensor:
    """
    generative transposed 합성곱 (업샘플링)

    활성 부모 p마다 커널 footprint의 모든 자식 p·S + k (그리드 안)가 활성화됩니다.
    출력 stride = 입력 stride ⊘ params.stride.

    Args:
        x: 입력 희소 텐서
        params: 합성곱 파라미터
        tape: gradient 기록용 Tape

    Returns:
        업샘플된 SparseTensor
    """
    if x.channels != params.in_channels:
        raise ConfigurationError(f"입력 채널 {x.channels} != {params.in_channels}", key=params.weight.name)
    if any(s % p for s, p in zip(x.stride, params.stride)):
        raise ConfigurationError(f"{x.stride}를 {params.stride}로 나눌 수 없습니다", key="conv.stride")

    step = np.asarray(params.stride, dtype=np.int64)
    out_stride = tuple(int(s) // int(p) for s, p in zip(x.stride, params.stride))
    offsets = kernel_offsets(params.kernel_size)

    children = []
    for offset in offsets:
        child = x.coords * step + offset
        valid = x.grid.is_valid(child, out_stride)
        children.append((child, valid))

    if len(x) == 0:
        out_keys = np.zeros(0, dtype=np.int64)
    else:
        out_keys = np.unique(np.concatenate([x.grid.keys(c[v], out_stride) for c, v in children]))
    out_coords = x.grid.coords_from_keys(out_keys, out_stride)

    positions = np.arange(len(x), dtype=np.int64)
    pairs = []
    for k, (child, valid) in enumerate(children):
        if valid.any():
            out_rows = np.searchsorted(out_keys, x.grid.keys(child[valid], out_stride))
            pairs.append((k, positions[valid], out_rows))
    return _conv(
        "generative_transposed_conv", x, params, out_coords, out_stride, KernelMap(pairs, out_keys.size), tape
    )


def occupancy_head(x: SparseTensor, params: ConvParams, tape: Optional[Tape] = None) -> SparseTensor:
    """
    1×1×1 점유 분류 head

    Returns:
        활성 좌표별 logit 1채널 SparseTensor (확률은 sigmoid(logit))
    """
    if params.kernel_size != (1, 1, 1) or params.out_channels != 1:
        raise ConfigurationError("1×1×1 커널과 출력 1채널이어야 합니다", key=params.weight.name)
    if x.channels != params.in_channels:
        raise ConfigurationError(f"입력 채널 {x.channels} != {params.in_channels}", key=params.weight.name)
    positions = np.arange(len(x), dtype=np.int64)
    kernel_map = KernelMap([(0, positions, positions)] if len(x) else [], len(x))
    return _conv("occupancy_head", x, params, x.coords, x.stride, kernel_map, tape)


def probabilities(logits: np.ndarray) -> np.ndarray:
    """sigmoid(logit)"""
    return expit(np.asarray(logits, dtype=np.float64))


def prune(x: SparseTensor, keep: np.ndarray, tape: Optional[Tape] = None) -> SparseTensor:
    """
    keep가 True인 행만 남김

    backward에서 제거된 행의 gradient는 0입니다.
    """
    keep = np.asarray(keep, dtype=bool).reshape(-1)
    if keep.shape[0] != len(x):
        raise ConfigurationError(f"keep 길이 {keep.shape[0]} != {len(x)}", key="prune.keep")
    rows = np.nonzero(keep)[0]
    n_rows, shape, dtype = len(x), x.features.shape, x.features.dtype

    value_id = None
    if tape is not None:
        def backward(grad: np.ndarray):
            grad_x = np.zeros(shape, dtype=dtype)
            grad_x[rows] = grad
            return (grad_x,)

        value_id = tape.record("prune", (x.value_id,), backward, keep=keep.copy(), n_rows=n_rows)

    return SparseTensor(x.coords[rows], x.features[rows], x.stride, x.grid, value_id=value_id)


def batch_norm(
    x: SparseTensor,
    state: BatchNormState,
    training: bool = True,
    tape: Optional[Tape] = None,
) -> SparseTensor:
    """
    채널별 배치 정규화

    training이면 활성 행 전체의 배치 통계(float64 누적)를 쓰고 이동 통계를 갱신합니다.
    아니면 이동 통계를 씁니다. 행이 하나면 분산은 0이고 eps가 floor가 됩니다.

    Args:
        x: 입력 희소 텐서
        state: 배치 정규화 상태
        training: 학습 모드 여부
        tape: gradient 기록용 Tape
    """
    if x.channels != state.channels:
        raise ConfigurationError(f"입력 채널 {x.channels} != {state.channels}", key=state.gamma.name)

    dtype = x.features.dtype
    values = x.features.astype(np.float64)
    n = values.shape[0]
    gamma = state.gamma.data.astype(np.float64)
    beta = state.beta.data.astype(np.float64)
    batch_stats = training and n > 0

    if batch_stats:
        mean = values.mean(axis=0)
        var = values.var(axis=0)
        unbiased = var * n / (n - 1) if n > 1 else var
        stats_dtype = state.running_mean.dtype
        state.running_mean = ((1.0 - state.momentum) * state.running_mean + state.momentum * mean).astype(stats_dtype)
        state.running_var = ((1.0 - state.momentum) * state.running_var + state.momentum * unbiased).astype(stats_dtype)
    else:
        mean = state.running_mean.astype(np.float64)
        var = state.running_var.astype(np.float64)

    inv_std = 1.0 / np.sqrt(var + state.eps)
    normalized = (values - mean) * inv_std
    out = (gamma * normalized + beta).astype(dtype)

    value_id = None
    if tape is not None:
        def backward(grad: np.ndarray):
            grad = grad.astype(np.float64)
            grad_sum = grad.sum(axis=0)
            grad_dot = (grad * normalized).sum(axis=0)
            state.gamma.accumulate(grad_dot)
            state.beta.accumulate(grad_sum)
            if batch_stats:
                grad_x = (gamma * inv_std / n) * (n * grad - grad_sum - normalized * grad_dot)
            else:
                grad_x = grad * gamma * inv_std
            return (grad_x.astype(dtype),)

        value_id = tape.record("batch_norm", (x.value_id,), backward, training=batch_stats)

    return x.with_features(out, value_id=value_id)


def relu(x: SparseTensor, tape: Optional[Tape] = None) -> SparseTensor:
    """ReLU (활성 좌표 집합은 그대로)"""
    mask = x.features > 0
    out = np.where(mask, x.features, 0).astype(x.features.dtype)

    value_id = None
    if tape is not None:
        def backward(grad: np.ndarray):
            return (np.where(mask, grad, 0).astype(x.features.dtype),)

        value_id = tape.record("relu", (x.value_id,), backward, mask=mask, pre_activation=x.features.copy())

    return x.with_features(out, value_id=value_id)
