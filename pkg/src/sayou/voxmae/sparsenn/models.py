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
sparsenn 데이터 모델 정의

희소 텐서, 학습 파라미터, 합성곱/배치 정규화 파라미터, 커널 맵을 정의합니다.
"""

import math

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import ConfigurationError
from ..geometry import UNIT_STRIDE, GridConfig, Stride, as_stride


@dataclass(eq=False)
class SparseTensor:
    """
    희소 텐서

    Attributes:
        coords: 활성 좌표 (N, 3) int64, 키 순으로 정렬된 고유 좌표
        features: 특징 (N, C)
        stride: 텐서 stride
        grid: 그리드 설정
        value_id: Tape에 기록된 값 id (기록하지 않으면 None)
    """
    coords: np.ndarray
    features: np.ndarray
    stride: Stride
    grid: GridConfig
    value_id: Optional[int] = None

    def __post_init__(self):
        self.stride = as_stride(self.stride)
        self.coords = np.asarray(self.coords, dtype=np.int64).reshape(-1, 3)
        self.features = np.asarray(self.features)
        if self.features.ndim != 2 or self.features.shape[0] != self.coords.shape[0]:
            raise ConfigurationError(
                f"features shape {self.features.shape} != ({self.coords.shape[0]}, C)", key="sparse_tensor.features"
            )
        if not np.all(self.grid.is_valid(self.coords, self.stride)):
            raise ConfigurationError(f"stride {self.stride}에서 그리드 밖 좌표가 있습니다", key="sparse_tensor.coords")
        keys = self.keys
        if keys.size > 1 and not np.all(keys[1:] > keys[:-1]):
            raise ConfigurationError("좌표가 정렬되어 있지 않거나 중복됩니다", key="sparse_tensor.coords")

    def __len__(self) -> int:
        return int(self.coords.shape[0])

    @property
    def channels(self) -> int:
        return int(self.features.shape[1])

    @property
    def keys(self) -> np.ndarray:
        return self.grid.keys(self.coords, self.stride)

    @property
    def is_empty(self) -> bool:
        return len(self) == 0

    def with_features(self, features: np.ndarray, value_id: Optional[int] = None) -> "SparseTensor":
        return SparseTensor(self.coords, features, self.stride, self.grid, value_id=value_id)

    @classmethod
    def from_coords(
        cls,
        coords: np.ndarray,
        features: np.ndarray,
        grid: GridConfig,
        stride: Stride = UNIT_STRIDE,
    ) -> "SparseTensor":
        """정렬되지 않은 고유 좌표와 특징으로 생성 (키 순으로 정렬)"""
        coords = np.asarray(coords, dtype=np.int64).reshape(-1, 3)
        order = np.argsort(grid.keys(coords, stride), kind="stable")
        return cls(coords[order], np.asarray(features)[order], stride, grid)

    @classmethod
    def empty(cls, grid: GridConfig, stride: Stride, channels: int, dtype=np.float32) -> "SparseTensor":
        return cls(np.zeros((0, 3), dtype=np.int64), np.zeros((0, channels), dtype=dtype), stride, grid)


@dataclass(eq=False)
class Parameter:
    """학습 파라미터 (값과 누적 gradient)"""
    name: str
    data: np.ndarray
    grad: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        self.data = np.asarray(self.data)
        if self.grad is None:
            self.grad = np.zeros_like(self.data)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.data.shape)

    def zero_grad(self):
        self.grad = np.zeros_like(self.data)

    def accumulate(self, grad: np.ndarray):
        self.grad += grad.astype(self.grad.dtype, copy=False)


@dataclass(eq=False)
class ConvParams:
    """
    희소 합성곱 파라미터

    Attributes:
        kernel_size: 축별 커널 크기
        stride: 축별 stride
        weight: (K_x·K_y·K_z, C_in, C_out), 커널 오프셋은 z가 가장 빠른 row-major 순
        bias: (C_out,)
    """
    kernel_size: tuple[int, int, int]
    stride: tuple[int, int, int]
    weight: Parameter
    bias: Parameter

    def __post_init__(self):
        self.kernel_size = tuple(int(k) for k in self.kernel_size)
        self.stride = as_stride(self.stride)
        if len(self.kernel_size) != 3 or any(k < 1 for k in self.kernel_size):
            raise ConfigurationError(f"커널 크기는 1 이상이어야 합니다: {self.kernel_size}", key="conv.kernel_size")
        if self.weight.data.ndim != 3 or self.weight.data.shape[0] != self.kernel_volume:
            raise ConfigurationError(
                f"weight shape {self.weight.shape} != ({self.kernel_volume}, C_in, C_out)", key=self.weight.name
            )
        if self.bias.data.shape != (self.out_channels,):
            raise ConfigurationError(f"bias shape {self.bias.shape} != ({self.out_channels},)", key=self.bias.name)
        if not np.all(np.isfinite(self.weight.data)):
            raise ConfigurationError("weight에 유한하지 않은 값이 있습니다", key=self.weight.name)

    @property
    def kernel_volume(self) -> int:
        return math.prod(self.kernel_size)

    @property
    def in_channels(self) -> int:
        return int(self.weight.data.shape[1])

    @property
    def out_channels(self) -> int:
        return int(self.weight.data.shape[2])

    def parameters(self) -> list[Parameter]:
        return [self.weight, self.bias]


@dataclass(eq=False)
class BatchNormState:
    """
    배치 정규화 상태

    Attributes:
        gamma: scale (C,)
        beta: shift (C,)
        running_mean: 이동 평균 (C,) 파라미터 dtype
        running_var: 이동 분산 (C,) 파라미터 dtype
        eps: 분산 floor
        momentum: 이동 평균 계수
    """
    gamma: Parameter
    beta: Parameter
    running_mean: np.ndarray
    running_var: np.ndarray
    eps: float = 1e-5
    momentum: float = 0.1

    @property
    def channels(self) -> int:
        return int(self.gamma.data.shape[0])

    def parameters(self) -> list[Parameter]:
        return [self.gamma, self.beta]


@dataclass
class KernelMap:
    """
    커널 오프셋별 (입력 행, 출력 행) 쌍

    한 오프셋 안에서 출력 행과 입력 행은 각각 중복되지 않습니다.

    Attributes:
        pairs: (offset index, input rows, output rows) 리스트
        n_out: 출력 행 수
    """
    pairs: list[tuple[int, np.ndarray, np.ndarray]]
    n_out: int

    @property
    def n_pairs(self) -> int:
        return int(sum(rows.size for _, rows, _ in self.pairs))
