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
supervision 데이터 모델 정의

복셀 카테고리, 복셀 라벨, stride별 라벨 맵과 라벨 피라미드를 정의합니다.
라벨 맵은 Occupied/Empty 복셀만 정렬된 키 배열로 저장하고, 없는 좌표는 Unknown입니다.
"""

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Optional

import numpy as np

from ..errors import ConfigurationError
from ..geometry import UNIT_STRIDE, GridConfig, Stride, VoxelCoord, as_stride


class VoxelCategory(IntEnum):
    """
    복셀 카테고리 열거형

    값의 크기 순서가 병합 우선순위입니다 (Occupied > Empty > Unknown).
    """
    UNKNOWN = 0
    EMPTY = 1
    OCCUPIED = 2


@dataclass(frozen=True)
class VoxelLabel:
    """
    복셀 라벨

    Attributes:
        category: 카테고리
        weight: 손실 가중치 [0, 1]
        min_dist: 통과 빔까지의 최소 거리 (m, Empty만 정의)
    """
    category: VoxelCategory = VoxelCategory.UNKNOWN
    weight: float = 0.0
    min_dist: Optional[float] = None

    @property
    def target(self) -> int:
        return 1 if self.category == VoxelCategory.OCCUPIED else 0

    @property
    def is_known(self) -> bool:
        return self.category != VoxelCategory.UNKNOWN


UNKNOWN_LABEL = VoxelLabel()


@dataclass(eq=False)
class LabelMap:
    """
    한 stride의 라벨 맵

    Attributes:
        grid: 그리드 설정
        stride: 텐서 stride
        keys: 정렬된 고유 복셀 키 (N,)
        category: VoxelCategory 값 (N,) uint8 - EMPTY 또는 OCCUPIED
        weight: 가중치 (N,)
        min_dist: 최소 거리 (N,), Occupied는 0
    """
    grid: GridConfig
    stride: Stride = UNIT_STRIDE
    keys: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    category: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.uint8))
    weight: np.ndarray = field(default_factory=lambda: np.zeros(0))
    min_dist: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        self.stride = as_stride(self.stride)
        self.keys = np.asarray(self.keys, dtype=np.int64).reshape(-1)
        self.category = np.asarray(self.category, dtype=np.uint8).reshape(-1)
        self.weight = np.asarray(self.weight, dtype=np.float64).reshape(-1)
        self.min_dist = np.asarray(self.min_dist, dtype=np.float64).reshape(-1)
        n = self.keys.shape[0]
        if not (self.category.shape[0] == self.weight.shape[0] == self.min_dist.shape[0] == n):
            raise ConfigurationError("배열 길이가 다릅니다", key="label_map")
        if n > 1 and not np.all(self.keys[1:] > self.keys[:-1]):
            raise ConfigurationError("키가 정렬되어 있지 않거나 중복됩니다", key="label_map.keys")

    def __len__(self) -> int:
        return int(self.keys.shape[0])

    @property
    def coords(self) -> np.ndarray:
        return self.grid.coords_from_keys(self.keys, self.stride)

    @property
    def diagonal(self) -> float:
        return self.grid.diagonal(self.stride)

    def count(self, category: VoxelCategory) -> int:
        if category == VoxelCategory.UNKNOWN:
            return int(np.prod(self.grid.dims_at(self.stride))) - len(self)
        return int(np.count_nonzero(self.category == category))

    def coords_of(self, category: VoxelCategory) -> np.ndarray:
        """카테고리의 좌표 (Occupied/Empty만, 정렬됨)"""
        keys = self.keys[self.category == category]
        return self.grid.coords_from_keys(keys, self.stride)

    def keys_of(self, category: VoxelCategory) -> np.ndarray:
        return self.keys[self.category == category]

    def lookup_arrays(self, coords: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        좌표 배열의 (category, weight, min_dist)

        맵에 없는 좌표와 그리드 밖 좌표는 Unknown (weight 0, min_dist inf)입니다.
        """
        coords = np.asarray(coords, dtype=np.int64).reshape(-1, 3)
        n = coords.shape[0]
        category = np.full(n, VoxelCategory.UNKNOWN, dtype=np.uint8)
        weight = np.zeros(n)
        min_dist = np.full(n, np.inf)
        if n == 0 or len(self) == 0:
            return category, weight, min_dist

        valid = self.grid.is_valid(coords, self.stride)
        keys = self.grid.keys(coords[valid], self.stride)
        index = np.minimum(np.searchsorted(self.keys, keys), len(self) - 1)
        found = self.keys[index] == keys

        rows = np.nonzero(valid)[0][found]
        category[rows] = self.category[index[found]]
        weight[rows] = self.weight[index[found]]
        min_dist[rows] = self.min_dist[index[found]]
        return category, weight, min_dist

    def label_at(self, voxel: VoxelCoord) -> VoxelLabel:
        category, weight, min_dist = self.lookup_arrays(np.asarray(tuple(voxel)).reshape(1, 3))
        return to_label(category[0], weight[0], min_dist[0])

    @classmethod
    def empty(cls, grid: GridConfig, stride: Stride = UNIT_STRIDE) -> "LabelMap":
        return cls(grid=grid, stride=stride)


def to_label(category: int, weight: float, min_dist: float) -> VoxelLabel:
    category = VoxelCategory(int(category))
    if category == VoxelCategory.UNKNOWN:
        return UNKNOWN_LABEL
    if category == VoxelCategory.OCCUPIED:
        return VoxelLabel(category, 1.0, 0.0)
    return VoxelLabel(category, float(weight), float(min_dist))


@dataclass(eq=False)
class LabelPyramid:
    """
    stride별 라벨 맵 모음

    Attributes:
        grid: 그리드 설정
        maps: stride → LabelMap (fine → coarse 순)
    """
    grid: GridConfig
    maps: dict[Stride, LabelMap] = field(default_factory=dict)

    @property
    def strides(self) -> list[Stride]:
        return list(self.maps)

    def __contains__(self, stride) -> bool:
        return tuple(int(s) for s in stride) in self.maps

    def __getitem__(self, stride) -> LabelMap:
        key = tuple(int(s) for s in stride)
        if key not in self.maps:
            raise ConfigurationError(f"피라미드에 없는 stride: {key}", key="stride")
        return self.maps[key]

    def summary(self) -> dict[Stride, dict[str, int]]:
        """stride별 카테고리 개수"""
        return {
            stride: {
                "occupied": label_map.count(VoxelCategory.OCCUPIED),
                "empty": label_map.count(VoxelCategory.EMPTY),
                "unknown": label_map.count(VoxelCategory.UNKNOWN),
            }
            for stride, label_map in self.maps.items()
        }
