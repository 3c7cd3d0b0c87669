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
geometry 데이터 모델 정의

복셀 그리드 설정, 복셀 좌표, 광선(Ray)을 담는 dataclass들을 정의합니다.
좌표 배열은 (N, 3) int64, 월드 좌표는 (N, 3) float64를 사용합니다.
"""

import math

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from ..errors import ConfigurationError

Vector3 = tuple[float, float, float]
Stride = tuple[int, int, int]

UNIT_STRIDE: Stride = (1, 1, 1)


def as_stride(stride) -> Stride:
    """stride를 (int, int, int) 튜플로 정규화하고 2의 거듭제곱인지 검사"""
    values = tuple(int(s) for s in stride)
    if len(values) != 3:
        raise ConfigurationError(f"3개의 성분이 필요합니다: {stride}", key="stride")
    for s in values:
        if s < 1 or (s & (s - 1)) != 0:
            raise ConfigurationError(f"2의 거듭제곱이 아닙니다: {stride}", key="stride")
    return values  # type: ignore[return-value]


@dataclass(frozen=True)
class VoxelCoord:
    """특정 stride에서의 복셀 인덱스"""
    ix: int
    iy: int
    iz: int

    def __iter__(self) -> Iterator[int]:
        return iter((self.ix, self.iy, self.iz))

    def to_array(self) -> np.ndarray:
        return np.array([self.ix, self.iy, self.iz], dtype=np.int64)

    @classmethod
    def from_array(cls, values) -> "VoxelCoord":
        return cls(int(values[0]), int(values[1]), int(values[2]))


@dataclass(frozen=True)
class GridConfig:
    """
    복셀 그리드 설정

    Attributes:
        origin: 그리드 하단 모서리 (m)
        voxel_size: 축별 복셀 크기 (m)
        extent: stride 1 기준 축별 복셀 수
    """
    origin: Vector3 = (0.0, 0.0, 0.0)
    voxel_size: Vector3 = (0.05, 0.05, 0.1)
    extent: tuple[int, int, int] = (64, 64, 32)

    def __post_init__(self):
        object.__setattr__(self, "origin", tuple(float(v) for v in self.origin))
        object.__setattr__(self, "voxel_size", tuple(float(v) for v in self.voxel_size))
        object.__setattr__(self, "extent", tuple(int(v) for v in self.extent))

        if len(self.origin) != 3 or len(self.voxel_size) != 3 or len(self.extent) != 3:
            raise ConfigurationError("origin, voxel_size, extent는 3개의 성분이 필요합니다", key="grid")
        if any(not v > 0 for v in self.voxel_size):
            raise ConfigurationError(f"양수가 아닙니다: {self.voxel_size}", key="grid.voxel_size")
        if any(v < 1 for v in self.extent):
            raise ConfigurationError(f"1 이상이어야 합니다: {self.extent}", key="grid.extent")
        if math.prod(self.extent) >= np.iinfo(np.int64).max:
            raise ConfigurationError("복셀 수가 인덱스 범위를 넘습니다", key="grid.extent")

    @property
    def origin_array(self) -> np.ndarray:
        return np.asarray(self.origin, dtype=np.float64)

    @property
    def voxel_size_array(self) -> np.ndarray:
        return np.asarray(self.voxel_size, dtype=np.float64)

    @property
    def upper(self) -> np.ndarray:
        """그리드 상단 모서리 (m)"""
        return self.origin_array + self.voxel_size_array * np.asarray(self.extent)

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.origin_array + self.upper)

    def dims_at(self, stride: Stride = UNIT_STRIDE) -> tuple[int, int, int]:
        """stride에서의 축별 복셀 수 (올림 나눗셈)"""
        return tuple(-(-e // int(s)) for e, s in zip(self.extent, stride))  # type: ignore[return-value]

    def cell_size(self, stride: Stride = UNIT_STRIDE) -> np.ndarray:
        return self.voxel_size_array * np.asarray(stride, dtype=np.float64)

    def diagonal(self, stride: Stride = UNIT_STRIDE) -> float:
        """stride에서의 복셀 대각선 길이 d_v"""
        return float(np.linalg.norm(self.cell_size(stride)))

    def is_valid(self, coords: np.ndarray, stride: Stride = UNIT_STRIDE) -> np.ndarray:
        """좌표 배열 중 stride에서 유효한 행 마스크"""
        coords = np.asarray(coords, dtype=np.int64).reshape(-1, 3)
        dims = np.asarray(self.dims_at(stride), dtype=np.int64)
        return np.all((coords >= 0) & (coords < dims), axis=1)

    def keys(self, coords: np.ndarray, stride: Stride = UNIT_STRIDE) -> np.ndarray:
        """
        좌표를 정렬 가능한 int64 키로 변환 (x 우선 row-major)

        키 순서는 좌표의 사전식 순서와 같습니다.
        """
        coords = np.asarray(coords, dtype=np.int64).reshape(-1, 3)
        _, ny, nz = self.dims_at(stride)
        return (coords[:, 0] * ny + coords[:, 1]) * nz + coords[:, 2]

    def coords_from_keys(self, keys: np.ndarray, stride: Stride = UNIT_STRIDE) -> np.ndarray:
        keys = np.asarray(keys, dtype=np.int64)
        _, ny, nz = self.dims_at(stride)
        iz = keys % nz
        iy = (keys // nz) % ny
        ix = keys // (ny * nz)
        return np.stack([ix, iy, iz], axis=1)

    def to_dict(self) -> dict:
        return {
            "origin": list(self.origin),
            "voxel_size": list(self.voxel_size),
            "extent": list(self.extent),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GridConfig":
        unknown = set(data) - {"origin", "voxel_size", "extent"}
        if unknown:
            raise ConfigurationError("알 수 없는 키입니다", key=f"grid.{sorted(unknown)[0]}")
        defaults = cls()
        return cls(
            origin=tuple(data.get("origin", defaults.origin)),
            voxel_size=tuple(data.get("voxel_size", defaults.voxel_size)),
            extent=tuple(data.get("extent", defaults.extent)),
        )


@dataclass(frozen=True)
class Ray:
    """
    LiDAR 빔 선분

    Attributes:
        origin: 센서 위치 (m)
        endpoint: 표면 반사점 또는 최대 거리 지점 (m)
        hit: endpoint가 표면 반사점인지 여부
    """
    origin: Vector3
    endpoint: Vector3
    hit: bool = True

    def __post_init__(self):
        object.__setattr__(self, "origin", tuple(float(v) for v in self.origin))
        object.__setattr__(self, "endpoint", tuple(float(v) for v in self.endpoint))
        if self.length <= 0:
            raise ConfigurationError("origin과 endpoint가 같습니다", key="ray")

    @property
    def length(self) -> float:
        return float(np.linalg.norm(np.subtract(self.endpoint, self.origin)))

    def at(self, t: float) -> np.ndarray:
        a = np.asarray(self.origin)
        return a + t * (np.asarray(self.endpoint) - a)


@dataclass
class TraversalStep:
    """traverse 결과 한 칸 (stride 1 복셀과 정규화된 진입/진출 파라미터)"""
    voxel: VoxelCoord
    entry_t: float
    exit_t: float


@dataclass
class TraversalBatch:
    """여러 광선의 traversal 결과 (광선 인덱스 순, 광선 내부는 t 증가 순)"""
    ray_index: np.ndarray
    coords: np.ndarray
    entry_t: np.ndarray
    exit_t: np.ndarray
    ray_count: int = 0

    def __len__(self) -> int:
        return int(self.ray_index.shape[0])
