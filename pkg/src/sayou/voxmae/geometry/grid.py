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
복셀 그리드 좌표 변환

월드 좌표 ↔ 복셀 좌표 변환과 점-선분 거리 계산을 제공합니다.
모든 함수는 불변 입력에 대한 순수 함수입니다.
"""

from typing import Optional

import numpy as np

from .models import UNIT_STRIDE, GridConfig, Stride, VoxelCoord, as_stride


def world_to_voxel(
    point,
    grid: GridConfig,
    stride: Stride = UNIT_STRIDE,
) -> Optional[VoxelCoord]:
    """
    월드 좌표를 stride의 복셀 좌표로 변환

    면 위의 점은 floor 규칙에 따라 인덱스가 큰 쪽 셀에 속합니다.

    Args:
        point: 월드 좌표 (m)
        grid: 그리드 설정
        stride: 텐서 stride (2의 거듭제곱)

    Returns:
        VoxelCoord (그리드 밖이면 None)
    """
    coords, inside = world_to_voxel_batch(np.asarray(point, dtype=np.float64).reshape(1, 3), grid, stride)
    if not inside[0]:
        return None
    return VoxelCoord.from_array(coords[0])


def world_to_voxel_batch(
    points: np.ndarray,
    grid: GridConfig,
    stride: Stride = UNIT_STRIDE,
) -> tuple[np.ndarray, np.ndarray]:
    """
    월드 좌표 배열을 복셀 좌표로 변환

    Returns:
        (coords (N, 3) int64, inside (N,) bool)
    """
    stride = as_stride(stride)
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    unit = np.floor((points - grid.origin_array) / grid.voxel_size_array).astype(np.int64)
    inside = np.all((unit >= 0) & (unit < np.asarray(grid.extent)), axis=1)
    coords = np.floor_divide(unit, np.asarray(stride, dtype=np.int64))
    return coords, inside


def voxel_center(
    voxel: VoxelCoord,
    grid: GridConfig,
    stride: Stride = UNIT_STRIDE,
) -> np.ndarray:
    """복셀 중심의 월드 좌표: origin + voxel_size ⊙ stride ⊙ (v + 0.5)"""
    return voxel_centers(np.asarray(tuple(voxel), dtype=np.int64).reshape(1, 3), grid, stride)[0]


def voxel_centers(coords: np.ndarray, grid: GridConfig, stride: Stride = UNIT_STRIDE) -> np.ndarray:
    coords = np.asarray(coords, dtype=np.float64).reshape(-1, 3)
    return grid.origin_array + grid.cell_size(stride) * (coords + 0.5)


def point_segment_distance(p, a, b) -> float:
    """
    점 p에서 닫힌 선분 [a, b]까지의 유클리드 거리

    Args:
        p: 점 (m)
        a: 선분 시작점 (m)
        b: 선분 끝점 (m, a와 달라야 함)
    """
    return float(point_segment_distances(
        np.asarray(p, dtype=np.float64).reshape(1, 3),
        np.asarray(a, dtype=np.float64).reshape(1, 3),
        np.asarray(b, dtype=np.float64).reshape(1, 3),
    )[0])


def point_segment_distances(points: np.ndarray, starts: np.ndarray, ends: np.ndarray) -> np.ndarray:
    """행 단위 점-선분 거리 (브로드캐스팅 지원)"""
    points = np.asarray(points, dtype=np.float64)
    starts = np.asarray(starts, dtype=np.float64)
    ends = np.asarray(ends, dtype=np.float64)

    direction = ends - starts
    length_sq = np.sum(direction * direction, axis=-1)
    t = np.sum((points - starts) * direction, axis=-1) / np.where(length_sq > 0, length_sq, 1.0)
    t = np.clip(t, 0.0, 1.0)
    closest = starts + t[..., None] * direction
    return np.linalg.norm(points - closest, axis=-1)


def voxelize(points: np.ndarray, grid: GridConfig, stride: Stride = UNIT_STRIDE) -> np.ndarray:
    """
    점군을 stride의 고유 복셀 좌표 집합으로 변환 (그리드 밖 점은 제외)

    Returns:
        정렬된 고유 좌표 (M, 3) int64
    """
    coords, inside = world_to_voxel_batch(points, grid, stride)
    coords = coords[inside]
    if coords.shape[0] == 0:
        return np.zeros((0, 3), dtype=np.int64)
    keys = np.unique(grid.keys(coords, stride))
    return grid.coords_from_keys(keys, stride)
