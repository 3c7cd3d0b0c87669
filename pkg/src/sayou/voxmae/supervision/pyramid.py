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
라벨 피라미드 전파

stride 1 라벨을 더 거친 감독 stride로 전파합니다.

- 덮는 자식 중 하나라도 Occupied → Occupied
- 아니면 그리드 안의 자식이 모두 Empty → Empty,
  weight = max(0, 1 - 2·(자식 min_dist의 최소)/d_v(coarse))
- 그 외 (Unknown 자식 포함) → Unknown
"""

import logging
from typing import Sequence

import numpy as np

from ..errors import ConfigurationError
from ..geometry import UNIT_STRIDE, GridConfig, Stride, as_stride
from .models import LabelMap, LabelPyramid, VoxelCategory, VoxelLabel, to_label
from .utils import distance_weight, group_starts

logger = logging.getLogger(__name__)


def _ordered_strides(strides: Sequence[Stride]) -> list[Stride]:
    """fine → coarse 순으로 정렬하고 이웃 stride가 성분별 배수인지 검사"""
    unique = sorted({as_stride(s) for s in strides}, key=lambda s: (int(np.prod(s)), s))
    previous = UNIT_STRIDE
    for stride in unique:
        if any(c % f for c, f in zip(stride, previous)):
            raise ConfigurationError(
                f"{previous} → {stride} 비율이 2의 거듭제곱이 아닙니다", key="strides"
            )
        previous = stride
    return unique


def coarsen(fine: LabelMap, stride: Stride) -> LabelMap:
    """
    라벨 맵을 한 단계 거친 stride로 전파

    Args:
        fine: 자식 stride의 라벨 맵
        stride: 부모 stride (fine.stride의 성분별 2의 거듭제곱 배)

    Returns:
        부모 stride의 LabelMap
    """
    stride = as_stride(stride)
    grid = fine.grid
    if any(c % f for c, f in zip(stride, fine.stride)):
        raise ConfigurationError(f"{fine.stride} → {stride} 비율이 2의 거듭제곱이 아닙니다", key="strides")
    if len(fine) == 0:
        return LabelMap.empty(grid, stride)

    ratio = np.asarray(stride, dtype=np.int64) // np.asarray(fine.stride, dtype=np.int64)
    parent_keys = grid.keys(fine.coords // ratio, stride)
    order = np.argsort(parent_keys, kind="stable")
    keys, starts = group_starts(parent_keys[order])

    category = fine.category[order]
    dist = np.where(category == VoxelCategory.EMPTY, fine.min_dist[order], np.inf)
    any_occupied = np.maximum.reduceat((category == VoxelCategory.OCCUPIED).astype(np.int64), starts) > 0
    n_empty = np.add.reduceat((category == VoxelCategory.EMPTY).astype(np.int64), starts)
    min_dist = np.minimum.reduceat(dist, starts)

    # 그리드 경계의 부모는 자식이 ratio보다 적을 수 있음
    parents = grid.coords_from_keys(keys, stride)
    fine_dims = np.asarray(grid.dims_at(fine.stride), dtype=np.int64)
    children = np.prod(np.minimum(ratio, fine_dims - parents * ratio), axis=1)

    is_empty = ~any_occupied & (n_empty == children)
    keep = any_occupied | is_empty

    result = LabelMap(
        grid=grid,
        stride=stride,
        keys=keys[keep],
        category=np.where(any_occupied, VoxelCategory.OCCUPIED, VoxelCategory.EMPTY)[keep].astype(np.uint8),
        weight=np.where(any_occupied, 1.0, distance_weight(min_dist, grid.diagonal(stride)))[keep],
        min_dist=np.where(any_occupied, 0.0, min_dist)[keep],
    )
    logger.debug(
        "coarsen %s → %s: %d parents, occupied=%d, empty=%d",
        fine.stride, stride, keys.size, int(any_occupied.sum()), int(is_empty.sum()),
    )
    return result


def build_pyramid(base: LabelMap, grid: GridConfig, strides: Sequence[Stride]) -> LabelPyramid:
    """
    stride 1 라벨에서 감독 stride 전체의 피라미드 생성

    Args:
        base: stride 1 라벨 맵
        grid: 그리드 설정
        strides: 감독 stride 목록 (순서 무관)

    Returns:
        LabelPyramid (maps는 fine → coarse 순)
    """
    if tuple(base.stride) != UNIT_STRIDE:
        raise ConfigurationError(f"stride 1 맵이 필요합니다: {base.stride}", key="base.stride")

    maps: dict[Stride, LabelMap] = {}
    current = base
    for stride in _ordered_strides(strides):
        if stride != current.stride:
            current = coarsen(current, stride)
        maps[stride] = current
    return LabelPyramid(grid=grid, maps=maps)


def lookup(pyramid: LabelPyramid, stride, coords) -> list[VoxelLabel]:
    """
    좌표별 라벨 조회 (맵에 없는 좌표는 Unknown, weight 0)

    Args:
        pyramid: 라벨 피라미드
        stride: 피라미드에 있는 stride
        coords: VoxelCoord 리스트 또는 (N, 3) 배열

    Returns:
        VoxelLabel 리스트
    """
    label_map = pyramid[stride]
    array = np.asarray([tuple(c) for c in coords] if not isinstance(coords, np.ndarray) else coords, dtype=np.int64)
    category, weight, min_dist = label_map.lookup_arrays(array.reshape(-1, 3))
    return [to_label(c, w, d) for c, w, d in zip(category, weight, min_dist)]
