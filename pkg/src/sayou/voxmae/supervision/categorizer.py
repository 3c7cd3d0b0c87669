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
복셀 카테고리 분류

원본(마스킹 전) 점군의 각 빔을 센서 origin에서 반사점까지 traversal하여
stride 1 복셀을 Occupied / Empty / Unknown으로 분류하고 Empty 가중치를 계산합니다.
"""

import logging
from typing import Optional, Sequence

import numpy as np

from ..geometry import (
    GridConfig,
    Stride,
    point_segment_distances,
    traverse_batch,
    voxel_centers,
    voxelize,
    world_to_voxel_batch,
)
from ..lidar import LidarFrame
from .models import LabelMap, LabelPyramid, VoxelCategory
from .pyramid import build_pyramid
from .utils import DEFAULT_STRIDES, distance_weight, group_starts

logger = logging.getLogger(__name__)


def _segments(frame: LidarFrame, include_misses: bool) -> tuple[np.ndarray, np.ndarray]:
    """(origins, endpoints) - 반사 빔 다음에 miss 빔"""
    origins = [np.array([frame.sensor_origins[int(s)] for s in frame.sensor_ids]).reshape(-1, 3)]
    endpoints = [frame.points]
    if include_misses and frame.miss_points.shape[0]:
        origins.append(np.array([frame.sensor_origins[int(s)] for s in frame.miss_sensor_ids]).reshape(-1, 3))
        endpoints.append(frame.miss_points)
    return np.concatenate(origins), np.concatenate(endpoints)


def categorize(frame: LidarFrame, grid: GridConfig, include_misses: bool = True) -> LabelMap:
    """
    stride 1 복셀 분류

    - 반사점을 포함하는 복셀: Occupied (weight 1)
    - 빔이 통과한 나머지 복셀: Empty, weight = max(0, 1 - 2·d/d_v)
      (d = 복셀 중심에서 통과한 빔 선분들까지의 최소 거리)
    - 그 외: Unknown (맵에 없음)

    miss 빔은 통과 복셀을 Empty로만 만듭니다.
    다중 센서 프레임은 센서별 origin에서 빔을 쏩니다.

    Args:
        frame: 마스킹 전 원본 프레임
        grid: 그리드 설정
        include_misses: 프레임의 miss 빔 사용 여부

    Returns:
        stride 1 LabelMap
    """
    if frame.is_empty and (not include_misses or frame.miss_points.shape[0] == 0):
        logger.debug("categorize: 빈 프레임 - 모두 Unknown")
        return LabelMap.empty(grid)

    occupied_keys = grid.keys(voxelize(frame.points, grid))
    _, inside = world_to_voxel_batch(frame.points, grid)
    outside = frame.n_points - int(np.count_nonzero(inside))
    if outside:
        logger.debug("categorize: 그리드 밖 점 %d개 제외", outside)

    origins, endpoints = _segments(frame, include_misses)
    moving = np.any(origins != endpoints, axis=1)
    origins, endpoints = origins[moving], endpoints[moving]
    batch = traverse_batch(origins, endpoints, grid)

    crossing_keys = grid.keys(batch.coords)
    distances = point_segment_distances(
        voxel_centers(batch.coords, grid),
        origins[batch.ray_index],
        endpoints[batch.ray_index],
    )

    order = np.argsort(crossing_keys, kind="stable")
    traversed_keys, starts = group_starts(crossing_keys[order])
    if traversed_keys.size:
        traversed_dist = np.minimum.reduceat(distances[order], starts)
    else:
        traversed_dist = np.zeros(0)

    is_empty = ~np.isin(traversed_keys, occupied_keys, assume_unique=True)
    empty_keys = traversed_keys[is_empty]
    empty_dist = traversed_dist[is_empty]

    keys = np.concatenate([occupied_keys, empty_keys])
    category = np.concatenate([
        np.full(occupied_keys.size, VoxelCategory.OCCUPIED, dtype=np.uint8),
        np.full(empty_keys.size, VoxelCategory.EMPTY, dtype=np.uint8),
    ])
    weight = np.concatenate([np.ones(occupied_keys.size), distance_weight(empty_dist, grid.diagonal())])
    min_dist = np.concatenate([np.zeros(occupied_keys.size), empty_dist])

    order = np.argsort(keys, kind="stable")
    label_map = LabelMap(
        grid=grid,
        keys=keys[order],
        category=category[order],
        weight=weight[order],
        min_dist=min_dist[order],
    )
    logger.debug(
        "categorize: %d rays, occupied=%d, empty=%d",
        batch.ray_count, occupied_keys.size, empty_keys.size,
    )
    return label_map


class Categorizer:
    """
    supervision 라벨 생성기

    1. 원본 프레임의 stride 1 분류
    2. 디코더 감독 stride로 피라미드 전파
    """

    def __init__(
        self,
        grid: GridConfig,
        strides: Sequence[Stride] = DEFAULT_STRIDES,
        include_misses: bool = True,
    ):
        """
        Categorizer 초기화

        Args:
            grid: 그리드 설정
            strides: 감독 stride 목록
            include_misses: miss 빔 사용 여부
        """
        self.grid = grid
        self.strides = [tuple(int(v) for v in s) for s in strides]
        self.include_misses = include_misses

    def categorize(self, frame: LidarFrame) -> LabelMap:
        return categorize(frame, self.grid, include_misses=self.include_misses)

    def pyramid(self, frame: LidarFrame, base: Optional[LabelMap] = None) -> LabelPyramid:
        """프레임(또는 미리 계산한 stride 1 맵)의 라벨 피라미드"""
        if base is None:
            base = self.categorize(frame)
        return build_pyramid(base, self.grid, self.strides)
