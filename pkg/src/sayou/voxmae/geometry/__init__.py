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
Geometry
===========================

복셀 그리드 산술, 좌표 변환, 광선-복셀 traversal

Quick Start:
    >>> from sayou.voxmae.geometry import GridConfig, Ray, traverse, world_to_voxel
    >>>
    >>> grid = GridConfig(origin=(0, 0, 0), voxel_size=(1, 1, 1), extent=(4, 1, 1))
    >>> world_to_voxel((2.5, 0.5, 0.5), grid)
    VoxelCoord(ix=2, iy=0, iz=0)
    >>>
    >>> # 선분이 지나는 복셀
    >>> for step in traverse(Ray((0, 0.5, 0.5), (4, 0.5, 0.5)), grid):
    >>>     print(step.voxel, step.entry_t, step.exit_t)

Note:
    면 위의 점은 인덱스가 큰 쪽 셀에 속합니다 (floor 규칙).
"""

__version__ = "0.1.0"
__author__ = "SeongJung Kim"

from .grid import (
    point_segment_distance,
    point_segment_distances,
    voxel_center,
    voxel_centers,
    voxelize,
    world_to_voxel,
    world_to_voxel_batch,
)
from .models import (
    UNIT_STRIDE,
    GridConfig,
    Ray,
    Stride,
    TraversalBatch,
    TraversalStep,
    VoxelCoord,
    as_stride,
)
from .traversal import (
    EPSILON,
    clip_segments,
    traverse,
    traverse_batch,
)

__all__ = [
    # 데이터 모델
    "GridConfig",
    "Ray",
    "Stride",
    "TraversalBatch",
    "TraversalStep",
    "VoxelCoord",
    "UNIT_STRIDE",
    "as_stride",

    # 좌표 변환
    "point_segment_distance",
    "point_segment_distances",
    "voxel_center",
    "voxel_centers",
    "voxelize",
    "world_to_voxel",
    "world_to_voxel_batch",

    # traversal
    "EPSILON",
    "clip_segments",
    "traverse",
    "traverse_batch",
]
