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
합성 장면 생성과 실제 점유(solid) 판정

무작위 박스 장면을 만들고, 복셀 AABB가 박스 내부와 겹치는지 해석적으로 판정합니다.
"""

import logging
import math

import numpy as np

from ..geometry import GridConfig
from .models import Box, Scene

logger = logging.getLogger(__name__)

# 복셀 크기 대비 최소 겹침 깊이
OVERLAP_TOL = 1e-6


def box_overlaps_aabbs(box: Box, lower: np.ndarray, upper: np.ndarray, tol: float = 0.0) -> np.ndarray:
    """
    박스 내부와 AABB들의 양의 부피 겹침 여부 (분리축 판정)

    모든 축에서 겹침 깊이가 tol보다 커야 겹친 것으로 봅니다.

    Args:
        box: yaw 회전 박스
        lower: AABB 하단 (N, 3)
        upper: AABB 상단 (N, 3)
        tol: 최소 겹침 깊이 (m)

    Returns:
        (N,) bool
    """
    c = np.asarray(box.center)
    hx, hy, hz = box.half_size
    cos, sin = abs(math.cos(box.yaw)), abs(math.sin(box.yaw))
    u = np.array([math.cos(box.yaw), math.sin(box.yaw)])
    v = np.array([-math.sin(box.yaw), math.cos(box.yaw)])

    overlap = (lower[:, 2] < c[2] + hz - tol) & (upper[:, 2] > c[2] - hz + tol)

    rx = hx * cos + hy * sin
    ry = hx * sin + hy * cos
    overlap &= (lower[:, 0] < c[0] + rx - tol) & (upper[:, 0] > c[0] - rx + tol)
    overlap &= (lower[:, 1] < c[1] + ry - tol) & (upper[:, 1] > c[1] - ry + tol)

    centers = 0.5 * (lower[:, :2] + upper[:, :2]) - c[:2]
    half_w = 0.5 * (upper[:, :2] - lower[:, :2])
    radius_u = half_w[:, 0] * cos + half_w[:, 1] * sin
    radius_v = half_w[:, 0] * sin + half_w[:, 1] * cos
    overlap &= np.abs(centers @ u) < hx + radius_u - tol
    overlap &= np.abs(centers @ v) < hy + radius_v - tol
    return overlap


def solid_voxels(scene: Scene, grid: GridConfig) -> np.ndarray:
    """
    박스 내부와 겹치는 stride 1 복셀 좌표 (지면 제외)

    면만 맞닿은 복셀은 제외합니다. 격자에 맞춘 박스 면의 부동소수 오차는
    복셀 크기의 OVERLAP_TOL배 이하로 봅니다.

    Returns:
        정렬된 고유 좌표 (M, 3) int64
    """
    keys = []
    extent = np.asarray(grid.extent)
    tol = OVERLAP_TOL * float(np.min(grid.voxel_size_array))
    for box in scene.boxes:
        hx, hy, hz = box.half_size
        cos, sin = abs(math.cos(box.yaw)), abs(math.sin(box.yaw))
        reach = np.array([hx * cos + hy * sin, hx * sin + hy * cos, hz])
        lo = np.floor((np.asarray(box.center) - reach - grid.origin_array) / grid.voxel_size_array).astype(np.int64)
        hi = np.floor((np.asarray(box.center) + reach - grid.origin_array) / grid.voxel_size_array).astype(np.int64)
        lo = np.clip(lo, 0, extent - 1)
        hi = np.clip(hi, 0, extent - 1)
        if np.any(hi < lo):
            continue

        axes = [np.arange(lo[i], hi[i] + 1) for i in range(3)]
        candidates = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
        lower = grid.origin_array + candidates * grid.voxel_size_array
        upper = lower + grid.voxel_size_array
        inside = box_overlaps_aabbs(box, lower, upper, tol=tol)
        keys.append(grid.keys(candidates[inside]))

    if not keys:
        return np.zeros((0, 3), dtype=np.int64)
    return grid.coords_from_keys(np.unique(np.concatenate(keys)))


def random_scene(
    rng: np.random.Generator,
    grid: GridConfig,
    sensor_origin,
    n_boxes: tuple[int, int] = (2, 5),
    size_range: tuple[float, float] = (0.3, 0.9),
    height_range: tuple[float, float] = (0.2, 0.8),
    ground_z: float = 0.0,
    snap: bool = True,
    margin: float = 0.3,
) -> Scene:
    """
    센서의 +x 쪽에 무작위 박스를 배치한 장면

    snap=True이면 박스 면이 격자면 위에 오도록 정렬합니다 (yaw = 0).

    Args:
        rng: 난수 생성기
        grid: 그리드 설정
        sensor_origin: 센서 위치 (m)
        n_boxes: 박스 수 범위 (양 끝 포함)
        size_range: 수평 크기 범위 (m)
        height_range: 높이 범위 (m)
        ground_z: 지면 높이 (박스 바닥)
        snap: 격자 정렬 여부
        margin: 센서와 박스 사이 최소 x 간격 (m)

    Returns:
        Scene
    """
    sensor_origin = np.asarray(sensor_origin, dtype=np.float64)
    vs = grid.voxel_size_array
    lower, upper = grid.origin_array, grid.upper
    count = int(rng.integers(n_boxes[0], n_boxes[1] + 1))

    boxes = []
    for _ in range(count):
        size = np.array([
            rng.uniform(*size_range),
            rng.uniform(*size_range),
            rng.uniform(*height_range),
        ])
        x_lo = sensor_origin[0] + margin
        x_hi = max(x_lo, upper[0] - size[0])
        y_lo, y_hi = lower[1], max(lower[1], upper[1] - size[1])
        corner = np.array([rng.uniform(x_lo, x_hi), rng.uniform(y_lo, y_hi), ground_z])
        yaw = 0.0

        if snap:
            size_vox = np.maximum(np.round(size / vs), 1.0)
            corner_vox = np.floor((corner - lower) / vs)
            corner_vox[2] = np.round((ground_z - lower[2]) / vs[2])
            corner = lower + corner_vox * vs
            size = size_vox * vs
        else:
            yaw = float(rng.uniform(-math.pi, math.pi))

        boxes.append(Box(center=tuple(corner + 0.5 * size), size=tuple(size), yaw=yaw))

    logger.debug("random_scene: %d boxes", len(boxes))
    return Scene(boxes=boxes, ground_z=ground_z)
