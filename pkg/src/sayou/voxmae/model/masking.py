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
voxel masking

voxelize된 stride 1 점유 복셀 중 keep_fraction만큼을 균등 무작위로 남깁니다.
"""

import numpy as np

from ..errors import ConfigurationError
from ..geometry import GridConfig, world_to_voxel_batch

DEFAULT_KEEP_FRACTION = 0.6


def _check_fraction(keep_fraction: float):
    if not 0.0 < keep_fraction <= 1.0:
        raise ConfigurationError(f"(0, 1] 범위가 아닙니다: {keep_fraction}", key="masking.keep_fraction")


def voxel_mask(coords: np.ndarray, keep_fraction: float, rng: np.random.Generator) -> np.ndarray:
    """
    점유 복셀의 균등 무작위 부분집합

    Args:
        coords: 정렬된 고유 stride 1 좌표 (N, 3)
        keep_fraction: 남길 비율 (0, 1]
        rng: 난수 생성기

    Returns:
        floor(keep_fraction·N + 0.5)개의 좌표 (입력 순서 유지)
    """
    _check_fraction(keep_fraction)
    coords = np.asarray(coords, dtype=np.int64).reshape(-1, 3)
    n = coords.shape[0]
    if n == 0 or keep_fraction == 1.0:
        return coords.copy()
    n_keep = int(np.floor(keep_fraction * n + 0.5))
    rows = np.sort(rng.choice(n, size=n_keep, replace=False))
    return coords[rows]


def voxel_mask_points(
    points: np.ndarray,
    grid: GridConfig,
    keep_fraction: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """
    점 단위 voxel masking 마스크 (남은 복셀에 속한 점만 True)

    그리드 밖 점은 False입니다.
    """
    _check_fraction(keep_fraction)
    coords, inside = world_to_voxel_batch(points, grid)
    keep = np.zeros(coords.shape[0], dtype=bool)
    if not inside.any():
        return keep

    keys = grid.keys(coords[inside])
    unique = np.unique(keys)
    kept = grid.keys(voxel_mask(grid.coords_from_keys(unique), keep_fraction, rng))
    keep[np.nonzero(inside)[0]] = np.isin(keys, kept)
    return keep
