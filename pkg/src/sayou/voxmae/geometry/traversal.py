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
광선-복셀 traversal

Amanatides-Woo 방식의 3D DDA로 선분이 지나는 stride 1 복셀을 순서대로 나열합니다.
광선 파라미터 t는 [0, 1]로 정규화되어 있으며 (origin=0, endpoint=1),
길이가 EPSILON 이하인 교차 구간은 무시합니다.
"""

import logging

import numpy as np

from .models import GridConfig, Ray, TraversalBatch, TraversalStep, VoxelCoord

logger = logging.getLogger(__name__)

# 정규화된 광선 파라미터 기준
EPSILON = 1e-9


def _to_grid_units(points: np.ndarray, grid: GridConfig) -> np.ndarray:
    return (np.asarray(points, dtype=np.float64) - grid.origin_array) / grid.voxel_size_array


def clip_segments(starts: np.ndarray, ends: np.ndarray, grid: GridConfig) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    선분을 그리드 AABB로 slab clipping

    Args:
        starts: 그리드 단위 시작점 (N, 3)
        ends: 그리드 단위 끝점 (N, 3)
        grid: 그리드 설정

    Returns:
        (t0, t1, valid) - valid가 False인 선분은 그리드와 겹치지 않음
    """
    direction = ends - starts
    extent = np.asarray(grid.extent, dtype=np.float64)
    n = starts.shape[0]

    t0 = np.zeros(n)
    t1 = np.ones(n)
    valid = np.ones(n, dtype=bool)

    for axis in range(3):
        d = direction[:, axis]
        a = starts[:, axis]
        flat = d == 0.0
        # 축과 평행한 선분은 floor 규칙으로 판정
        valid &= ~(flat & ((a < 0.0) | (a >= extent[axis])))

        safe = np.where(flat, 1.0, d)
        ta = (0.0 - a) / safe
        tb = (extent[axis] - a) / safe
        lo = np.where(flat, -np.inf, np.minimum(ta, tb))
        hi = np.where(flat, np.inf, np.maximum(ta, tb))
        t0 = np.maximum(t0, lo)
        t1 = np.minimum(t1, hi)

    valid &= (t1 - t0) > EPSILON
    return t0, t1, valid


def traverse(ray: Ray, grid: GridConfig) -> list[TraversalStep]:
    """
    선분 (origin, endpoint)의 내부와 교차하는 stride 1 복셀을 t 증가 순으로 반환

    endpoint를 포함하는 복셀도 목록에 포함됩니다 (카테고리는 호출자가 결정).

    Args:
        ray: 광선
        grid: 그리드 설정

    Returns:
        TraversalStep 리스트 (그리드 밖 선분은 빈 리스트)
    """
    start = _to_grid_units(np.asarray(ray.origin).reshape(1, 3), grid)
    end = _to_grid_units(np.asarray(ray.endpoint).reshape(1, 3), grid)
    t0s, t1s, valid = clip_segments(start, end, grid)
    if not valid[0]:
        return []

    a = start[0]
    d = end[0] - a
    t_start, t_end = float(t0s[0]), float(t1s[0])
    extent = grid.extent

    entry = a + t_start * d
    index = [0, 0, 0]
    step = [0, 0, 0]
    for axis in range(3):
        if d[axis] > 0:
            index[axis] = int(np.floor(entry[axis]))
            step[axis] = 1
        elif d[axis] < 0:
            index[axis] = int(np.ceil(entry[axis])) - 1
            step[axis] = -1
        else:
            index[axis] = int(np.floor(entry[axis]))
        index[axis] = min(max(index[axis], 0), extent[axis] - 1)

    def next_crossing(axis: int) -> float:
        if step[axis] > 0:
            return (index[axis] + 1 - a[axis]) / d[axis]
        if step[axis] < 0:
            return (index[axis] - a[axis]) / d[axis]
        return np.inf

    t_max = [next_crossing(axis) for axis in range(3)]
    steps: list[TraversalStep] = []
    t = t_start

    while True:
        crossing = min(t_max)
        t_next = min(crossing, t_end)
        if t_next - t > EPSILON:
            steps.append(TraversalStep(VoxelCoord(*index), t, t_next))
        if crossing >= t_end - EPSILON:
            break

        # 모서리/꼭짓점 통과: 동시에 도달한 축은 함께 이동
        for axis in range(3):
            if t_max[axis] - crossing <= EPSILON:
                index[axis] += step[axis]
        if any(index[axis] < 0 or index[axis] >= extent[axis] for axis in range(3)):
            break
        t_max = [next_crossing(axis) for axis in range(3)]
        t = crossing

    return steps


def traverse_batch(origins: np.ndarray, endpoints: np.ndarray, grid: GridConfig) -> TraversalBatch:
    """
    여러 선분을 한 번에 traversal (경계 교차 이벤트 병합 방식)

    각 선분의 축별 격자면 교차 파라미터를 모아 정렬하고, 이웃한 교차점 사이 구간의
    중점이 속한 복셀을 기록합니다. traverse와 같은 복셀 집합을 만듭니다.

    Args:
        origins: 선분 시작점 (N, 3) 또는 (3,) - 월드 좌표
        endpoints: 선분 끝점 (N, 3) - 월드 좌표
        grid: 그리드 설정

    Returns:
        TraversalBatch
    """
    endpoints = np.asarray(endpoints, dtype=np.float64).reshape(-1, 3)
    origins = np.broadcast_to(np.asarray(origins, dtype=np.float64), endpoints.shape)
    n_rays = endpoints.shape[0]

    empty = TraversalBatch(
        ray_index=np.zeros(0, dtype=np.int64),
        coords=np.zeros((0, 3), dtype=np.int64),
        entry_t=np.zeros(0),
        exit_t=np.zeros(0),
        ray_count=n_rays,
    )
    if n_rays == 0:
        return empty

    a = _to_grid_units(origins, grid)
    b = _to_grid_units(endpoints, grid)
    d = b - a
    t0, t1, valid = clip_segments(a, b, grid)

    rays = np.nonzero(valid)[0]
    if rays.size == 0:
        return empty

    a, d, t0, t1 = a[rays], d[rays], t0[rays], t1[rays]
    p0 = a + t0[:, None] * d
    p1 = a + t1[:, None] * d

    event_rays = [np.arange(rays.size), np.arange(rays.size)]
    event_ts = [t0, t1]
    for axis in range(3):
        moving = d[:, axis] != 0.0
        lo = np.floor(np.minimum(p0[:, axis], p1[:, axis])).astype(np.int64)
        hi = np.ceil(np.maximum(p0[:, axis], p1[:, axis])).astype(np.int64)
        counts = np.where(moving, hi - lo + 1, 0)
        total = int(counts.sum())
        if total == 0:
            continue

        owner = np.repeat(np.arange(rays.size), counts)
        offsets = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
        planes = lo[owner] + offsets
        ts = (planes - a[owner, axis]) / d[owner, axis]
        inside = (ts > t0[owner]) & (ts < t1[owner])
        event_rays.append(owner[inside])
        event_ts.append(ts[inside])

    owner = np.concatenate(event_rays)
    ts = np.concatenate(event_ts)
    order = np.lexsort((ts, owner))
    owner, ts = owner[order], ts[order]

    same_ray = owner[1:] == owner[:-1]
    ta, tb = ts[:-1], ts[1:]
    keep = same_ray & ((tb - ta) > EPSILON)
    seg_owner = owner[:-1][keep]
    ta, tb = ta[keep], tb[keep]

    middle = a[seg_owner] + (0.5 * (ta + tb))[:, None] * d[seg_owner]
    coords = np.floor(middle).astype(np.int64)
    coords = np.clip(coords, 0, np.asarray(grid.extent, dtype=np.int64) - 1)

    logger.debug("traverse_batch: %d rays, %d voxel crossings", n_rays, coords.shape[0])
    return TraversalBatch(
        ray_index=rays[seg_owner],
        coords=coords,
        entry_t=ta,
        exit_t=tb,
        ray_count=n_rays,
    )
