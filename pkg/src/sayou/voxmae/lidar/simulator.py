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
합성 LiDAR 시뮬레이션

박스와 수평면으로 이루어진 장면에 range image의 각 빔을 해석적으로 교차시킵니다.
"""

import logging
from typing import Iterator, Optional

import numpy as np

from ..errors import ConfigurationError
from .models import Box, HorizontalPlane, LidarFrame, RangeImage, Scene, SensorModel
from .utils import NO_RETURN, yaw_rotation

logger = logging.getLogger(__name__)


def intersect_box(origins: np.ndarray, directions: np.ndarray, box: Box) -> np.ndarray:
    """
    광선-박스 교차 거리 (slab 방식)

    Args:
        origins: 광선 시작점 (..., 3)
        directions: 단위 방향 (..., 3)
        box: 박스

    Returns:
        교차 거리 (교차하지 않으면 inf)
    """
    rotation = yaw_rotation(box.yaw)
    local_origin = (np.asarray(origins) - np.asarray(box.center)) @ rotation
    local_dir = np.asarray(directions) @ rotation
    half = box.half_size

    t_near = np.full(local_dir.shape[:-1], -np.inf)
    t_far = np.full(local_dir.shape[:-1], np.inf)
    for axis in range(3):
        o = np.broadcast_to(local_origin[..., axis], t_near.shape)
        d = local_dir[..., axis]
        flat = d == 0.0
        safe = np.where(flat, 1.0, d)
        ta = (-half[axis] - o) / safe
        tb = (half[axis] - o) / safe
        lo = np.where(flat, np.where(np.abs(o) <= half[axis], -np.inf, np.inf), np.minimum(ta, tb))
        hi = np.where(flat, np.where(np.abs(o) <= half[axis], np.inf, -np.inf), np.maximum(ta, tb))
        t_near = np.maximum(t_near, lo)
        t_far = np.minimum(t_far, hi)

    hit = (t_near <= t_far) & (t_far > 0)
    # origin이 박스 안이면 진출점
    t = np.where(t_near > 0, t_near, t_far)
    return np.where(hit, t, np.inf)


def intersect_plane(origins: np.ndarray, directions: np.ndarray, plane: HorizontalPlane) -> np.ndarray:
    """광선-수평면 교차 거리 (교차하지 않으면 inf)"""
    dz = np.asarray(directions)[..., 2]
    oz = np.broadcast_to(np.asarray(origins)[..., 2], dz.shape)
    flat = dz == 0.0
    t = (plane.z - oz) / np.where(flat, 1.0, dz)
    return np.where(~flat & (t > 0), t, np.inf)


def intersect_scene(origins: np.ndarray, directions: np.ndarray, scene: Scene) -> np.ndarray:
    """장면의 모든 primitive 중 가장 가까운 교차 거리"""
    directions = np.asarray(directions, dtype=np.float64)
    nearest = np.full(directions.shape[:-1], np.inf)
    for box in scene.boxes:
        nearest = np.minimum(nearest, intersect_box(origins, directions, box))
    for plane in scene.all_planes:
        nearest = np.minimum(nearest, intersect_plane(origins, directions, plane))
    return nearest


def simulate(scene: Scene, sensor: SensorModel, seed: int = 0) -> RangeImage:
    """
    장면에 대한 range image 생성

    각 (row, col) 빔을 센서 origin에서 (inclination, azimuth) 방향으로 쏘고,
    가장 가까운 교차 거리가 max_range 이하이면 기록합니다.
    range_noise > 0이면 seed로 결정되는 가우시안 노이즈를 더합니다.

    Args:
        scene: 합성 장면
        sensor: 센서 모델
        seed: 노이즈 시드

    Returns:
        RangeImage
    """
    if scene.ground_z is not None and sensor.translation[2] <= scene.ground_z:
        raise ConfigurationError("센서가 지면 아래에 있습니다", key="sensor.translation")

    directions = sensor.directions()
    ranges = intersect_scene(sensor.translation, directions, scene)
    valid = ranges <= sensor.max_range

    if sensor.range_noise > 0:
        rng = np.random.default_rng(seed)
        noise = rng.normal(0.0, sensor.range_noise, size=ranges.shape)
        ranges = np.where(valid, np.clip(ranges + noise, 1e-6, sensor.max_range), ranges)

    # float32로 저장하되 표면 너머로 가지 않도록 센서 쪽으로 내림
    stored = ranges.astype(np.float32)
    stored = np.where(stored > ranges, np.nextafter(stored, np.float32(0.0)), stored)
    ranges = np.where(valid, stored.astype(np.float64), NO_RETURN)
    logger.debug("simulate: %d/%d returns", int(valid.sum()), valid.size)
    return RangeImage(sensor=sensor, ranges=ranges)


def to_points(image: RangeImage, include_misses: bool = False) -> LidarFrame:
    """
    range image를 월드 좌표 점군으로 변환

    Args:
        image: range image
        include_misses: 반사 없는 빔을 최대 거리 miss 빔으로 포함할지 여부

    Returns:
        LidarFrame (반사 픽셀당 한 점)
    """
    sensor = image.sensor
    directions = sensor.directions()
    valid = image.valid_mask
    points = sensor.translation + image.ranges[valid][:, None] * directions[valid]

    miss_points = np.zeros((0, 3))
    if include_misses:
        miss_points = sensor.translation + sensor.max_range * directions[~valid]

    return LidarFrame(
        points=points,
        sensor_ids=np.full(points.shape[0], sensor.sensor_id, dtype=np.int64),
        sensor_origins={sensor.sensor_id: sensor.translation.copy()},
        miss_points=miss_points,
        miss_sensor_ids=np.full(miss_points.shape[0], sensor.sensor_id, dtype=np.int64),
    )


def project_ranges(frame: LidarFrame, sensor: SensorModel) -> np.ndarray:
    """점군의 센서 기준 거리 (to_points의 역변환 검사용)"""
    mask = frame.sensor_ids == sensor.sensor_id
    return np.linalg.norm(frame.points[mask] - sensor.translation, axis=1)


class LidarSimulator:
    """
    합성 LiDAR 시뮬레이터

    1. 장면과 센서 모델 설정
    2. seed별 range image 생성
    3. 점군 프레임 변환
    """

    def __init__(self, scene: Scene, sensor: Optional[SensorModel] = None):
        self.scene = scene
        self.sensor = sensor or SensorModel()

    def simulate(self, seed: int = 0) -> RangeImage:
        return simulate(self.scene, self.sensor, seed)

    def frame(self, seed: int = 0, include_misses: bool = False) -> LidarFrame:
        return to_points(self.simulate(seed), include_misses=include_misses)

    def images(self, n_frames: int, seed: int = 0) -> Iterator[RangeImage]:
        for index in range(n_frames):
            yield self.simulate(seed + index)
