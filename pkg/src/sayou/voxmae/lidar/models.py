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
LiDAR 데이터 모델 정의

센서 모델, range image, 합성 장면(박스/평면), 점군 프레임을 담는 dataclass들을 정의합니다.
"""

import math

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import ConfigurationError
from ..geometry import Ray
from .utils import (
    DEFAULT_COLS,
    DEFAULT_FOV_DOWN_DEG,
    DEFAULT_FOV_UP_DEG,
    DEFAULT_MAX_RANGE,
    DEFAULT_ROWS,
    NO_RETURN,
    SENSOR_KEYS,
    float32_values,
    uniform_inclinations,
    yaw_rotation,
)


@dataclass(eq=False)
class SensorModel:
    """
    회전식 LiDAR 센서 모델

    Attributes:
        rotation: 센서→월드 회전 행렬 (3, 3)
        translation: 센서 위치 (m)
        inclinations: 행별 inclination (radian, 단조)
        azimuth_start: 첫 열의 azimuth (radian)
        azimuth_step: 열 간격 (radian, 양수)
        n_cols: 열 수
        max_range: 최대 거리 (m)
        range_noise: 거리 가우시안 노이즈 σ (m)
        sensor_id: 다중 센서 구분용 id
    """
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))
    inclinations: np.ndarray = field(
        default_factory=lambda: uniform_inclinations(DEFAULT_ROWS, DEFAULT_FOV_UP_DEG, DEFAULT_FOV_DOWN_DEG)
    )
    azimuth_start: float = -math.pi
    azimuth_step: float = 2.0 * math.pi / DEFAULT_COLS
    n_cols: int = DEFAULT_COLS
    max_range: float = DEFAULT_MAX_RANGE
    range_noise: float = 0.0
    sensor_id: int = 0

    def __post_init__(self):
        # 포즈와 각도 테이블은 VRIM 파일과 같은 float32 정밀도로 보관
        self.rotation = float32_values(self.rotation).reshape(3, 3)
        self.translation = float32_values(self.translation).reshape(3)
        self.inclinations = float32_values(self.inclinations).reshape(-1)
        self.azimuth_start = float(float32_values(self.azimuth_start))
        self.azimuth_step = float(float32_values(self.azimuth_step))
        self.max_range = float(float32_values(self.max_range))
        self.n_cols = int(self.n_cols)

        if self.n_cols < 1:
            raise ConfigurationError(f"1 이상이어야 합니다: {self.n_cols}", key="sensor.n_cols")
        if not self.azimuth_step > 0:
            raise ConfigurationError(f"양수여야 합니다: {self.azimuth_step}", key="sensor.azimuth_step")
        if not self.max_range > 0:
            raise ConfigurationError(f"양수여야 합니다: {self.max_range}", key="sensor.max_range")
        if self.range_noise < 0:
            raise ConfigurationError(f"음수일 수 없습니다: {self.range_noise}", key="sensor.range_noise")
        if self.inclinations.size == 0:
            raise ConfigurationError("비어 있습니다", key="sensor.inclinations")
        diffs = np.diff(self.inclinations)
        if diffs.size and not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise ConfigurationError("단조 증가 또는 감소여야 합니다", key="sensor.inclinations")

    @property
    def n_rows(self) -> int:
        return int(self.inclinations.size)

    @property
    def shape(self) -> tuple[int, int]:
        return self.n_rows, self.n_cols

    @property
    def azimuths(self) -> np.ndarray:
        return self.azimuth_start + self.azimuth_step * np.arange(self.n_cols)

    def local_directions(self) -> np.ndarray:
        """센서 좌표계의 단위 방향 (rows, cols, 3)"""
        incl = self.inclinations[:, None]
        azim = self.azimuths[None, :]
        return np.stack(
            np.broadcast_arrays(
                np.cos(incl) * np.cos(azim),
                np.cos(incl) * np.sin(azim),
                np.sin(incl),
            ),
            axis=-1,
        )

    def directions(self) -> np.ndarray:
        """월드 좌표계의 단위 방향 (rows, cols, 3)"""
        return self.local_directions() @ self.rotation.T

    def to_dict(self) -> dict:
        return {
            "sensor_id": self.sensor_id,
            "translation": self.translation.tolist(),
            "rotation": self.rotation.reshape(-1).tolist(),
            "inclinations": self.inclinations.tolist(),
            "azimuth_start": self.azimuth_start,
            "azimuth_step": self.azimuth_step,
            "n_cols": self.n_cols,
            "max_range": self.max_range,
            "range_noise": self.range_noise,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SensorModel":
        """
        딕셔너리에서 SensorModel 인스턴스 생성

        inclinations 대신 n_rows / fov_up_deg / fov_down_deg로 균등 테이블을,
        rotation 대신 yaw로 z축 회전을 지정할 수 있습니다.

        Args:
            data: 센서 설정 딕셔너리 (TOML [sensor] 섹션)

        Returns:
            SensorModel 인스턴스
        """
        unknown = set(data) - SENSOR_KEYS
        if unknown:
            raise ConfigurationError("알 수 없는 키입니다", key=f"sensor.{sorted(unknown)[0]}")

        defaults = cls()
        if "inclinations" in data:
            inclinations = np.asarray(data["inclinations"], dtype=np.float64)
        else:
            inclinations = uniform_inclinations(
                int(data.get("n_rows", DEFAULT_ROWS)),
                float(data.get("fov_up_deg", DEFAULT_FOV_UP_DEG)),
                float(data.get("fov_down_deg", DEFAULT_FOV_DOWN_DEG)),
            )

        if "rotation" in data:
            rotation = np.asarray(data["rotation"], dtype=np.float64).reshape(3, 3)
        else:
            rotation = yaw_rotation(float(data.get("yaw", 0.0)))

        n_cols = int(data.get("n_cols", defaults.n_cols))
        return cls(
            rotation=rotation,
            translation=np.asarray(data.get("translation", defaults.translation), dtype=np.float64),
            inclinations=inclinations,
            azimuth_start=float(data.get("azimuth_start", defaults.azimuth_start)),
            azimuth_step=float(data.get("azimuth_step", 2.0 * math.pi / n_cols)),
            n_cols=n_cols,
            max_range=float(data.get("max_range", defaults.max_range)),
            range_noise=float(data.get("range_noise", 0.0)),
            sensor_id=int(data.get("sensor_id", 0)),
        )


@dataclass(eq=False)
class RangeImage:
    """
    range image (행 = inclination, 열 = azimuth)

    반사가 없는 픽셀은 NO_RETURN (-1.0)입니다. 거리는 float32 정밀도로 보관합니다.
    """
    sensor: SensorModel
    ranges: np.ndarray

    def __post_init__(self):
        self.ranges = float32_values(self.ranges)
        if self.ranges.shape != self.sensor.shape:
            raise ConfigurationError(
                f"ranges shape {self.ranges.shape} != sensor {self.sensor.shape}", key="range_image.ranges"
            )

    @property
    def shape(self) -> tuple[int, int]:
        return self.sensor.shape

    @property
    def valid_mask(self) -> np.ndarray:
        return self.ranges >= 0

    @property
    def n_returns(self) -> int:
        return int(np.count_nonzero(self.valid_mask))

    @property
    def is_empty(self) -> bool:
        return self.n_returns == 0

    def with_ranges(self, ranges: np.ndarray) -> "RangeImage":
        return RangeImage(sensor=self.sensor, ranges=ranges)

    @classmethod
    def empty(cls, sensor: SensorModel) -> "RangeImage":
        return cls(sensor=sensor, ranges=np.full(sensor.shape, NO_RETURN))


@dataclass(frozen=True)
class Box:
    """z축 기준 yaw 회전만 허용하는 박스 (중심, 크기, yaw)"""
    center: tuple[float, float, float]
    size: tuple[float, float, float]
    yaw: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(v) for v in self.center))
        object.__setattr__(self, "size", tuple(float(v) for v in self.size))
        object.__setattr__(self, "yaw", float(self.yaw))
        if any(not s > 0 for s in self.size):
            raise ConfigurationError(f"크기는 양수여야 합니다: {self.size}", key="box.size")

    @property
    def half_size(self) -> np.ndarray:
        return 0.5 * np.asarray(self.size)

    def to_local(self, points: np.ndarray) -> np.ndarray:
        """월드 좌표를 박스 좌표계로 변환"""
        return (np.asarray(points) - np.asarray(self.center)) @ yaw_rotation(self.yaw)

    def to_dict(self) -> dict:
        return {"center": list(self.center), "size": list(self.size), "yaw": self.yaw}


@dataclass(frozen=True)
class HorizontalPlane:
    """무한 수평면 z = const"""
    z: float

    def to_dict(self) -> dict:
        return {"z": self.z}


@dataclass
class Scene:
    """
    합성 장면

    Attributes:
        boxes: 박스 리스트
        planes: 추가 수평면 리스트
        ground_z: 지면 높이 (None이면 지면 없음)
    """
    boxes: list[Box] = field(default_factory=list)
    planes: list[HorizontalPlane] = field(default_factory=list)
    ground_z: Optional[float] = 0.0

    @property
    def all_planes(self) -> list[HorizontalPlane]:
        if self.ground_z is None:
            return list(self.planes)
        return [HorizontalPlane(self.ground_z), *self.planes]

    def to_dict(self) -> dict:
        data: dict = {}
        if self.ground_z is not None:
            data["ground_z"] = self.ground_z
        data["box"] = [box.to_dict() for box in self.boxes]
        data["plane"] = [plane.to_dict() for plane in self.planes]
        return data


@dataclass(eq=False)
class LidarFrame:
    """
    점군 프레임

    Attributes:
        points: 반사점 (N, 3) m
        sensor_ids: 점별 센서 id (N,)
        sensor_origins: 센서 id → 센서 위치
        miss_points: 반사 없는 빔의 최대 거리 지점 (M, 3)
        miss_sensor_ids: miss_points의 센서 id (M,)
    """
    points: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    sensor_ids: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    sensor_origins: dict[int, np.ndarray] = field(default_factory=dict)
    miss_points: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    miss_sensor_ids: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)
        self.sensor_ids = np.asarray(self.sensor_ids, dtype=np.int64).reshape(-1)
        self.miss_points = np.asarray(self.miss_points, dtype=np.float64).reshape(-1, 3)
        self.miss_sensor_ids = np.asarray(self.miss_sensor_ids, dtype=np.int64).reshape(-1)
        self.sensor_origins = {
            int(k): np.asarray(v, dtype=np.float64).reshape(3) for k, v in self.sensor_origins.items()
        }

        if self.sensor_ids.shape[0] != self.points.shape[0]:
            raise ConfigurationError("points와 sensor_ids 길이가 다릅니다", key="frame.sensor_ids")
        if self.miss_sensor_ids.shape[0] != self.miss_points.shape[0]:
            raise ConfigurationError("miss_points와 miss_sensor_ids 길이가 다릅니다", key="frame.miss_sensor_ids")
        missing = set(np.unique(np.concatenate([self.sensor_ids, self.miss_sensor_ids])).tolist()) - set(
            self.sensor_origins
        )
        if missing:
            raise ConfigurationError(f"origin이 없는 센서 id: {sorted(missing)}", key="frame.sensor_origins")

    @property
    def n_points(self) -> int:
        return int(self.points.shape[0])

    @property
    def is_empty(self) -> bool:
        return self.n_points == 0

    def rays(self, include_misses: bool = True) -> list[Ray]:
        """센서 origin에서 각 점까지의 Ray 리스트"""
        rays = [
            Ray(tuple(self.sensor_origins[int(sid)]), tuple(point), hit=True)
            for point, sid in zip(self.points, self.sensor_ids)
        ]
        if include_misses:
            rays.extend(
                Ray(tuple(self.sensor_origins[int(sid)]), tuple(point), hit=False)
                for point, sid in zip(self.miss_points, self.miss_sensor_ids)
            )
        return rays

    def merge(self, other: "LidarFrame") -> "LidarFrame":
        """두 프레임 병합 (다중 LiDAR)"""
        origins = dict(self.sensor_origins)
        for sid, origin in other.sensor_origins.items():
            if sid in origins and not np.array_equal(origins[sid], origin):
                raise ConfigurationError(f"센서 {sid}의 origin이 다릅니다", key="frame.sensor_origins")
            origins[sid] = origin
        return LidarFrame(
            points=np.concatenate([self.points, other.points]),
            sensor_ids=np.concatenate([self.sensor_ids, other.sensor_ids]),
            sensor_origins=origins,
            miss_points=np.concatenate([self.miss_points, other.miss_points]),
            miss_sensor_ids=np.concatenate([self.miss_sensor_ids, other.miss_sensor_ids]),
        )

    def transformed(self, matrix: np.ndarray, offset: np.ndarray) -> "LidarFrame":
        """모든 점과 센서 origin에 p → matrix @ p + offset 적용"""
        matrix = np.asarray(matrix, dtype=np.float64)
        offset = np.asarray(offset, dtype=np.float64)
        return LidarFrame(
            points=self.points @ matrix.T + offset,
            sensor_ids=self.sensor_ids.copy(),
            sensor_origins={sid: matrix @ origin + offset for sid, origin in self.sensor_origins.items()},
            miss_points=self.miss_points @ matrix.T + offset,
            miss_sensor_ids=self.miss_sensor_ids.copy(),
        )

    def select(self, mask: np.ndarray) -> "LidarFrame":
        """점 마스크로 부분 프레임 생성 (miss 빔은 유지)"""
        mask = np.asarray(mask, dtype=bool)
        return LidarFrame(
            points=self.points[mask],
            sensor_ids=self.sensor_ids[mask],
            sensor_origins=dict(self.sensor_origins),
            miss_points=self.miss_points,
            miss_sensor_ids=self.miss_sensor_ids,
        )
