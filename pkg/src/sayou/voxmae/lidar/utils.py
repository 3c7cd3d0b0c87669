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

import math

import numpy as np

# 반사 없음 표시 (음수 sentinel)
NO_RETURN = -1.0

_VRIM_MAGIC_ = b"VRIM"
_VRIM_VERSION_ = 1

# spherical masking 정수 범위 (양 끝 포함)
MASK_MIN = 1
MASK_MAX = 4

DEFAULT_ROWS = 32
DEFAULT_COLS = 64
DEFAULT_FOV_UP_DEG = 10.0
DEFAULT_FOV_DOWN_DEG = -40.0
DEFAULT_MAX_RANGE = 5.0

SCENE_KEYS = {"ground_z", "box", "plane"}
BOX_KEYS = {"center", "size", "yaw"}
PLANE_KEYS = {"z"}
SENSOR_KEYS = {
    "sensor_id",
    "translation",
    "rotation",
    "yaw",
    "inclinations",
    "n_rows",
    "fov_up_deg",
    "fov_down_deg",
    "azimuth_start",
    "azimuth_step",
    "n_cols",
    "max_range",
    "range_noise",
}


def uniform_inclinations(n_rows: int, fov_up_deg: float, fov_down_deg: float) -> np.ndarray:
    """위에서 아래로 균등한 inclination 테이블 (radian)"""
    if n_rows == 1:
        return np.array([math.radians(fov_up_deg)])
    return np.radians(np.linspace(fov_up_deg, fov_down_deg, n_rows))


def yaw_rotation(yaw: float) -> np.ndarray:
    """z축 회전 행렬"""
    c, s = math.cos(yaw), math.sin(yaw)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def float32_values(values) -> np.ndarray:
    """float32로 표현 가능한 값으로 반올림한 float64 배열 (VRIM 파일에 저장되는 정밀도)"""
    return np.asarray(values, dtype=np.float64).astype(np.float32).astype(np.float64)
