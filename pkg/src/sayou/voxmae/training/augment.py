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
학습 데이터 증강

x/y flip (각 p = 0.5), z축 회전 U[-π/4, π/4], 스케일 U[0.95, 1.05]를
pivot 기준으로 점, 센서 origin, miss 빔에 똑같이 적용합니다.
"""

import math

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..geometry import GridConfig
from ..lidar import LidarFrame, yaw_rotation

FLIP_PROBABILITY = 0.5
MAX_ROTATION = math.pi / 4
SCALE_RANGE = (0.95, 1.05)


@dataclass(frozen=True)
class Augmentation:
    """프레임 하나에 적용할 증강 파라미터"""
    flip_x: bool = False
    flip_y: bool = False
    angle: float = 0.0
    scale: float = 1.0

    @property
    def matrix(self) -> np.ndarray:
        """p → scale · R_z(angle) · diag(±1, ±1, 1) · p"""
        flip = np.diag([-1.0 if self.flip_x else 1.0, -1.0 if self.flip_y else 1.0, 1.0])
        return self.scale * yaw_rotation(self.angle) @ flip

    @property
    def is_identity(self) -> bool:
        return not self.flip_x and not self.flip_y and self.angle == 0.0 and self.scale == 1.0


IDENTITY = Augmentation()


def sample_augmentation(rng: np.random.Generator) -> Augmentation:
    flips = rng.random(2) < FLIP_PROBABILITY
    return Augmentation(
        flip_x=bool(flips[0]),
        flip_y=bool(flips[1]),
        angle=float(rng.uniform(-MAX_ROTATION, MAX_ROTATION)),
        scale=float(rng.uniform(*SCALE_RANGE)),
    )


def augmentation_pivot(grid: GridConfig, ground_z: Optional[float]) -> np.ndarray:
    """그리드 중심의 (x, y)와 지면 높이 (지면이 없으면 그리드 중심 z)"""
    center = grid.center
    return np.array([center[0], center[1], center[2] if ground_z is None else ground_z])


def augment_frame(frame: LidarFrame, augmentation: Augmentation, pivot: np.ndarray) -> LidarFrame:
    """p → M·(p - pivot) + pivot"""
    if augmentation.is_identity:
        return frame
    matrix = augmentation.matrix
    pivot = np.asarray(pivot, dtype=np.float64)
    return frame.transformed(matrix, pivot - matrix @ pivot)
