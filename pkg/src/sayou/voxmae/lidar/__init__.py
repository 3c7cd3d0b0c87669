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
Lidar
===========================

회전식 LiDAR의 range image 모델, 합성 장면 시뮬레이션, spherical masking

Quick Start:
    >>> import numpy as np
    >>> from sayou.voxmae.lidar import Box, LidarSimulator, Scene, SensorModel, spherical_mask
    >>>
    >>> scene = Scene(boxes=[Box(center=(1.5, 0.0, 0.25), size=(0.5, 0.5, 0.5))], ground_z=0.0)
    >>> simulator = LidarSimulator(scene, SensorModel())
    >>> image = simulator.simulate(seed=0)
    >>> masked = spherical_mask(image, m_r=2, m_c=2)
    >>> frame = simulator.frame(seed=0)
    >>> print(frame.n_points)

    >>> # VRIM 파일 저장/로드
    >>> from sayou.voxmae.lidar import RangeImageParser
    >>> parser = RangeImageParser()
    >>> parser.save(image, "frames/000000.vrim")
"""

__version__ = "0.1.0"
__author__ = "SeongJung Kim"

from .masking import (
    expected_keep_fraction,
    sample_mask_params,
    spherical_mask,
    spherical_mask_pattern,
)
from .models import (
    Box,
    HorizontalPlane,
    LidarFrame,
    RangeImage,
    Scene,
    SensorModel,
)
from .parsers import RangeImageParser, SceneParser, SensorParser
from .scenes import box_overlaps_aabbs, random_scene, solid_voxels
from .simulator import (
    LidarSimulator,
    intersect_box,
    intersect_plane,
    intersect_scene,
    project_ranges,
    simulate,
    to_points,
)
from .utils import NO_RETURN, uniform_inclinations, yaw_rotation

__all__ = [
    # 메인 클래스
    "LidarSimulator",

    # 데이터 모델
    "Box",
    "HorizontalPlane",
    "LidarFrame",
    "RangeImage",
    "Scene",
    "SensorModel",

    # 시뮬레이션
    "intersect_box",
    "intersect_plane",
    "intersect_scene",
    "project_ranges",
    "simulate",
    "to_points",

    # 장면
    "box_overlaps_aabbs",
    "random_scene",
    "solid_voxels",

    # masking
    "expected_keep_fraction",
    "sample_mask_params",
    "spherical_mask",
    "spherical_mask_pattern",

    # 파서
    "RangeImageParser",
    "SceneParser",
    "SensorParser",

    # 유틸리티
    "NO_RETURN",
    "uniform_inclinations",
    "yaw_rotation",
]
