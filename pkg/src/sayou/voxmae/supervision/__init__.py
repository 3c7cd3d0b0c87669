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
Supervision
===========================

원본 점군의 빔 traversal로 Occupied / Empty / Unknown 복셀 라벨과 거리 가중치를 만들고,
디코더 감독 stride 전체로 전파합니다.

Quick Start:
    >>> from sayou.voxmae.geometry import GridConfig
    >>> from sayou.voxmae.supervision import Categorizer, VoxelCategory, lookup
    >>>
    >>> grid = GridConfig(origin=(-1.6, -1.6, -0.4), voxel_size=(0.05, 0.05, 0.1), extent=(64, 64, 32))
    >>> categorizer = Categorizer(grid)
    >>> pyramid = categorizer.pyramid(frame)
    >>> print(pyramid.summary())
    >>>
    >>> labels = lookup(pyramid, (8, 8, 8), [(4, 4, 2)])
    >>> labels[0].category
    <VoxelCategory.EMPTY: 1>

Note:
    라벨은 항상 마스킹 전 원본 프레임에서 계산합니다.
"""

__version__ = "0.1.0"
__author__ = "SeongJung Kim"

from .categorizer import Categorizer, categorize
from .models import (
    UNKNOWN_LABEL,
    LabelMap,
    LabelPyramid,
    VoxelCategory,
    VoxelLabel,
    to_label,
)
from .parsers import LabelParser
from .pyramid import build_pyramid, coarsen, lookup
from .utils import DEFAULT_STRIDES, distance_weight

__all__ = [
    # 메인 클래스
    "Categorizer",

    # 데이터 모델
    "LabelMap",
    "LabelPyramid",
    "VoxelCategory",
    "VoxelLabel",
    "UNKNOWN_LABEL",
    "to_label",

    # 분류 / 전파
    "build_pyramid",
    "categorize",
    "coarsen",
    "lookup",

    # 파서
    "LabelParser",

    # 유틸리티
    "DEFAULT_STRIDES",
    "distance_weight",
]
