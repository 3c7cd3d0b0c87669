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
Model
===========================

voxel masking, 희소 인코더, pruning 기반 생성형 디코더, 안전 한도

Quick Start:
    >>> from sayou.voxmae.geometry import GridConfig
    >>> from sayou.voxmae.model import VoxelReconstructionNetwork, SafetyLimits
    >>>
    >>> grid = GridConfig(origin=(-1.6, -1.6, -0.4), voxel_size=(0.05, 0.05, 0.1), extent=(64, 64, 32))
    >>> network = VoxelReconstructionNetwork(grid, limits=SafetyLimits(max_voxels=200_000), seed=0)
    >>> network.supervision_strides
    [(8, 8, 8), (4, 4, 4), (2, 2, 2), (1, 1, 1)]
    >>>
    >>> coords = network.reconstruct(frame)
"""

__version__ = "0.1.0"
__author__ = "SeongJung Kim"

from .decoder import Decoder, DecoderBlock, random_parent_mask
from .encoder import Encoder, EncoderStage, encoder_input
from .masking import DEFAULT_KEEP_FRACTION, voxel_mask, voxel_mask_points
from .models import (
    DecodeResult,
    DecoderConfig,
    EncoderConfig,
    SafetyLimits,
    StrideRecord,
    check_architecture,
)
from .network import VoxelReconstructionNetwork, estimate_ground_z, reconstruct, reconstruction_points

__all__ = [
    # 메인 클래스
    "VoxelReconstructionNetwork",

    # 데이터 모델
    "DecodeResult",
    "DecoderConfig",
    "EncoderConfig",
    "SafetyLimits",
    "StrideRecord",
    "check_architecture",

    # 구성 요소
    "Decoder",
    "DecoderBlock",
    "Encoder",
    "EncoderStage",
    "encoder_input",
    "random_parent_mask",

    # masking
    "DEFAULT_KEEP_FRACTION",
    "voxel_mask",
    "voxel_mask_points",

    # 재구성
    "estimate_ground_z",
    "reconstruct",
    "reconstruction_points",
]
