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
희소 인코더

단계마다 submanifold 3×3×3 → BN → ReLU → strided 합성곱 (커널 = stride) → BN → ReLU.
마지막 단계의 출력이 디코더 입력(bottleneck)입니다.
"""

import logging

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import EmptyFrameError
from ..geometry import GridConfig, voxel_centers, world_to_voxel_batch
from ..sparsenn import (
    BatchNormState,
    ConvParams,
    Parameter,
    SparseTensor,
    Tape,
    batch_norm,
    make_batch_norm,
    make_conv,
    relu,
    strided_sparse_conv,
    submanifold_conv,
)
from .models import EncoderConfig

logger = logging.getLogger(__name__)


def encoder_input(
    points: np.ndarray,
    coords: np.ndarray,
    grid: GridConfig,
    centroid_offsets: bool = False,
    dtype=np.float32,
) -> SparseTensor:
    """
    인코더 입력 텐서

    복셀마다 점유 지시값 1, centroid_offsets이면 복셀에 속한 점들의 평균 위치와
    복셀 중심의 차이(복셀 단위) 3채널을 덧붙입니다.

    Args:
        points: 마스킹 후 점 (M, 3)
        coords: 마스킹 후 stride 1 복셀 좌표 (N, 3)
        grid: 그리드 설정
        centroid_offsets: 오프셋 채널 사용 여부
        dtype: 특징 dtype

    Returns:
        stride 1 SparseTensor
    """
    coords = np.asarray(coords, dtype=np.int64).reshape(-1, 3)
    order = np.argsort(grid.keys(coords), kind="stable")
    coords = coords[order]
    features = np.ones((coords.shape[0], 1))

    if centroid_offsets:
        sums = np.zeros((coords.shape[0], 3))
        counts = np.zeros(coords.shape[0])
        point_coords, inside = world_to_voxel_batch(points, grid)
        if coords.shape[0] and inside.any():
            keys = grid.keys(coords)
            point_keys = grid.keys(point_coords[inside])
            rows = np.minimum(np.searchsorted(keys, point_keys), keys.size - 1)
            hit = keys[rows] == point_keys
            inside_points = np.asarray(points, dtype=np.float64).reshape(-1, 3)[inside][hit]
            np.add.at(sums, rows[hit], inside_points)
            counts = np.bincount(rows[hit], minlength=coords.shape[0]).astype(np.float64)
        means = np.where(counts[:, None] > 0, sums / np.maximum(counts, 1.0)[:, None], voxel_centers(coords, grid))
        offsets = (means - voxel_centers(coords, grid)) / grid.voxel_size_array
        features = np.concatenate([features, offsets], axis=1)

    return SparseTensor(coords, features.astype(dtype), (1, 1, 1), grid)


@dataclass(eq=False)
class EncoderStage:
    """인코더 한 단계의 파라미터"""
    ssc: ConvParams
    bn1: BatchNormState
    down: ConvParams
    bn2: BatchNormState


class Encoder:
    """희소 인코더"""

    def __init__(self, config: EncoderConfig, rng: np.random.Generator, dtype=np.float32):
        """
        Encoder 초기화

        Args:
            config: 인코더 구성
            rng: 초기화 난수 생성기
            dtype: 파라미터 dtype
        """
        self.config = config
        self.stages: list[EncoderStage] = []
        in_channels = config.in_channels
        for index, (channels, stride) in enumerate(zip(config.channels, config.strides)):
            name = f"encoder.{index}"
            self.stages.append(EncoderStage(
                ssc=make_conv(f"{name}.ssc", in_channels, channels, (3, 3, 3), (1, 1, 1), rng, dtype),
                bn1=make_batch_norm(f"{name}.bn1", channels, dtype),
                down=make_conv(f"{name}.down", channels, channels, stride, stride, rng, dtype),
                bn2=make_batch_norm(f"{name}.bn2", channels, dtype),
            ))
            in_channels = channels

    def parameters(self) -> list[Parameter]:
        params = []
        for stage in self.stages:
            params += stage.ssc.parameters() + stage.bn1.parameters()
            params += stage.down.parameters() + stage.bn2.parameters()
        return params

    def batch_norms(self) -> dict[str, BatchNormState]:
        result = {}
        for index, stage in enumerate(self.stages):
            result[f"encoder.{index}.bn1"] = stage.bn1
            result[f"encoder.{index}.bn2"] = stage.bn2
        return result

    def forward(self, x: SparseTensor, training: bool = True, tape: Optional[Tape] = None) -> SparseTensor:
        """
        인코딩

        Args:
            x: stride 1 입력 텐서
            training: 배치 정규화 학습 모드
            tape: gradient 기록용 Tape

        Returns:
            bottleneck SparseTensor (stride = config.total_stride)
        """
        if x.is_empty:
            raise EmptyFrameError("인코더 입력 복셀이 없습니다")

        for index, stage in enumerate(self.stages):
            x = relu(batch_norm(submanifold_conv(x, stage.ssc, tape), stage.bn1, training, tape), tape)
            x = relu(batch_norm(strided_sparse_conv(x, stage.down, tape), stage.bn2, training, tape), tape)
            logger.debug("encoder stage %d: stride=%s, active=%d", index, x.stride, len(x))
        return x
