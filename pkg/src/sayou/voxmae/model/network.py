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
인코더-디코더 네트워크

voxel masking된 입력을 인코딩하고, 디코더가 stride별 점유 logit을 만들며
pruning으로 원래 해상도의 점유 복셀을 복원합니다.
"""

import logging
from typing import Optional

import numpy as np

from ..errors import EmptyFrameError
from ..geometry import GridConfig, Stride, voxel_centers, voxelize
from ..lidar import LidarFrame, Scene
from ..sparsenn import BatchNormState, Parameter, SparseTensor, Tape
from .decoder import Decoder
from .encoder import Encoder, encoder_input
from .masking import voxel_mask
from .models import DecodeResult, DecoderConfig, EncoderConfig, SafetyLimits, check_architecture

logger = logging.getLogger(__name__)

# 점군만 주어졌을 때 지면 추정에 쓰는 z 백분위
GROUND_PERCENTILE = 1.0


def estimate_ground_z(points: np.ndarray, scene: Optional[Scene] = None) -> Optional[float]:
    """
    지면 높이

    장면이 있으면 scene.ground_z, 아니면 점 z의 1 백분위 (점이 없으면 None).
    """
    if scene is not None:
        return scene.ground_z
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if points.shape[0] == 0:
        return None
    return float(np.percentile(points[:, 2], GROUND_PERCENTILE))


class VoxelReconstructionNetwork:
    """
    masked 복셀 재구성 네트워크

    1. voxelize → voxel masking → 입력 텐서
    2. 희소 인코더 → bottleneck
    3. 생성형 디코더 → stride별 logit 기록과 stride 1 재구성
    """

    def __init__(
        self,
        grid: GridConfig,
        encoder: Optional[EncoderConfig] = None,
        decoder: Optional[DecoderConfig] = None,
        limits: Optional[SafetyLimits] = None,
        seed: int = 0,
        dtype=np.float32,
    ):
        """
        VoxelReconstructionNetwork 초기화

        Args:
            grid: 그리드 설정
            encoder: 인코더 구성
            decoder: 디코더 구성
            limits: 안전 한도
            seed: 파라미터 초기화 시드
            dtype: 파라미터/특징 dtype (gradient 검사는 float64)
        """
        self.grid = grid
        self.encoder_config = encoder or EncoderConfig()
        self.decoder_config = decoder or DecoderConfig()
        self.limits = limits or SafetyLimits()
        self.dtype = np.dtype(dtype)
        check_architecture(self.encoder_config, self.decoder_config)

        rng = np.random.default_rng(seed)
        self.encoder = Encoder(self.encoder_config, rng, self.dtype)
        self.decoder = Decoder(self.decoder_config, self.encoder_config.out_channels, rng, self.dtype)

    @property
    def supervision_strides(self) -> list[Stride]:
        return self.decoder_config.supervision_strides(self.encoder_config.total_stride)

    def parameters(self) -> list[Parameter]:
        return self.encoder.parameters() + self.decoder.parameters()

    def named_parameters(self) -> dict[str, Parameter]:
        return {param.name: param for param in self.parameters()}

    def batch_norms(self) -> dict[str, BatchNormState]:
        return {**self.encoder.batch_norms(), **self.decoder.batch_norms()}

    def zero_grad(self):
        for param in self.parameters():
            param.zero_grad()

    def prepare_input(
        self,
        points: np.ndarray,
        keep_fraction: float = 1.0,
        rng: Optional[np.random.Generator] = None,
    ) -> SparseTensor:
        """
        점군을 voxelize하고 voxel masking한 인코더 입력

        Args:
            points: 점 (M, 3)
            keep_fraction: voxel masking 비율 (1이면 masking 없음)
            rng: masking 난수 생성기
        """
        coords = voxelize(points, self.grid)
        if keep_fraction < 1.0:
            coords = voxel_mask(coords, keep_fraction, rng if rng is not None else np.random.default_rng(0))
        return encoder_input(points, coords, self.grid, self.encoder_config.centroid_offsets, self.dtype)

    def forward(
        self,
        inputs: SparseTensor,
        rng: np.random.Generator,
        training: bool = True,
        tape: Optional[Tape] = None,
        ground_plane_z: Optional[float] = None,
    ) -> DecodeResult:
        """
        인코딩 + 디코딩

        Args:
            inputs: stride 1 입력 텐서
            rng: 무작위 부모 pruning 난수 생성기
            training: 배치 정규화 학습 모드
            tape: gradient 기록용 Tape
            ground_plane_z: 지면 높이 (None이면 limits 값)

        Returns:
            DecodeResult
        """
        if tape is not None and inputs.value_id is None:
            inputs.value_id = tape.new_value()
        bottleneck = self.encoder.forward(inputs, training, tape)
        if ground_plane_z is None:
            ground_plane_z = self.limits.ground_plane_z
        return self.decoder.forward(bottleneck, self.limits.with_ground(ground_plane_z), rng, training, tape)

    def reconstruct(
        self,
        frame: LidarFrame,
        keep_fraction: float = 1.0,
        seed: int = 0,
        ground_plane_z: Optional[float] = None,
    ) -> np.ndarray:
        """
        프레임의 stride 1 점유 복셀 재구성 (추론 모드)

        Returns:
            정렬된 stride 1 좌표 (N, 3), 빈 프레임이면 빈 배열
        """
        rng = np.random.default_rng(seed)
        inputs = self.prepare_input(frame.points, keep_fraction, rng)
        if inputs.is_empty:
            return np.zeros((0, 3), dtype=np.int64)
        if ground_plane_z is None:
            ground_plane_z = self.limits.ground_plane_z
        if ground_plane_z is None:
            ground_plane_z = estimate_ground_z(frame.points)

        try:
            result = self.forward(inputs, rng, training=False, ground_plane_z=ground_plane_z)
        except EmptyFrameError:
            return np.zeros((0, 3), dtype=np.int64)
        logger.debug("reconstruct: input=%d, output=%d", len(inputs), result.final_coords.shape[0])
        return result.final_coords


def reconstruct(
    frame: LidarFrame,
    network: VoxelReconstructionNetwork,
    keep_fraction: float = 1.0,
    seed: int = 0,
    scene: Optional[Scene] = None,
) -> np.ndarray:
    """체크포인트에서 복원한 네트워크로 stride 1 점유 복셀 재구성"""
    ground_plane_z = estimate_ground_z(frame.points, scene) if scene is not None else None
    return network.reconstruct(frame, keep_fraction=keep_fraction, seed=seed, ground_plane_z=ground_plane_z)


def reconstruction_points(coords: np.ndarray, grid: GridConfig) -> np.ndarray:
    """재구성 복셀의 중심 좌표 (PLY 출력용)"""
    return voxel_centers(coords, grid)
