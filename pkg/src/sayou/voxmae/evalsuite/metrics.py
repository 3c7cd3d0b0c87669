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
재구성 평가

합성 장면의 해석적 점유(박스 내부)와 원본 프레임의 stride 1 라벨로
재구성 복셀의 Occupied recall, Empty 오탐률, Unknown 완성 recall을 계산합니다.
"""

import logging
from typing import Iterable, Optional, Sequence

import numpy as np

from ..errors import ConfigurationError
from ..geometry import UNIT_STRIDE, GridConfig
from ..lidar import Scene, solid_voxels
from ..model import VoxelReconstructionNetwork, estimate_ground_z
from ..supervision import Categorizer, LabelPyramid, VoxelCategory
from ..training import TrainingFrame, images_to_frame
from .models import ReconMetrics

logger = logging.getLogger(__name__)


def evaluate_reconstruction(
    recon: np.ndarray,
    scene: Scene,
    pyramid: LabelPyramid,
    grid: GridConfig,
    frame: str = "",
) -> ReconMetrics:
    """
    재구성 복셀 평가

    Args:
        recon: stride 1 재구성 좌표 (N, 3)
        scene: 정답 장면
        pyramid: 마스킹 전 원본 프레임의 라벨 피라미드 (stride 1 포함)
        grid: 그리드 설정
        frame: 보고서용 프레임 이름

    Returns:
        ReconMetrics
    """
    base = pyramid[UNIT_STRIDE]
    recon = np.asarray(recon, dtype=np.int64).reshape(-1, 3)
    inside = grid.is_valid(recon)
    if not inside.all():
        logger.warning("그리드 밖 재구성 복셀 %d개 제외", int(np.count_nonzero(~inside)))
    recon_keys = np.unique(grid.keys(recon[inside]))

    occupied = base.keys_of(VoxelCategory.OCCUPIED)
    empty = base.keys_of(VoxelCategory.EMPTY)
    solid = grid.keys(solid_voxels(scene, grid))
    unknown_solid = np.setdiff1d(solid, base.keys, assume_unique=True)

    return ReconMetrics(
        n_recon=int(recon_keys.size),
        n_occupied=int(occupied.size),
        n_occupied_hit=int(np.isin(occupied, recon_keys, assume_unique=True).sum()),
        n_empty=int(empty.size),
        n_empty_hit=int(np.isin(empty, recon_keys, assume_unique=True).sum()),
        n_unknown_solid=int(unknown_solid.size),
        n_unknown_solid_hit=int(np.isin(unknown_solid, recon_keys, assume_unique=True).sum()),
        frame=frame,
    )


class ReconstructionEvaluator:
    """
    네트워크 재구성 평가기

    1. 원본 프레임의 stride 1 라벨 생성
    2. 네트워크 추론으로 stride 1 재구성
    3. evaluate_reconstruction
    """

    def __init__(
        self,
        network: VoxelReconstructionNetwork,
        keep_fraction: float = 1.0,
        seed: int = 0,
        include_misses: bool = False,
    ):
        """
        ReconstructionEvaluator 초기화

        Args:
            network: 평가할 네트워크
            keep_fraction: 추론 입력의 voxel masking 비율
            seed: 추론 난수 시드
            include_misses: 라벨 생성 시 miss 빔 사용 여부
        """
        self.network = network
        self.keep_fraction = keep_fraction
        self.seed = seed
        self.include_misses = include_misses
        self.categorizer = Categorizer(network.grid, [UNIT_STRIDE], include_misses=include_misses)

    def evaluate(self, frame: TrainingFrame, name: Optional[str] = None) -> ReconMetrics:
        if frame.scene is None:
            raise ConfigurationError("평가에는 정답 장면이 필요합니다", key="scene")

        original = images_to_frame(frame.images, include_misses=self.include_misses)
        pyramid = self.categorizer.pyramid(original)
        ground_z = estimate_ground_z(original.points, frame.scene)
        recon = self.network.reconstruct(
            original,
            keep_fraction=self.keep_fraction,
            seed=self.seed,
            ground_plane_z=ground_z,
        )
        name = name if name is not None else f"frame_{frame.frame_id:06d}"
        metrics = evaluate_reconstruction(recon, frame.scene, pyramid, self.network.grid, frame=name)
        logger.debug(
            "%s: recon=%d occupied_recall=%s completion=%s",
            name, metrics.n_recon, metrics.occupied_recall, metrics.unknown_completion_recall,
        )
        return metrics

    def evaluate_all(self, frames: Iterable[TrainingFrame], names: Optional[Sequence[str]] = None) -> list[ReconMetrics]:
        results = []
        for index, frame in enumerate(frames):
            results.append(self.evaluate(frame, names[index] if names is not None else None))
        logger.info("평가 완료: %d frames", len(results))
        return results
