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
생성형 희소 디코더

블록마다:
    1. 업샘플 후 복셀 수가 max_voxels를 넘을 수 있으면 부모를 무작위로 줄임
    2. generative transposed 합성곱 → BN → ReLU → submanifold 3×3×3 → BN → ReLU → 1×1×1 head
    3. pruning 전 (좌표, logit) 기록
    4. 중심이 지면보다 ground_margin 이상 아래인 복셀 제거
    5. 확률 < 0.5 (logit < 0)인 복셀 제거, 동률은 유지
"""

import logging
import math

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..geometry import voxel_centers
from ..sparsenn import (
    BatchNormState,
    ConvParams,
    Parameter,
    SparseTensor,
    Tape,
    batch_norm,
    generative_transposed_conv,
    make_batch_norm,
    make_conv,
    occupancy_head,
    prune,
    relu,
    submanifold_conv,
)
from .models import DecodeResult, DecoderConfig, SafetyLimits, StrideRecord

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class DecoderBlock:
    """디코더 블록 파라미터"""
    up: ConvParams
    bn1: BatchNormState
    ssc: ConvParams
    bn2: BatchNormState
    head: ConvParams

    @property
    def kernel_volume(self) -> int:
        return math.prod(self.up.kernel_size)


def random_parent_mask(n_parents: int, kernel_volume: int, max_voxels: int, rng: np.random.Generator) -> np.ndarray:
    """
    업샘플 최악 자식 수 (부모 수 × 커널 부피)가 max_voxels 이하가 되도록 남길 부모 마스크

    Returns:
        (n_parents,) bool
    """
    keep = np.ones(n_parents, dtype=bool)
    if n_parents * kernel_volume <= max_voxels:
        return keep
    n_keep = max_voxels // kernel_volume
    keep[:] = False
    keep[rng.choice(n_parents, size=n_keep, replace=False)] = True
    return keep


class Decoder:
    """생성형 희소 디코더"""

    def __init__(self, config: DecoderConfig, in_channels: int, rng: np.random.Generator, dtype=np.float32):
        """
        Decoder 초기화

        점유 head는 weight와 bias를 0으로 초기화하므로 학습 전 모든 복셀의 확률은 0.5입니다.

        Args:
            config: 디코더 구성
            in_channels: bottleneck 채널
            rng: 초기화 난수 생성기
            dtype: 파라미터 dtype
        """
        self.config = config
        self.blocks: list[DecoderBlock] = []
        for index, (channels, kernel, stride) in enumerate(zip(config.channels, config.kernels, config.strides)):
            name = f"decoder.{index}"
            self.blocks.append(DecoderBlock(
                up=make_conv(f"{name}.up", in_channels, channels, kernel, stride, rng, dtype),
                bn1=make_batch_norm(f"{name}.bn1", channels, dtype),
                ssc=make_conv(f"{name}.ssc", channels, channels, (3, 3, 3), (1, 1, 1), rng, dtype),
                bn2=make_batch_norm(f"{name}.bn2", channels, dtype),
                head=make_conv(f"{name}.head", channels, 1, (1, 1, 1), (1, 1, 1), rng, dtype, zero=True),
            ))
            in_channels = channels

    def parameters(self) -> list[Parameter]:
        params = []
        for block in self.blocks:
            params += block.up.parameters() + block.bn1.parameters()
            params += block.ssc.parameters() + block.bn2.parameters()
            params += block.head.parameters()
        return params

    def batch_norms(self) -> dict[str, BatchNormState]:
        result = {}
        for index, block in enumerate(self.blocks):
            result[f"decoder.{index}.bn1"] = block.bn1
            result[f"decoder.{index}.bn2"] = block.bn2
        return result

    def forward(
        self,
        bottleneck: SparseTensor,
        limits: SafetyLimits,
        rng: np.random.Generator,
        training: bool = True,
        tape: Optional[Tape] = None,
    ) -> DecodeResult:
        """
        디코딩

        Args:
            bottleneck: 인코더 출력
            limits: 안전 한도 (ground_plane_z 포함)
            rng: 무작위 부모 pruning용 난수 생성기
            training: 배치 정규화 학습 모드
            tape: gradient 기록용 Tape

        Returns:
            DecodeResult (블록별 pruning 전 logit 기록)
        """
        result = DecodeResult()
        x = bottleneck
        for block in self.blocks:
            parents = random_parent_mask(len(x), block.kernel_volume, int(limits.max_voxels), rng)
            dropped = int(np.count_nonzero(~parents))
            if dropped:
                logger.debug("decoder: 업샘플 전 부모 %d/%d개 무작위 제거", dropped, len(x))
                x = prune(x, parents, tape)

            h = generative_transposed_conv(x, block.up, tape)
            h = relu(batch_norm(h, block.bn1, training, tape), tape)
            h = relu(batch_norm(submanifold_conv(h, block.ssc, tape), block.bn2, training, tape), tape)
            head = occupancy_head(h, block.head, tape)
            logits = head.features[:, 0].astype(np.float64)

            keep = logits >= 0.0
            if limits.ground_plane_z is not None and len(h):
                centers_z = voxel_centers(h.coords, h.grid, h.stride)[:, 2]
                keep &= centers_z >= limits.ground_plane_z - limits.ground_margin

            result.records.append(StrideRecord(
                stride=h.stride,
                coords=h.coords,
                logits=logits,
                logit_id=head.value_id,
                kept=keep,
                n_parents_dropped=dropped,
            ))
            logger.debug("decoder: stride=%s, active=%d, kept=%d", h.stride, len(h), int(keep.sum()))
            x = prune(h, keep, tape)

        return result
