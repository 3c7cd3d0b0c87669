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
가중 binary cross-entropy 손실

디코더의 모든 stride 기록에 대해
    l = y·log x + (1 - y)·log(1 - x),  x = clamp(sigmoid(logit), 1e-7, 1 - 1e-7)
    total = -(1/M̃)·Σ w·l
M̃는 Occupied 또는 Empty로 라벨된 디코더 복셀 수이며, Unknown은 손실과 gradient가 0입니다.
"""

import logging
from typing import Sequence

import numpy as np

from scipy.special import expit

from ..errors import ConfigurationError
from ..model import StrideRecord
from ..supervision import LabelPyramid, VoxelCategory
from .models import LossBreakdown, StrideLoss
from .utils import PROB_EPS

logger = logging.getLogger(__name__)


def weighted_bce(
    records: Sequence[StrideRecord],
    pyramid: LabelPyramid,
    distance_weighting: bool = True,
    lidar_aware: bool = True,
) -> LossBreakdown:
    """
    stride별 기록의 가중 BCE 손실과 logit gradient

    Args:
        records: 디코더 기록 (pruning 전 좌표와 logit)
        pyramid: 원본 프레임의 라벨 피라미드
        distance_weighting: False면 Empty 가중치를 1로 고정
        lidar_aware: False면 Unknown을 weight 1의 Empty로 취급

    Returns:
        LossBreakdown (logit_grads는 records 순서)
    """
    per_record = []
    per_stride: dict = {}
    normalizer = 0

    for record in records:
        if record.stride not in pyramid:
            raise ConfigurationError(f"피라미드에 없는 stride: {record.stride}", key="stride")
        category, weight, _ = pyramid[record.stride].lookup_arrays(record.coords)
        target = (category == VoxelCategory.OCCUPIED).astype(np.float64)

        if not distance_weighting:
            weight = np.where(category == VoxelCategory.EMPTY, 1.0, weight)
        if not lidar_aware:
            weight = np.where(category == VoxelCategory.UNKNOWN, 1.0, weight)
            labeled = np.ones(category.shape[0], dtype=bool)
        else:
            labeled = category != VoxelCategory.UNKNOWN

        raw = expit(np.asarray(record.logits, dtype=np.float64))
        prob = np.clip(raw, PROB_EPS, 1.0 - PROB_EPS)
        log_likelihood = target * np.log(prob) + (1.0 - target) * np.log(1.0 - prob)
        contribution = np.where(weight > 0, weight * log_likelihood, 0.0)

        normalizer += int(np.count_nonzero(labeled))
        per_record.append((weight, target, raw, prob))
        per_stride[record.stride] = StrideLoss(
            weighted_sum=float(contribution.sum()),
            n_occupied=int(np.count_nonzero(category == VoxelCategory.OCCUPIED)),
            n_empty=int(np.count_nonzero(category == VoxelCategory.EMPTY)),
            n_unknown=int(np.count_nonzero(category == VoxelCategory.UNKNOWN)),
        )

    if normalizer == 0:
        logger.warning("weighted_bce: Occupied/Empty 복셀이 없는 프레임 (M̃ = 0), 손실 0")
        return LossBreakdown(
            total=0.0,
            per_stride=per_stride,
            normalizer=0,
            logit_grads=[np.zeros(len(record)) for record in records],
        )

    total = -sum(item.weighted_sum for item in per_stride.values()) / normalizer
    grads = []
    for weight, target, raw, prob in per_record:
        # clamp 구간 밖에서는 확률이 상수
        inside = (raw > PROB_EPS) & (raw < 1.0 - PROB_EPS)
        grads.append(np.where(inside, weight * (prob - target) / normalizer, 0.0))

    return LossBreakdown(total=float(total), per_stride=per_stride, normalizer=normalizer, logit_grads=grads)
