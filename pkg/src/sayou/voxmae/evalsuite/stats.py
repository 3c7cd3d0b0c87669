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
masking 통계

spherical masking 다음 voxel masking 후 남는 점 비율을 여러 번 추출해 평균을 구합니다.
"""

import logging
from typing import Sequence

import numpy as np

from ..errors import ConfigurationError
from ..geometry import GridConfig
from ..lidar import sample_mask_params, spherical_mask
from ..model import voxel_mask_points
from ..training import TrainConfig, TrainingFrame, images_to_frame
from .models import MaskingStats

logger = logging.getLogger(__name__)

MIN_TRIALS = 1000


def masking_fractions(
    frames: Sequence[TrainingFrame],
    grid: GridConfig,
    config: TrainConfig,
    n_trials: int = MIN_TRIALS,
    seed: int = 0,
) -> np.ndarray:
    """
    시행별 유지 점 비율 (프레임은 순서대로 돌아가며 사용)

    Args:
        frames: 학습 프레임
        grid: voxel masking 그리드
        config: spherical 사용 여부와 keep_fraction
        n_trials: 시행 횟수
        seed: 난수 시드

    Returns:
        (n_trials,) 비율 배열
    """
    if n_trials < 1:
        raise ConfigurationError(f"n_trials는 1 이상이어야 합니다: {n_trials}", key="n_trials")
    if not frames:
        raise ConfigurationError("프레임이 없습니다", key="frames")
    if n_trials < MIN_TRIALS:
        logger.warning("n_trials=%d: 평균 추정이 불안정할 수 있습니다 (권장 %d 이상)", n_trials, MIN_TRIALS)

    originals = [images_to_frame(frame.images).n_points for frame in frames]
    rng = np.random.default_rng(seed)
    fractions = np.ones(n_trials)
    for trial in range(n_trials):
        index = trial % len(frames)
        if originals[index] == 0:
            fractions[trial] = np.nan
            continue
        images = frames[index].images
        if config.spherical:
            m_r, m_c = sample_mask_params(rng)
            images = [spherical_mask(image, m_r, m_c) for image in images]

        if config.keep_fraction < 1.0:
            points = images_to_frame(images).points
            survived = int(np.count_nonzero(voxel_mask_points(points, grid, config.keep_fraction, rng)))
        else:
            survived = sum(image.n_returns for image in images)
        fractions[trial] = survived / originals[index]
    return fractions


def masking_stats(
    frames: Sequence[TrainingFrame],
    grid: GridConfig,
    config: TrainConfig,
    n_trials: int = MIN_TRIALS,
    seed: int = 0,
) -> MaskingStats:
    """평균 유지 점 비율 (빈 프레임 시행은 제외)"""
    fractions = masking_fractions(frames, grid, config, n_trials, seed)
    valid = fractions[~np.isnan(fractions)]
    if valid.size == 0:
        raise ConfigurationError("모든 프레임이 비어 있습니다", key="frames")
    stats = MaskingStats(mean=float(valid.mean()), std=float(valid.std()), n_trials=int(valid.size))
    logger.info("masking: 평균 유지 비율 %.4f (%d trials)", stats.mean, stats.n_trials)
    return stats
