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
사전 학습 루프

프레임마다:
    1. 원본 프레임 (+ 증강)에서 라벨 피라미드 생성
    2. spherical masking → 같은 증강 → voxel masking으로 인코더 입력 생성
    3. 인코딩/디코딩 후 가중 BCE 손실과 backward
배치의 유효 프레임 gradient 평균으로 Adam 한 step을 one-cycle 학습률로 진행합니다.
"""

import logging
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from ..errors import EmptyFrameError
from ..lidar import LidarFrame, RangeImage, sample_mask_params, spherical_mask, to_points
from ..model import DecodeResult, VoxelReconstructionNetwork, estimate_ground_z
from ..sparsenn import SparseTensor, Tape
from ..supervision import Categorizer, LabelPyramid
from .augment import IDENTITY, augment_frame, augmentation_pivot, sample_augmentation
from .checkpoint import apply_checkpoint, capture_checkpoint, save_checkpoint
from .loss import weighted_bce
from .models import LossBreakdown, ModelCheckpoint, StepResult, TrainConfig, TrainingFrame
from .optim import Adam, OneCycleSchedule
from .utils import frame_rng

logger = logging.getLogger(__name__)


def images_to_frame(images: Sequence[RangeImage], include_misses: bool = False) -> LidarFrame:
    """센서별 range image를 하나의 프레임으로 병합"""
    frame = to_points(images[0], include_misses=include_misses)
    for image in images[1:]:
        frame = frame.merge(to_points(image, include_misses=include_misses))
    return frame


class Pretrainer:
    """
    masked 복셀 재구성 사전 학습기

    1. 프레임별 입력/라벨 준비
    2. train_step: 배치 손실, backward, Adam 갱신
    3. fit: epoch 반복과 주기적 체크포인트
    """

    def __init__(self, network: VoxelReconstructionNetwork, config: Optional[TrainConfig] = None, total_steps: Optional[int] = None):
        """
        Pretrainer 초기화

        Args:
            network: 학습할 네트워크
            config: 학습 설정
            total_steps: one-cycle 전체 step 수 (None이면 fit에서 결정)
        """
        self.network = network
        self.config = config or TrainConfig()
        self.categorizer = Categorizer(
            network.grid, network.supervision_strides, include_misses=self.config.include_misses
        )
        self.optimizer = Adam(network.parameters(), self.config.beta1, self.config.beta2, self.config.adam_eps)
        self.schedule: Optional[OneCycleSchedule] = None
        self.step = 0
        if total_steps is not None:
            self.configure_schedule(total_steps)

    def configure_schedule(self, total_steps: int) -> OneCycleSchedule:
        self.schedule = OneCycleSchedule(
            self.config.max_lr,
            total_steps,
            warmup_fraction=self.config.warmup_fraction,
            div_factor=self.config.div_factor,
            final_div_factor=self.config.final_div_factor,
        )
        return self.schedule

    def prepare(self, frame: TrainingFrame, step: int) -> tuple[SparseTensor, LabelPyramid, Optional[float], np.random.Generator]:
        """
        프레임의 (인코더 입력, 라벨 피라미드, 지면 높이, 난수 생성기)

        라벨은 masking 전 원본 프레임에서 만들고, 증강은 원본과 masking 프레임에 똑같이 적용합니다.
        """
        rng = frame_rng(self.config.seed, frame.frame_id, step)
        original = images_to_frame(frame.images, include_misses=self.config.include_misses)
        ground_z = frame.scene.ground_z if frame.scene is not None else estimate_ground_z(original.points)

        augmentation = sample_augmentation(rng) if self.config.augment else IDENTITY
        pivot = augmentation_pivot(self.network.grid, ground_z)
        pyramid = self.categorizer.pyramid(augment_frame(original, augmentation, pivot))

        if self.config.spherical:
            m_r, m_c = sample_mask_params(rng)
            masked = images_to_frame([spherical_mask(image, m_r, m_c) for image in frame.images])
        else:
            masked = images_to_frame(frame.images)
        masked = augment_frame(masked, augmentation, pivot)

        inputs = self.network.prepare_input(masked.points, self.config.keep_fraction, rng)
        return inputs, pyramid, ground_z, rng

    def frame_loss(
        self,
        frame: TrainingFrame,
        step: int,
        tape: Optional[Tape] = None,
    ) -> Optional[tuple[LossBreakdown, DecodeResult]]:
        """
        프레임 하나의 손실 (degenerate 프레임이면 None)
        """
        inputs, pyramid, ground_z, rng = self.prepare(frame, step)
        try:
            result = self.network.forward(inputs, rng, training=True, tape=tape, ground_plane_z=ground_z)
        except EmptyFrameError:
            logger.warning("frame %d: masking 후 입력 복셀이 없습니다 (건너뜀)", frame.frame_id)
            return None

        loss = weighted_bce(
            result.records,
            pyramid,
            distance_weighting=self.config.distance_weighting,
            lidar_aware=self.config.lidar_aware,
        )
        if loss.is_degenerate:
            return None
        return loss, result

    def train_step(self, batch: Sequence[TrainingFrame]) -> StepResult:
        """
        배치 하나로 한 step 학습

        Args:
            batch: 학습 프레임 (비어 있지 않아야 함)

        Returns:
            StepResult
        """
        if not batch:
            raise ValueError("빈 배치입니다")
        if self.schedule is None:
            self.configure_schedule(self.config.total_steps(len(batch)))

        self.network.zero_grad()
        frame_losses: list[Optional[LossBreakdown]] = []
        for frame in batch:
            tape = Tape()
            outcome = self.frame_loss(frame, self.step, tape)
            if outcome is None:
                frame_losses.append(None)
                continue
            loss, result = outcome
            seeds = {
                record.logit_id: grad[:, None]
                for record, grad in zip(result.records, loss.logit_grads)
                if record.logit_id is not None
            }
            tape.backward(seeds)
            frame_losses.append(loss)

        valid = [item for item in frame_losses if item is not None]
        if not valid:
            logger.warning("step %d: 모든 프레임이 degenerate - 갱신하지 않습니다", self.step)
            return StepResult(step=self.step, frame_losses=frame_losses, skipped=True)

        for param in self.network.parameters():
            param.grad = param.grad / len(valid)
        lr = self.schedule.lr(self.step)
        self.optimizer.step(lr)

        mean_loss = float(np.mean([item.total for item in valid]))
        result = StepResult(step=self.step, lr=lr, loss=mean_loss, frame_losses=frame_losses)
        logger.debug("step %d: loss=%.6f lr=%.3e frames=%d", self.step, mean_loss, lr, len(valid))
        self.step += 1
        return result

    def fit(
        self,
        frames: Sequence[TrainingFrame],
        checkpoint_path: Optional[str | Path] = None,
        callback: Optional[Callable[[StepResult], None]] = None,
    ) -> list[StepResult]:
        """
        전체 학습

        Args:
            frames: 학습 프레임
            checkpoint_path: 체크포인트 경로 (주기적 저장과 마지막 저장)
            callback: step마다 호출할 함수

        Returns:
            step 결과 리스트
        """
        total = self.config.total_steps(len(frames))
        if self.schedule is None or self.schedule.total_steps != total:
            self.configure_schedule(total)

        results: list[StepResult] = []
        batch_size = self.config.batch_size
        # 재개한 경우 step에 해당하는 epoch와 배치 위치부터 (건너뛴 step이 없었다고 가정)
        n_batches = max(1, -(-len(frames) // batch_size))
        epoch, first = divmod(self.step, n_batches)
        while self.step < total and frames:
            order = np.random.default_rng([self.config.seed, epoch]).permutation(len(frames))
            progressed = False
            for start in range(first * batch_size, len(frames), batch_size):
                if self.step >= total:
                    break
                result = self.train_step([frames[i] for i in order[start:start + batch_size]])
                results.append(result)
                progressed |= not result.skipped
                if callback is not None:
                    callback(result)
                every = self.config.checkpoint_every
                if checkpoint_path and every and not result.skipped and self.step % every == 0:
                    save_checkpoint(checkpoint_path, self.network, self.optimizer, self.step, self.config.seed)

            logger.info("epoch %d: step %d/%d", epoch, self.step, total)
            epoch += 1
            first = 0
            if not progressed:
                logger.warning("epoch %d: 유효한 프레임이 없어 학습을 중단합니다", epoch - 1)
                break

        if checkpoint_path:
            save_checkpoint(checkpoint_path, self.network, self.optimizer, self.step, self.config.seed)
        return results

    def checkpoint(self) -> ModelCheckpoint:
        return capture_checkpoint(self.network, self.optimizer, self.step, self.config.seed)

    def resume(self, checkpoint: ModelCheckpoint):
        """체크포인트의 파라미터, moment, step으로 이어서 학습"""
        apply_checkpoint(self.network, checkpoint, self.optimizer)
        self.step = int(checkpoint.step)
