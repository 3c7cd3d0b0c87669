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
Training
===========================

가중 BCE 손실, Adam + one-cycle 학습률, 데이터 증강, 사전 학습 루프, 체크포인트

Quick Start:
    >>> from sayou.voxmae.model import VoxelReconstructionNetwork
    >>> from sayou.voxmae.training import Pretrainer, TrainConfig, TrainingFrame
    >>>
    >>> network = VoxelReconstructionNetwork(grid, seed=0)
    >>> trainer = Pretrainer(network, TrainConfig(max_steps=500, seed=0))
    >>>
    >>> frames = [TrainingFrame(images=[image], scene=scene, frame_id=0)]
    >>> results = trainer.fit(frames, checkpoint_path="out/model.vckp")
    >>> print(results[-1].loss)

Note:
    라벨은 마스킹 전 원본 프레임에서 만들고, 증강은 입력과 라벨에 똑같이 적용합니다.
"""

__version__ = "0.1.0"
__author__ = "SeongJung Kim"

from .augment import (
    IDENTITY,
    Augmentation,
    augment_frame,
    augmentation_pivot,
    sample_augmentation,
)
from .checkpoint import (
    apply_checkpoint,
    capture_checkpoint,
    load_checkpoint,
    network_digest,
    network_tensors,
    save_checkpoint,
)
from .loss import weighted_bce
from .models import (
    LossBreakdown,
    ModelCheckpoint,
    StepResult,
    StrideLoss,
    TrainConfig,
    TrainingFrame,
)
from .optim import Adam, OneCycleSchedule
from .parsers import CheckpointParser
from .trainer import Pretrainer, images_to_frame
from .utils import PROB_EPS, config_digest, frame_rng

__all__ = [
    # 메인 클래스
    "Pretrainer",

    # 데이터 모델
    "LossBreakdown",
    "ModelCheckpoint",
    "StepResult",
    "StrideLoss",
    "TrainConfig",
    "TrainingFrame",

    # 손실과 최적화
    "weighted_bce",
    "Adam",
    "OneCycleSchedule",

    # 증강
    "Augmentation",
    "IDENTITY",
    "augment_frame",
    "augmentation_pivot",
    "sample_augmentation",

    # 체크포인트
    "CheckpointParser",
    "apply_checkpoint",
    "capture_checkpoint",
    "load_checkpoint",
    "network_digest",
    "network_tensors",
    "save_checkpoint",

    # 유틸리티
    "PROB_EPS",
    "config_digest",
    "frame_rng",
    "images_to_frame",
]
