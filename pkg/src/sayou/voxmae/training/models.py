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
training 데이터 모델 정의

손실 내역, 학습 설정, 체크포인트를 담는 dataclass들을 정의합니다.
"""

import math

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import CheckpointError, ConfigurationError
from ..geometry import Stride
from ..lidar import RangeImage, Scene
from .utils import LOSS_KEYS, MASKING_KEYS, TRAIN_KEYS, _VCKP_VERSION_


@dataclass
class StrideLoss:
    """한 stride의 손실 합과 카테고리별 개수"""
    weighted_sum: float = 0.0
    n_occupied: int = 0
    n_empty: int = 0
    n_unknown: int = 0


@dataclass(eq=False)
class LossBreakdown:
    """
    가중 BCE 손실 내역

    Attributes:
        total: -(1/M̃)·Σ w·l (M̃ = 0이면 0)
        per_stride: stride → StrideLoss (weighted_sum은 Σ w·l, 부호 반전 전)
        normalizer: M̃ (Occupied 또는 Empty로 라벨된 디코더 복셀 수)
        logit_grads: 기록 순서별 d(total)/d(logit) (N,)
    """
    total: float = 0.0
    per_stride: dict[Stride, StrideLoss] = field(default_factory=dict)
    normalizer: int = 0
    logit_grads: list[np.ndarray] = field(default_factory=list)

    @property
    def is_degenerate(self) -> bool:
        return self.normalizer == 0

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "normalizer": self.normalizer,
            "per_stride": {
                "x".join(str(s) for s in stride): {
                    "weighted_sum": item.weighted_sum,
                    "occupied": item.n_occupied,
                    "empty": item.n_empty,
                    "unknown": item.n_unknown,
                }
                for stride, item in self.per_stride.items()
            },
        }


@dataclass(frozen=True)
class TrainConfig:
    """
    학습 설정

    Attributes:
        epochs: epoch 수
        max_steps: 전체 step 수 (지정하면 epochs 대신 사용)
        batch_size: 배치당 프레임 수
        max_lr: one-cycle 최대 학습률
        beta1, beta2, adam_eps: Adam 계수
        warmup_fraction: warm-up 비율
        div_factor: 초기 학습률 = max_lr / div_factor
        final_div_factor: 최종 학습률 = max_lr / final_div_factor
        augment: flip/회전/스케일 증강 사용 여부
        checkpoint_every: 주기적 체크포인트 step 간격 (0이면 마지막만)
        spherical: spherical masking 사용 여부
        keep_fraction: voxel masking 비율
        distance_weighting: Empty 거리 가중치 사용 여부 (False면 1)
        lidar_aware: Unknown 제외 여부 (False면 Unknown을 weight 1의 Empty로 취급)
        include_misses: 반사 없는 빔을 라벨링에 사용할지 여부
        seed: 전역 시드
    """
    epochs: int = 30
    max_steps: Optional[int] = None
    batch_size: int = 1
    max_lr: float = 0.003
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    warmup_fraction: float = 0.4
    div_factor: float = 25.0
    final_div_factor: float = 1e4
    augment: bool = True
    checkpoint_every: int = 0
    spherical: bool = True
    keep_fraction: float = 0.6
    distance_weighting: bool = True
    lidar_aware: bool = True
    include_misses: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigurationError(f"1 이상이어야 합니다: {self.epochs}", key="train.epochs")
        if self.max_steps is not None and self.max_steps < 1:
            raise ConfigurationError(f"1 이상이어야 합니다: {self.max_steps}", key="train.max_steps")
        if self.batch_size < 1:
            raise ConfigurationError(f"1 이상이어야 합니다: {self.batch_size}", key="train.batch_size")
        if not self.max_lr > 0:
            raise ConfigurationError(f"양수여야 합니다: {self.max_lr}", key="train.max_lr")
        if not 0.0 < self.warmup_fraction < 1.0:
            raise ConfigurationError(f"(0, 1) 범위가 아닙니다: {self.warmup_fraction}", key="train.warmup_fraction")
        if not 0.0 < self.keep_fraction <= 1.0:
            raise ConfigurationError(f"(0, 1] 범위가 아닙니다: {self.keep_fraction}", key="masking.keep_fraction")

    def total_steps(self, n_frames: int) -> int:
        steps = self.epochs * max(1, math.ceil(n_frames / self.batch_size))
        if self.max_steps is not None:
            steps = self.max_steps
        return max(1, steps)

    @classmethod
    def from_sections(cls, train: dict, masking: dict, loss: dict, seed: int = 0) -> "TrainConfig":
        """TOML [train], [masking], [loss] 섹션에서 생성"""
        sections = (("train", TRAIN_KEYS, train), ("masking", MASKING_KEYS, masking), ("loss", LOSS_KEYS, loss))
        for section, allowed, data in sections:
            unknown = set(data) - allowed
            if unknown:
                raise ConfigurationError("알 수 없는 키입니다", key=f"{section}.{sorted(unknown)[0]}")
        return cls(**train, **masking, **loss, seed=seed)


@dataclass(eq=False)
class ModelCheckpoint:
    """
    체크포인트

    Attributes:
        digest: 그리드 + 인코더 + 디코더 구성 digest
        tensors: 파라미터와 BN 이동 통계 (이름 → 배열)
        moments: Adam moment ("m/<이름>", "v/<이름>" → 배열)
        step: 완료한 step 수
        seed: 전역 시드
        version: 포맷 버전
    """
    digest: int
    tensors: dict[str, np.ndarray] = field(default_factory=dict)
    moments: dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0
    seed: int = 0
    version: int = _VCKP_VERSION_

    def check_shapes(self, expected: dict[str, tuple[int, ...]]):
        """텐서 이름/shape이 기대와 같은지 검사"""
        missing = sorted(set(expected) - set(self.tensors))
        if missing:
            raise CheckpointError(f"텐서가 없습니다: {missing[0]}", field="tensors")
        extra = sorted(set(self.tensors) - set(expected))
        if extra:
            raise CheckpointError(f"알 수 없는 텐서: {extra[0]}", field="tensors")
        for name, shape in expected.items():
            if tuple(self.tensors[name].shape) != tuple(shape):
                raise CheckpointError(f"{name}: shape {self.tensors[name].shape} != {shape}", field="shape")


@dataclass(eq=False)
class StepResult:
    """
    학습 step 하나의 결과

    Attributes:
        step: step 인덱스 (skip이면 진행하지 않은 현재 값)
        lr: 적용한 학습률
        loss: 유효 프레임 손실의 평균
        frame_losses: 프레임별 손실 (degenerate 프레임은 None)
        skipped: 모든 프레임이 degenerate여서 갱신하지 않았는지 여부
    """
    step: int
    lr: float = 0.0
    loss: float = 0.0
    frame_losses: list[Optional[LossBreakdown]] = field(default_factory=list)
    skipped: bool = False

    @property
    def n_valid(self) -> int:
        return sum(1 for item in self.frame_losses if item is not None)


@dataclass(eq=False)
class TrainingFrame:
    """
    학습 프레임 하나

    Attributes:
        images: 센서별 range image (다중 LiDAR 가능)
        scene: 합성 장면 (지면 높이와 평가용, 없으면 점군에서 추정)
        frame_id: 프레임별 난수 스트림 구분용 id
    """
    images: list[RangeImage]
    scene: Optional[Scene] = None
    frame_id: int = 0
