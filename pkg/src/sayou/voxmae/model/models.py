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
model 데이터 모델 정의

인코더/디코더 구성, 안전 한도, 디코더 출력 기록을 담는 dataclass들을 정의합니다.
"""

import math

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import ConfigurationError
from ..geometry import Stride, as_stride

ENCODER_KEYS = {"channels", "strides", "centroid_offsets"}
DECODER_KEYS = {"channels", "kernels", "strides"}
LIMITS_KEYS = {"max_voxels", "ground_plane_z", "ground_margin"}


def _stride_product(strides) -> Stride:
    return tuple(math.prod(int(s[axis]) for s in strides) for axis in range(3))  # type: ignore[return-value]


@dataclass(frozen=True)
class EncoderConfig:
    """
    희소 인코더 구성

    Attributes:
        channels: 단계별 채널
        strides: 단계별 다운샘플 stride (커널 크기 = stride)
        centroid_offsets: 입력에 복셀 내 점 중심 오프셋 3채널 추가 여부
    """
    channels: tuple[int, ...] = (16, 32, 64, 64)
    strides: tuple[Stride, ...] = ((2, 2, 2), (2, 2, 2), (2, 2, 2), (1, 1, 2))
    centroid_offsets: bool = False

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(int(c) for c in self.channels))
        object.__setattr__(self, "strides", tuple(as_stride(s) for s in self.strides))
        if len(self.channels) != len(self.strides) or not self.channels:
            raise ConfigurationError("channels와 strides 길이가 같아야 합니다", key="encoder")
        if any(c < 1 for c in self.channels):
            raise ConfigurationError(f"채널은 1 이상이어야 합니다: {self.channels}", key="encoder.channels")

    @property
    def in_channels(self) -> int:
        return 4 if self.centroid_offsets else 1

    @property
    def out_channels(self) -> int:
        return self.channels[-1]

    @property
    def total_stride(self) -> Stride:
        return _stride_product(self.strides)

    def to_dict(self) -> dict:
        return {
            "channels": list(self.channels),
            "strides": [list(s) for s in self.strides],
            "centroid_offsets": self.centroid_offsets,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EncoderConfig":
        unknown = set(data) - ENCODER_KEYS
        if unknown:
            raise ConfigurationError("알 수 없는 키입니다", key=f"encoder.{sorted(unknown)[0]}")
        defaults = cls()
        return cls(
            channels=tuple(data.get("channels", defaults.channels)),
            strides=tuple(tuple(s) for s in data.get("strides", defaults.strides)),
            centroid_offsets=bool(data.get("centroid_offsets", defaults.centroid_offsets)),
        )


@dataclass(frozen=True)
class DecoderConfig:
    """
    디코더 구성 (블록별 transposed 합성곱 커널/stride와 채널)

    Attributes:
        channels: 블록별 채널
        kernels: 블록별 transposed 합성곱 커널
        strides: 블록별 업샘플 stride
    """
    channels: tuple[int, ...] = (64, 64, 32, 16)
    kernels: tuple[tuple[int, int, int], ...] = ((1, 1, 3), (2, 2, 2), (2, 2, 2), (2, 2, 2))
    strides: tuple[Stride, ...] = ((1, 1, 2), (2, 2, 2), (2, 2, 2), (2, 2, 2))

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(int(c) for c in self.channels))
        object.__setattr__(self, "kernels", tuple(tuple(int(k) for k in kernel) for kernel in self.kernels))
        object.__setattr__(self, "strides", tuple(as_stride(s) for s in self.strides))
        if not (len(self.channels) == len(self.kernels) == len(self.strides)) or not self.channels:
            raise ConfigurationError("channels, kernels, strides 길이가 같아야 합니다", key="decoder")
        if any(c < 1 for c in self.channels):
            raise ConfigurationError(f"채널은 1 이상이어야 합니다: {self.channels}", key="decoder.channels")
        if any(len(k) != 3 or min(k) < 1 for k in self.kernels):
            raise ConfigurationError(f"잘못된 커널: {self.kernels}", key="decoder.kernels")

    @property
    def total_stride(self) -> Stride:
        return _stride_product(self.strides)

    def supervision_strides(self, initial: Stride) -> list[Stride]:
        """블록별 출력 stride (coarse → fine)"""
        result = []
        current = tuple(initial)
        for stride in self.strides:
            current = tuple(c // s for c, s in zip(current, stride))
            result.append(current)
        return result

    def to_dict(self) -> dict:
        return {
            "channels": list(self.channels),
            "kernels": [list(k) for k in self.kernels],
            "strides": [list(s) for s in self.strides],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DecoderConfig":
        unknown = set(data) - DECODER_KEYS
        if unknown:
            raise ConfigurationError("알 수 없는 키입니다", key=f"decoder.{sorted(unknown)[0]}")
        defaults = cls()
        return cls(
            channels=tuple(data.get("channels", defaults.channels)),
            kernels=tuple(tuple(k) for k in data.get("kernels", defaults.kernels)),
            strides=tuple(tuple(s) for s in data.get("strides", defaults.strides)),
        )


def check_architecture(encoder: EncoderConfig, decoder: DecoderConfig):
    """디코더 stride 곱이 인코더 누적 stride와 같아야 마지막 블록이 stride (1, 1, 1)"""
    if encoder.total_stride != decoder.total_stride:
        raise ConfigurationError(
            f"인코더 stride {encoder.total_stride} != 디코더 stride {decoder.total_stride}", key="decoder.strides"
        )


@dataclass(frozen=True)
class SafetyLimits:
    """
    디코딩 안전 한도

    Attributes:
        max_voxels: 업샘플 후 활성 복셀 최대 수
        ground_plane_z: 지면 높이 (None이면 지면 pruning 없음)
        ground_margin: 지면 아래 허용 여유 (m)
    """
    max_voxels: int = 200_000
    ground_plane_z: Optional[float] = None
    ground_margin: float = 0.1

    def __post_init__(self):
        if int(self.max_voxels) < 1:
            raise ConfigurationError(f"양수여야 합니다: {self.max_voxels}", key="limits.max_voxels")
        if self.ground_margin < 0:
            raise ConfigurationError(f"음수일 수 없습니다: {self.ground_margin}", key="limits.ground_margin")

    def with_ground(self, ground_plane_z: Optional[float]) -> "SafetyLimits":
        return SafetyLimits(self.max_voxels, ground_plane_z, self.ground_margin)

    def to_dict(self) -> dict:
        data = {"max_voxels": int(self.max_voxels), "ground_margin": self.ground_margin}
        if self.ground_plane_z is not None:
            data["ground_plane_z"] = self.ground_plane_z
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "SafetyLimits":
        unknown = set(data) - LIMITS_KEYS
        if unknown:
            raise ConfigurationError("알 수 없는 키입니다", key=f"limits.{sorted(unknown)[0]}")
        return cls(
            max_voxels=int(data.get("max_voxels", 200_000)),
            ground_plane_z=data.get("ground_plane_z"),
            ground_margin=float(data.get("ground_margin", 0.1)),
        )


@dataclass(eq=False)
class StrideRecord:
    """
    디코더 블록 하나의 출력 기록 (pruning 전)

    Attributes:
        stride: 블록 출력 stride
        coords: pruning 전 활성 좌표 (N, 3)
        logits: 좌표별 logit (N,)
        logit_id: Tape의 logit 값 id (기록하지 않으면 None)
        kept: 다음 블록으로 넘어간 행 마스크 (N,)
        n_parents_dropped: 업샘플 전 무작위 pruning으로 제거된 부모 수
    """
    stride: Stride
    coords: np.ndarray
    logits: np.ndarray
    logit_id: Optional[int] = None
    kept: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))
    n_parents_dropped: int = 0

    def __len__(self) -> int:
        return int(self.coords.shape[0])

    @property
    def n_kept(self) -> int:
        return int(np.count_nonzero(self.kept))


@dataclass(eq=False)
class DecodeResult:
    """디코더 전체 출력 (블록 순 = coarse → fine)"""
    records: list[StrideRecord] = field(default_factory=list)

    @property
    def final_coords(self) -> np.ndarray:
        """마지막 블록에서 살아남은 좌표"""
        if not self.records:
            return np.zeros((0, 3), dtype=np.int64)
        last = self.records[-1]
        return last.coords[last.kept]

    @property
    def max_active(self) -> int:
        return max((len(record) for record in self.records), default=0)

    def by_stride(self) -> dict[Stride, StrideRecord]:
        return {record.stride: record for record in self.records}
