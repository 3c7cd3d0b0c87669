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
체크포인트 생성/적용

네트워크 파라미터와 배치 정규화 이동 통계, Adam moment, step, seed를
ModelCheckpoint로 모으고 다시 네트워크에 적용합니다.
"""

import logging
from pathlib import Path
from typing import Optional

import numpy as np

from ..errors import CheckpointError
from ..model import VoxelReconstructionNetwork
from .models import ModelCheckpoint
from .optim import Adam
from .parsers import CheckpointParser
from .utils import config_digest

logger = logging.getLogger(__name__)


def network_digest(network: VoxelReconstructionNetwork) -> int:
    return config_digest(network.grid, network.encoder_config, network.decoder_config)


def network_tensors(network: VoxelReconstructionNetwork) -> dict[str, np.ndarray]:
    """파라미터 다음에 BN 이동 통계 (네트워크 정의 순)"""
    tensors = {param.name: param.data for param in network.parameters()}
    for name, state in network.batch_norms().items():
        tensors[f"{name}.running_mean"] = state.running_mean
        tensors[f"{name}.running_var"] = state.running_var
    return tensors


def capture_checkpoint(
    network: VoxelReconstructionNetwork,
    optimizer: Optional[Adam] = None,
    step: int = 0,
    seed: int = 0,
) -> ModelCheckpoint:
    return ModelCheckpoint(
        digest=network_digest(network),
        tensors={name: np.array(value, copy=True) for name, value in network_tensors(network).items()},
        moments=optimizer.moments() if optimizer is not None else {},
        step=step,
        seed=seed,
    )


def apply_checkpoint(network: VoxelReconstructionNetwork, checkpoint: ModelCheckpoint, optimizer: Optional[Adam] = None):
    """
    체크포인트를 네트워크(와 옵티마이저)에 적용

    Raises:
        CheckpointError: digest 또는 텐서 이름/shape 불일치
    """
    if checkpoint.digest != network_digest(network):
        raise CheckpointError(
            f"구성 digest 불일치: {checkpoint.digest:016x} != {network_digest(network):016x}", field="digest"
        )
    checkpoint.check_shapes({name: np.shape(value) for name, value in network_tensors(network).items()})

    for param in network.parameters():
        param.data = checkpoint.tensors[param.name].astype(network.dtype)
        param.zero_grad()
    for name, state in network.batch_norms().items():
        state.running_mean = checkpoint.tensors[f"{name}.running_mean"].astype(state.running_mean.dtype)
        state.running_var = checkpoint.tensors[f"{name}.running_var"].astype(state.running_mean.dtype)
    if optimizer is not None:
        optimizer.load_moments(checkpoint.moments, checkpoint.step)
    logger.debug("체크포인트 적용: step %d, tensors %d", checkpoint.step, len(checkpoint.tensors))


def save_checkpoint(
    path: str | Path,
    network: VoxelReconstructionNetwork,
    optimizer: Optional[Adam] = None,
    step: int = 0,
    seed: int = 0,
) -> Path:
    return CheckpointParser().save(capture_checkpoint(network, optimizer, step, seed), path)


def load_checkpoint(path: str | Path, network: Optional[VoxelReconstructionNetwork] = None) -> ModelCheckpoint:
    """
    체크포인트 파일 로드 (network가 주어지면 digest 검사 후 적용)
    """
    digest = network_digest(network) if network is not None else None
    checkpoint = CheckpointParser().parse(path, digest=digest)
    if network is not None:
        apply_checkpoint(network, checkpoint)
    return checkpoint
