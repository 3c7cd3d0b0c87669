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

import hashlib
import json

import numpy as np

from ..geometry import GridConfig
from ..model import DecoderConfig, EncoderConfig

_VCKP_MAGIC_ = b"VCKP"
_VCKP_VERSION_ = 1

# 확률 clamp (log 안정성)
PROB_EPS = 1e-7

TRAIN_KEYS = {
    "epochs",
    "max_steps",
    "batch_size",
    "max_lr",
    "beta1",
    "beta2",
    "adam_eps",
    "warmup_fraction",
    "div_factor",
    "final_div_factor",
    "augment",
    "checkpoint_every",
}
MASKING_KEYS = {"spherical", "keep_fraction"}
LOSS_KEYS = {"distance_weighting", "lidar_aware", "include_misses"}


def config_digest(grid: GridConfig, encoder: EncoderConfig, decoder: DecoderConfig) -> int:
    """그리드 + 인코더 + 디코더 구성의 64비트 BLAKE2b digest (정규화된 JSON 기준)"""
    canonical = json.dumps(
        {"grid": grid.to_dict(), "encoder": encoder.to_dict(), "decoder": decoder.to_dict()},
        sort_keys=True,
        separators=(",", ":"),
    )
    digest = hashlib.blake2b(canonical.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def frame_rng(seed: int, frame_id: int, step: int) -> np.random.Generator:
    """(전역 시드, 프레임 id, step)으로 결정되는 프레임별 난수 생성기"""
    return np.random.default_rng([int(seed), int(frame_id), int(step)])
