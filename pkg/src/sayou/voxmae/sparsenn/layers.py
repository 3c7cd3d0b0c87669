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
레이어 파라미터 초기화

- 합성곱 weight: Kaiming-uniform (bound = sqrt(6 / fan_in)), bias 0
- 배치 정규화: gamma 1, beta 0, running_mean 0, running_var 1
"""

import math

import numpy as np

from .models import BatchNormState, ConvParams, Parameter


def kaiming_uniform(rng: np.random.Generator, shape: tuple[int, int, int], dtype=np.float32) -> np.ndarray:
    """(K, C_in, C_out) weight, fan_in = K·C_in"""
    fan_in = shape[0] * shape[1]
    bound = math.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape).astype(dtype)


def make_conv(
    name: str,
    in_channels: int,
    out_channels: int,
    kernel_size=(3, 3, 3),
    stride=(1, 1, 1),
    rng: np.random.Generator | None = None,
    dtype=np.float32,
    zero: bool = False,
) -> ConvParams:
    """
    합성곱 파라미터 생성

    Args:
        name: 파라미터 이름 접두어 (체크포인트 텐서 이름)
        in_channels: 입력 채널
        out_channels: 출력 채널
        kernel_size: 커널 크기
        stride: stride
        rng: 초기화 난수 생성기
        dtype: 파라미터 dtype
        zero: weight를 0으로 초기화할지 여부
    """
    volume = math.prod(int(k) for k in kernel_size)
    shape = (volume, int(in_channels), int(out_channels))
    if zero:
        weight = np.zeros(shape, dtype=dtype)
    else:
        weight = kaiming_uniform(rng if rng is not None else np.random.default_rng(0), shape, dtype)
    return ConvParams(
        kernel_size=tuple(kernel_size),
        stride=tuple(stride),
        weight=Parameter(f"{name}.weight", weight),
        bias=Parameter(f"{name}.bias", np.zeros(int(out_channels), dtype=dtype)),
    )


def make_batch_norm(name: str, channels: int, dtype=np.float32) -> BatchNormState:
    return BatchNormState(
        gamma=Parameter(f"{name}.gamma", np.ones(channels, dtype=dtype)),
        beta=Parameter(f"{name}.beta", np.zeros(channels, dtype=dtype)),
        running_mean=np.zeros(channels, dtype=dtype),
        running_var=np.ones(channels, dtype=dtype),
    )
