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
Sparsenn
===========================

numpy 기반 최소 희소 텐서 엔진: 희소 합성곱 3종, pruning, 배치 정규화, ReLU와
Tape 기반 reverse-mode gradient

Quick Start:
    >>> import numpy as np
    >>> from sayou.voxmae.geometry import GridConfig
    >>> from sayou.voxmae.sparsenn import SparseTensor, Tape, make_conv, submanifold_conv
    >>>
    >>> grid = GridConfig(voxel_size=(1, 1, 1), extent=(8, 8, 8))
    >>> x = SparseTensor.from_coords(np.array([[1, 1, 1], [1, 1, 2]]), np.ones((2, 1), np.float32), grid)
    >>> conv = make_conv("ssc", 1, 4, kernel_size=(3, 3, 3), rng=np.random.default_rng(0))
    >>>
    >>> tape = Tape()
    >>> x.value_id = tape.new_value()
    >>> y = submanifold_conv(x, conv, tape)
    >>> grads = tape.backward({y.value_id: np.ones_like(y.features)})
    >>> conv.weight.grad.shape
    (27, 1, 4)

Note:
    커널 오프셋은 z가 가장 빠른 row-major 순서입니다.
"""

__version__ = "0.1.0"
__author__ = "SeongJung Kim"

from .layers import kaiming_uniform, make_batch_norm, make_conv
from .models import (
    BatchNormState,
    ConvParams,
    KernelMap,
    Parameter,
    SparseTensor,
)
from .ops import (
    batch_norm,
    find_rows,
    generative_transposed_conv,
    kernel_offsets,
    occupancy_head,
    probabilities,
    prune,
    relu,
    strided_sparse_conv,
    submanifold_conv,
)
from .tape import Node, Tape

__all__ = [
    # 데이터 모델
    "BatchNormState",
    "ConvParams",
    "KernelMap",
    "Parameter",
    "SparseTensor",

    # Tape
    "Node",
    "Tape",

    # 연산
    "batch_norm",
    "find_rows",
    "generative_transposed_conv",
    "kernel_offsets",
    "occupancy_head",
    "probabilities",
    "prune",
    "relu",
    "strided_sparse_conv",
    "submanifold_conv",

    # 초기화
    "kaiming_uniform",
    "make_batch_norm",
    "make_conv",
]
