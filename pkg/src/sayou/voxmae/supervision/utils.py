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

import numpy as np

_VLBL_MAGIC_ = b"VLBL"
_VLBL_VERSION_ = 1

# 디코더 감독 stride (coarse → fine)
DEFAULT_STRIDES = ((8, 8, 8), (4, 4, 4), (2, 2, 2), (1, 1, 1))

# VLBL 엔트리 (packed, little-endian)
LABEL_ENTRY_DTYPE = np.dtype([
    ("ix", "<u4"),
    ("iy", "<u4"),
    ("iz", "<u4"),
    ("category", "u1"),
    ("weight", "<f4"),
    ("min_dist", "<f4"),
])


def distance_weight(distance, diagonal: float) -> np.ndarray:
    """Empty 복셀 가중치 max(0, 1 - 2·d/d_v), [0, 1]로 clamp"""
    return np.clip(1.0 - 2.0 * np.asarray(distance, dtype=np.float64) / diagonal, 0.0, 1.0)


def group_starts(sorted_keys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """정렬된 키 배열의 (고유 키, 그룹 시작 인덱스) - ufunc.reduceat용"""
    if sorted_keys.size == 0:
        return sorted_keys, np.zeros(0, dtype=np.int64)
    boundary = np.concatenate([[True], sorted_keys[1:] != sorted_keys[:-1]])
    starts = np.nonzero(boundary)[0]
    return sorted_keys[starts], starts
