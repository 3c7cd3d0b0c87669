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
spherical masking

range image의 행/열을 부분 샘플링하여 각도 해상도를 낮춥니다.
"""

import numpy as np

from ..errors import ConfigurationError
from .models import RangeImage
from .utils import MASK_MAX, MASK_MIN, NO_RETURN


def spherical_mask_pattern(shape: tuple[int, int], m_r: int, m_c: int) -> np.ndarray:
    """행 r mod m_r == 0 이고 열 c mod m_c == 0 인 픽셀만 True"""
    for key, value in (("m_r", m_r), ("m_c", m_c)):
        if not MASK_MIN <= int(value) <= MASK_MAX:
            raise ConfigurationError(f"{MASK_MIN}..{MASK_MAX} 범위가 아닙니다: {value}", key=key)
    rows = np.arange(shape[0]) % int(m_r) == 0
    cols = np.arange(shape[1]) % int(m_c) == 0
    return rows[:, None] & cols[None, :]


def spherical_mask(image: RangeImage, m_r: int, m_c: int) -> RangeImage:
    """
    spherical masking

    r mod m_r ≠ 0 또는 c mod m_c ≠ 0 인 픽셀을 NO_RETURN으로 바꿉니다.
    남는 픽셀의 값은 그대로입니다.

    Args:
        image: range image
        m_r: 행 간격 (1..4)
        m_c: 열 간격 (1..4)

    Returns:
        마스킹된 RangeImage
    """
    keep = spherical_mask_pattern(image.shape, m_r, m_c)
    return image.with_ranges(np.where(keep, image.ranges, NO_RETURN))


def sample_mask_params(rng: np.random.Generator) -> tuple[int, int]:
    """{1, 2, 3, 4}에서 독립 균등 추출한 (m_r, m_c)"""
    m_r, m_c = rng.integers(MASK_MIN, MASK_MAX + 1, size=2)
    return int(m_r), int(m_c)


def expected_keep_fraction() -> float:
    """dense image에서 기대 생존 비율 E[1/m_r]·E[1/m_c] (차원이 12의 배수일 때 정확)"""
    mean_inverse = float(np.mean(1.0 / np.arange(MASK_MIN, MASK_MAX + 1)))
    return mean_inverse ** 2
