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
evalsuite 데이터 모델 정의

재구성 지표와 masking 통계를 정의합니다.
"""

import math

from dataclasses import asdict, dataclass
from typing import Optional

from ..errors import ConfigurationError


def _rate(hits: int, total: int) -> Optional[float]:
    """분모가 0이면 정의되지 않음 (None)"""
    return hits / total if total > 0 else None


@dataclass(frozen=True)
class ReconMetrics:
    """
    재구성 평가 지표

    비율은 뒷받침하는 개수에서 계산하며, 분모가 0인 지표는 None입니다.

    Attributes:
        n_recon: 재구성 복셀 수 (그리드 내부)
        n_occupied: Occupied 라벨 복셀 수
        n_occupied_hit: 재구성된 Occupied 복셀 수
        n_empty: Empty 라벨 복셀 수
        n_empty_hit: 재구성된 Empty 복셀 수
        n_unknown_solid: Unknown이면서 박스 내부와 겹치는 복셀 수
        n_unknown_solid_hit: 그 중 재구성된 복셀 수
        frame: 프레임 이름
    """
    n_recon: int = 0
    n_occupied: int = 0
    n_occupied_hit: int = 0
    n_empty: int = 0
    n_empty_hit: int = 0
    n_unknown_solid: int = 0
    n_unknown_solid_hit: int = 0
    frame: str = ""

    def __post_init__(self):
        pairs = (
            ("n_occupied_hit", self.n_occupied_hit, self.n_occupied),
            ("n_empty_hit", self.n_empty_hit, self.n_empty),
            ("n_unknown_solid_hit", self.n_unknown_solid_hit, self.n_unknown_solid),
        )
        for key, hits, total in pairs:
            if hits < 0 or hits > total:
                raise ConfigurationError(f"{key}={hits}이(가) 0..{total} 범위를 벗어났습니다", key=key)

    @property
    def occupied_recall(self) -> Optional[float]:
        return _rate(self.n_occupied_hit, self.n_occupied)

    @property
    def empty_false_positive_rate(self) -> Optional[float]:
        return _rate(self.n_empty_hit, self.n_empty)

    @property
    def unknown_completion_recall(self) -> Optional[float]:
        return _rate(self.n_unknown_solid_hit, self.n_unknown_solid)

    def to_dict(self) -> dict:
        """개수와 지표 (정의되지 않은 지표는 None)"""
        data = asdict(self)
        data["occupied_recall"] = self.occupied_recall
        data["empty_false_positive_rate"] = self.empty_false_positive_rate
        data["unknown_completion_recall"] = self.unknown_completion_recall
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "ReconMetrics":
        fields = ("n_recon", "n_occupied", "n_occupied_hit", "n_empty", "n_empty_hit",
                  "n_unknown_solid", "n_unknown_solid_hit")
        values = {key: int(data.get(key, 0)) for key in fields}
        return cls(frame=str(data.get("frame", "")), **values)


@dataclass(frozen=True)
class MaskingStats:
    """
    masking 통계

    Attributes:
        mean: 평균 유지 점 비율
        std: 표준편차
        n_trials: 시행 횟수
    """
    mean: float
    std: float
    n_trials: int

    @property
    def standard_error(self) -> float:
        return self.std / math.sqrt(self.n_trials) if self.n_trials else math.nan
