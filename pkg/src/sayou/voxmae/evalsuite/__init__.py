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
Evalsuite
===========================

합성 장면 정답 기반 재구성 평가 (Occupied recall, Empty 오탐률, Unknown 완성 recall)와
masking 통계, 보고서 저장

Quick Start:
    >>> from sayou.voxmae.evalsuite import ReconstructionEvaluator, ReportWriter
    >>>
    >>> evaluator = ReconstructionEvaluator(network)
    >>> metrics = evaluator.evaluate_all(frames)
    >>> print(metrics[0].occupied_recall)
    >>>
    >>> ReportWriter().save(metrics, "out/report.xlsx")

Note:
    분모가 0인 지표는 None (정의되지 않음)으로 보고됩니다.
"""

__version__ = "0.1.0"
__author__ = "SeongJung Kim"

from .metrics import ReconstructionEvaluator, evaluate_reconstruction
from .models import MaskingStats, ReconMetrics
from .parsers import ReportWriter
from .stats import MIN_TRIALS, masking_fractions, masking_stats

__all__ = [
    # 메인 클래스
    "ReconstructionEvaluator",

    # 데이터 모델
    "MaskingStats",
    "ReconMetrics",

    # 파서
    "ReportWriter",

    # 평가
    "evaluate_reconstruction",
    "MIN_TRIALS",
    "masking_fractions",
    "masking_stats",
]
