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
평가 보고서 저장/로드

프레임별 ReconMetrics와 집계를 확장자에 따라 저장합니다.

- .jsonl: 프레임당 JSON 한 줄, 마지막 줄은 집계
- .json: {"frames": [...], "summary": {...}}
- .csv: 프레임 행 + 집계 행
- .xlsx: frames / summary 시트
"""

import json
import logging
import math
from pathlib import Path
from typing import Optional, Sequence

import openpyxl
import pandas as pd

from ...errors import FormatError
from ..models import ReconMetrics

logger = logging.getLogger(__name__)

SUMMARY_FRAME = "summary"
METRIC_COLUMNS = ("occupied_recall", "empty_false_positive_rate", "unknown_completion_recall")
COUNT_COLUMNS = (
    "n_recon", "n_occupied", "n_occupied_hit", "n_empty", "n_empty_hit", "n_unknown_solid", "n_unknown_solid_hit",
)


def _clean(value):
    """NaN → None (JSON null)"""
    if isinstance(value, float) and math.isnan(value):
        return None
    return value


class ReportWriter:
    """
    평가 보고서 writer

    1. ReconMetrics 목록을 DataFrame으로 변환
    2. 합계 개수 기반(micro)과 프레임 평균(macro) 집계
    3. 확장자별 저장과 로드
    """

    SUFFIXES = (".json", ".jsonl", ".csv", ".xlsx")

    def to_dataframe(self, metrics: Sequence[ReconMetrics]) -> pd.DataFrame:
        columns = ["frame", *COUNT_COLUMNS, *METRIC_COLUMNS]
        return pd.DataFrame([item.to_dict() for item in metrics], columns=columns)

    def summary(self, metrics: Sequence[ReconMetrics]) -> dict:
        """
        집계

        micro 지표는 전체 개수 합에서, macro 지표는 정의된 프레임 값의 평균입니다.
        """
        frame = self.to_dataframe(metrics)
        totals = {key: int(frame[key].sum()) for key in COUNT_COLUMNS}
        micro = ReconMetrics(frame=SUMMARY_FRAME, **totals).to_dict()
        result = {**micro, "n_frames": len(frame)}
        for column in METRIC_COLUMNS:
            values = pd.to_numeric(frame[column], errors="coerce")
            result[f"macro_{column}"] = _clean(float(values.mean())) if values.notna().any() else None
        return result

    def dumps_jsonl(self, metrics: Sequence[ReconMetrics], include_summary: bool = True) -> str:
        lines = [json.dumps(item.to_dict(), ensure_ascii=False) for item in metrics]
        if include_summary:
            lines.append(json.dumps(self.summary(metrics), ensure_ascii=False))
        return "\n".join(lines) + "\n"

    def save(self, metrics: Sequence[ReconMetrics], path: str | Path) -> Path:
        """
        보고서 저장 (확장자로 형식 결정)

        Args:
            metrics: 프레임별 지표
            path: 저장 경로

        Returns:
            저장된 경로
        """
        path = Path(path)
        suffix = path.suffix.lower()
        if suffix not in self.SUFFIXES:
            raise FormatError(f"지원하지 않는 보고서 형식: {suffix}", field="suffix")
        path.parent.mkdir(parents=True, exist_ok=True)

        if suffix == ".jsonl":
            path.write_text(self.dumps_jsonl(metrics), encoding="utf-8")
        elif suffix == ".json":
            payload = {"frames": [item.to_dict() for item in metrics], "summary": self.summary(metrics)}
            path.write_text(json.dumps(payload, ensure_ascii=False, indent=2), encoding="utf-8")
        elif suffix == ".csv":
            frame = self.to_dataframe(metrics)
            summary = pd.DataFrame([self.summary(metrics)], columns=frame.columns)
            pd.concat([frame, summary], ignore_index=True).to_csv(path, index=False, encoding="utf-8-sig")
        else:
            with pd.ExcelWriter(path, engine="openpyxl") as writer:
                self.to_dataframe(metrics).to_excel(writer, sheet_name="frames", index=False)
                pd.DataFrame([self.summary(metrics)]).to_excel(writer, sheet_name="summary", index=False)

        logger.info("보고서 저장: %s (%d frames)", path, len(metrics))
        return path

    def parse(self, path: str | Path) -> list[ReconMetrics]:
        """
        저장된 보고서의 프레임별 지표 (집계 행 제외)

        Raises:
            FileNotFoundError: 파일 없음
            FormatError: 지원하지 않는 형식 또는 손상된 내용
        """
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"보고서 파일이 없습니다: {path}")
        suffix = path.suffix.lower()
        try:
            if suffix == ".jsonl":
                rows = [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]
            elif suffix == ".json":
                rows = json.loads(path.read_text(encoding="utf-8"))["frames"]
            elif suffix == ".csv":
                rows = pd.read_csv(path, encoding="utf-8-sig", keep_default_na=False).to_dict("records")
            elif suffix == ".xlsx":
                rows = self._parse_sheet(path, "frames")
            else:
                raise FormatError(f"지원하지 않는 보고서 형식: {suffix}", field="suffix")
        except (json.JSONDecodeError, KeyError) as e:
            raise FormatError(f"보고서 파싱 실패: {path} - {e}", field="payload") from e

        return [ReconMetrics.from_dict(row) for row in rows if str(row.get("frame")) != SUMMARY_FRAME]

    def parse_or_none(self, path: str | Path) -> Optional[list[ReconMetrics]]:
        try:
            return self.parse(path)
        except (FileNotFoundError, FormatError) as e:
            logger.warning("보고서 파싱 실패 (건너뜀): %s - %s", path, e)
            return None

    def _parse_sheet(self, path: Path, sheet_name: str) -> list[dict]:
        """openpyxl 시트를 헤더 기준 dict 리스트로"""
        workbook = openpyxl.load_workbook(path, read_only=True)
        try:
            if sheet_name not in workbook.sheetnames:
                raise FormatError(f"시트가 없습니다: {sheet_name}", field="sheet")
            rows = list(workbook[sheet_name].iter_rows(values_only=True))
        finally:
            workbook.close()
        if not rows:
            return []
        header = [str(cell) for cell in rows[0]]
        return [dict(zip(header, row)) for row in rows[1:]]
