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
시뮬레이션 manifest (manifest.json) 읽기/쓰기

프레임별 VRIM 파일, 장면 TOML, 시드, 지면 높이를 레코드 배열 JSON으로 저장합니다.
"""

import logging
from pathlib import Path
from typing import Optional, Sequence

import pandas as pd

from ...errors import FormatError
from ..models import FrameRecord
from ..utils import MANIFEST_NAME

logger = logging.getLogger(__name__)

COLUMNS = ["frame", "image", "scene", "seed", "ground_z", "n_returns"]


class ManifestParser:
    """manifest.json 파서"""

    def to_dataframe(self, records: Sequence[FrameRecord]) -> pd.DataFrame:
        return pd.DataFrame([record.to_dict() for record in records], columns=COLUMNS)

    def save(self, records: Sequence[FrameRecord], directory: str | Path) -> Path:
        path = Path(directory) / MANIFEST_NAME
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_dataframe(records).to_json(path, orient="records", indent=2, force_ascii=False)
        logger.debug("manifest 저장: %s (%d frames)", path, len(records))
        return path

    def parse(self, directory: str | Path) -> list[FrameRecord]:
        """
        디렉토리의 manifest.json 로드

        Raises:
            FileNotFoundError: manifest 없음
            FormatError: 필수 열 누락 또는 JSON 오류
        """
        path = Path(directory)
        if path.is_dir():
            path = path / MANIFEST_NAME
        if not path.exists():
            raise FileNotFoundError(f"manifest가 없습니다: {path}")
        try:
            frame = pd.read_json(path, orient="records", dtype={"frame": str, "image": str, "scene": str})
        except ValueError as e:
            raise FormatError(f"manifest 파싱 실패: {path} - {e}", field="manifest") from e
        if frame.empty:
            return []
        missing = {"frame", "image"} - set(frame.columns)
        if missing:
            raise FormatError(f"manifest 열 누락: {sorted(missing)}", field=sorted(missing)[0])
        frame = frame.astype(object).where(frame.notna(), None)
        return [FrameRecord.from_dict(row) for row in frame.to_dict("records")]

    def parse_or_none(self, directory: str | Path) -> Optional[list[FrameRecord]]:
        try:
            return self.parse(directory)
        except (FileNotFoundError, FormatError) as e:
            logger.warning("manifest 로드 실패 (건너뜀): %s - %s", directory, e)
            return None
