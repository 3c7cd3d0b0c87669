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
range image 파일 파싱 모듈

VRIM 바이너리 포맷 (little-endian):
    magic "VRIM", version u16, rows u32, cols u32,
    f32 inclination 테이블, f32 azimuth_start, f32 azimuth_step, f32 max_range,
    12×f32 pose (3×3 회전 row-major + translation), rows·cols f32 ranges (sentinel = -1.0)
"""

import logging
import struct

from pathlib import Path
from typing import Optional

import numpy as np

from ...errors import FormatError
from ..models import RangeImage, SensorModel
from ..utils import _VRIM_MAGIC_, _VRIM_VERSION_, NO_RETURN

logger = logging.getLogger(__name__)

_HEADER_ = struct.Struct("<4sHII")
_SCALARS_ = struct.Struct("<fff")


class RangeImageParser:
    """VRIM range image 읽기/쓰기 클래스"""

    SUFFIX = ".vrim"

    def to_bytes(self, image: RangeImage) -> bytes:
        """
        RangeImage를 VRIM 바이트로 직렬화

        Args:
            image: RangeImage

        Returns:
            VRIM 바이트
        """
        sensor = image.sensor
        rows, cols = image.shape
        ranges = np.where(image.valid_mask, image.ranges, NO_RETURN)
        pose = np.concatenate([sensor.rotation.reshape(-1), sensor.translation])

        return b"".join([
            _HEADER_.pack(_VRIM_MAGIC_, _VRIM_VERSION_, rows, cols),
            sensor.inclinations.astype("<f4").tobytes(),
            _SCALARS_.pack(sensor.azimuth_start, sensor.azimuth_step, sensor.max_range),
            pose.astype("<f4").tobytes(),
            ranges.astype("<f4").tobytes(),
        ])

    def from_bytes(self, data: bytes, sensor_id: int = 0) -> RangeImage:
        """
        VRIM 바이트를 RangeImage로 파싱

        Args:
            data: VRIM 바이트
            sensor_id: 복원할 센서 id

        Returns:
            RangeImage
        """
        if len(data) < _HEADER_.size:
            raise FormatError("헤더가 잘렸습니다", field="header")
        magic, version, rows, cols = _HEADER_.unpack_from(data, 0)
        if magic != _VRIM_MAGIC_:
            raise FormatError(f"잘못된 magic: {magic!r}", field="magic")
        if version != _VRIM_VERSION_:
            raise FormatError(f"지원하지 않는 버전: {version}", field="version")
        if rows < 1 or cols < 1:
            raise FormatError(f"잘못된 크기: {rows}x{cols}", field="shape")

        expected = _HEADER_.size + 4 * rows + _SCALARS_.size + 4 * 12 + 4 * rows * cols
        if len(data) != expected:
            raise FormatError(f"길이 {len(data)} != {expected}", field="payload")

        offset = _HEADER_.size
        inclinations = np.frombuffer(data, dtype="<f4", count=rows, offset=offset).astype(np.float64)
        offset += 4 * rows
        azimuth_start, azimuth_step, max_range = _SCALARS_.unpack_from(data, offset)
        offset += _SCALARS_.size
        pose = np.frombuffer(data, dtype="<f4", count=12, offset=offset).astype(np.float64)
        offset += 4 * 12
        ranges = np.frombuffer(data, dtype="<f4", count=rows * cols, offset=offset).astype(np.float64)

        sensor = SensorModel(
            rotation=pose[:9].reshape(3, 3),
            translation=pose[9:],
            inclinations=inclinations,
            azimuth_start=azimuth_start,
            azimuth_step=azimuth_step,
            n_cols=cols,
            max_range=max_range,
            sensor_id=sensor_id,
        )
        ranges = ranges.reshape(rows, cols)
        return RangeImage(sensor=sensor, ranges=np.where(ranges >= 0, ranges, NO_RETURN))

    def save(self, image: RangeImage, file_path: str | Path) -> Path:
        """RangeImage를 파일로 저장"""
        path = Path(file_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(self.to_bytes(image))
        logger.debug("VRIM 저장: %s", path)
        return path

    def parse(self, file_path: str | Path, sensor_id: int = 0) -> RangeImage:
        """VRIM 파일 파싱"""
        return self.from_bytes(Path(file_path).read_bytes(), sensor_id=sensor_id)

    def parse_dir(self, directory: str | Path) -> list[tuple[Path, RangeImage]]:
        """
        디렉토리의 모든 VRIM 파일 파싱 (이름 순)

        손상된 파일은 경고 후 건너뜁니다.
        """
        results = []
        for path in sorted(Path(directory).glob(f"*{self.SUFFIX}")):
            image = self._parse_or_none(path)
            if image is not None:
                results.append((path, image))
        return results

    def _parse_or_none(self, path: Path) -> Optional[RangeImage]:
        try:
            return self.parse(path)
        except FormatError as e:
            logger.warning("VRIM 파싱 실패 (건너뜀): %s - %s", path, e)
            return None
