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
라벨 피라미드 파일 파싱 모듈

VLBL 바이너리 포맷 (little-endian):
    magic "VLBL", version u16, stride 수 u16,
    stride마다: stride 3×u16, 엔트리 수 u64,
    엔트리 (ix, iy, iz u32, category u8, weight f32, min_dist f32)

Occupied/Empty 엔트리만 저장하며 나머지는 Unknown입니다.
"""

import logging
import struct

from pathlib import Path
from typing import Optional

import numpy as np

from ...errors import FormatError
from ...geometry import GridConfig
from ..models import LabelMap, LabelPyramid, VoxelCategory
from ..utils import _VLBL_MAGIC_, _VLBL_VERSION_, LABEL_ENTRY_DTYPE

logger = logging.getLogger(__name__)

_HEADER_ = struct.Struct("<4sHH")
_STRIDE_HEADER_ = struct.Struct("<3HQ")


class LabelParser:
    """VLBL 라벨 피라미드 읽기/쓰기 클래스"""

    SUFFIX = ".vlbl"

    def to_bytes(self, pyramid: LabelPyramid) -> bytes:
        """
        LabelPyramid를 VLBL 바이트로 직렬화

        Args:
            pyramid: 라벨 피라미드

        Returns:
            VLBL 바이트
        """
        chunks = [_HEADER_.pack(_VLBL_MAGIC_, _VLBL_VERSION_, len(pyramid.maps))]
        for stride, label_map in pyramid.maps.items():
            entries = np.zeros(len(label_map), dtype=LABEL_ENTRY_DTYPE)
            coords = label_map.coords
            entries["ix"] = coords[:, 0]
            entries["iy"] = coords[:, 1]
            entries["iz"] = coords[:, 2]
            entries["category"] = label_map.category
            entries["weight"] = label_map.weight
            entries["min_dist"] = label_map.min_dist
            chunks.append(_STRIDE_HEADER_.pack(*stride, len(label_map)))
            chunks.append(entries.tobytes())
        return b"".join(chunks)

    def from_bytes(self, data: bytes, grid: GridConfig) -> LabelPyramid:
        """
        VLBL 바이트를 LabelPyramid로 파싱

        Args:
            data: VLBL 바이트
            grid: 라벨을 만든 그리드 설정

        Returns:
            LabelPyramid
        """
        if len(data) < _HEADER_.size:
            raise FormatError("헤더가 잘렸습니다", field="header")
        magic, version, n_strides = _HEADER_.unpack_from(data, 0)
        if magic != _VLBL_MAGIC_:
            raise FormatError(f"잘못된 magic: {magic!r}", field="magic")
        if version != _VLBL_VERSION_:
            raise FormatError(f"지원하지 않는 버전: {version}", field="version")

        offset = _HEADER_.size
        maps = {}
        for _ in range(n_strides):
            if len(data) < offset + _STRIDE_HEADER_.size:
                raise FormatError("stride 헤더가 잘렸습니다", field="stride")
            sx, sy, sz, count = _STRIDE_HEADER_.unpack_from(data, offset)
            offset += _STRIDE_HEADER_.size
            stride = (sx, sy, sz)

            size = count * LABEL_ENTRY_DTYPE.itemsize
            if len(data) < offset + size:
                raise FormatError(f"stride {stride}의 엔트리가 잘렸습니다", field="entries")
            entries = np.frombuffer(data, dtype=LABEL_ENTRY_DTYPE, count=count, offset=offset)
            offset += size

            coords = np.stack([entries["ix"], entries["iy"], entries["iz"]], axis=1).astype(np.int64)
            if not np.all(grid.is_valid(coords, stride)):
                raise FormatError(f"stride {stride}에 그리드 밖 좌표가 있습니다", field="coords")
            category = entries["category"].astype(np.uint8)
            if not np.all((category == VoxelCategory.EMPTY) | (category == VoxelCategory.OCCUPIED)):
                raise FormatError("category는 EMPTY 또는 OCCUPIED여야 합니다", field="category")

            keys = grid.keys(coords, stride)
            order = np.argsort(keys, kind="stable")
            maps[stride] = LabelMap(
                grid=grid,
                stride=stride,
                keys=keys[order],
                category=category[order],
                weight=entries["weight"].astype(np.float64)[order],
                min_dist=entries["min_dist"].astype(np.float64)[order],
            )

        if offset != len(data):
            raise FormatError(f"남는 바이트 {len(data) - offset}", field="payload")
        return LabelPyramid(grid=grid, maps=maps)

    def save(self, pyramid: LabelPyramid, file_path: str | Path) -> Path:
        path = Path(file_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(self.to_bytes(pyramid))
        logger.debug("VLBL 저장: %s", path)
        return path

    def parse(self, file_path: str | Path, grid: GridConfig) -> LabelPyramid:
        return self.from_bytes(Path(file_path).read_bytes(), grid)

    def parse_or_none(self, file_path: str | Path, grid: GridConfig) -> Optional[LabelPyramid]:
        """파싱 실패 시 경고 후 None"""
        try:
            return self.parse(file_path, grid)
        except (FormatError, ValueError) as e:
            logger.warning("VLBL 파싱 실패 (건너뜀): %s - %s", file_path, e)
            return None
