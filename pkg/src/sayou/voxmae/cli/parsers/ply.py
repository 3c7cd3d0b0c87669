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
ASCII PLY 점군 읽기/쓰기 (plyfile)

재구성 복셀 중심을 x, y, z (float)와 z 컬러맵 RGB (uchar)로 저장합니다.
"""

import logging
from pathlib import Path

import numpy as np
from matplotlib import colormaps
from plyfile import PlyData, PlyElement, PlyParseError

from ...errors import FormatError
from ..utils import PLY_COLORMAP

logger = logging.getLogger(__name__)

_VERTEX_DTYPE_ = [
    ("x", "f4"),
    ("y", "f4"),
    ("z", "f4"),
    ("red", "u1"),
    ("green", "u1"),
    ("blue", "u1"),
]


def z_colors(points: np.ndarray, colormap: str = PLY_COLORMAP) -> np.ndarray:
    """z 좌표를 [0, 1]로 정규화한 컬러맵 RGB (N, 3) uint8"""
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if points.shape[0] == 0:
        return np.zeros((0, 3), dtype=np.uint8)
    z = points[:, 2]
    span = z.max() - z.min()
    t = (z - z.min()) / span if span > 0 else np.zeros_like(z)
    rgba = colormaps[colormap](t)
    return np.round(rgba[:, :3] * 255.0).astype(np.uint8)


class PlyWriter:
    """ASCII PLY writer/reader"""

    def __init__(self, colormap: str = PLY_COLORMAP):
        self.colormap = colormap

    def to_plydata(self, points: np.ndarray) -> PlyData:
        points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        colors = z_colors(points, self.colormap)

        elements = np.empty(points.shape[0], dtype=_VERTEX_DTYPE_)
        for axis, name in enumerate(("x", "y", "z")):
            elements[name] = points[:, axis]
        for channel, name in enumerate(("red", "green", "blue")):
            elements[name] = colors[:, channel]
        return PlyData([PlyElement.describe(elements, "vertex")], text=True)

    def save(self, points: np.ndarray, file_path: str | Path) -> Path:
        path = Path(file_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        plydata = self.to_plydata(points)
        plydata.write(str(path))
        logger.info("PLY 저장: %s (%d vertices)", path, plydata["vertex"].count)
        return path

    def parse(self, file_path: str | Path) -> tuple[np.ndarray, np.ndarray]:
        """
        PLY 파일 파싱

        Returns:
            (points (N, 3) float64, colors (N, 3) uint8)

        Raises:
            FormatError: PLY 매직, 헤더/본문 파싱 실패, vertex element 없음
        """
        path = Path(file_path)
        with path.open("rb") as f:
            if f.read(3) != b"ply":
                raise FormatError("PLY 매직이 아닙니다", field="magic")
        try:
            plydata = PlyData.read(str(path))
        except PlyParseError as e:
            raise FormatError(f"PLY 파싱 실패: {e}", field="payload") from e
        if "vertex" not in plydata:
            raise FormatError("vertex element가 없습니다", field="element")

        vertex = plydata["vertex"]
        points = np.stack([np.asarray(vertex[name], dtype=np.float64) for name in ("x", "y", "z")], axis=1)
        colors = np.stack([np.asarray(vertex[name], dtype=np.uint8) for name in ("red", "green", "blue")], axis=1)
        return points.reshape(-1, 3), colors.reshape(-1, 3)
