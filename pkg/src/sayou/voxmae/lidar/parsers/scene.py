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
장면/센서 설정 파일 파싱 모듈

TOML 형식:
    ground_z = 0.0

    [[box]]
    center = [1.0, 0.0, 0.25]
    size = [0.5, 0.5, 0.5]
    yaw = 0.0

    [[plane]]
    z = 2.0
"""

import logging
import tomllib

from pathlib import Path

from ...errors import ConfigurationError, FormatError
from ..models import Box, HorizontalPlane, Scene, SensorModel
from ..utils import BOX_KEYS, PLANE_KEYS, SCENE_KEYS

logger = logging.getLogger(__name__)


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_format_value(v) for v in value) + "]"
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


class SceneParser:
    """장면 TOML 읽기/쓰기 클래스"""

    SUFFIX = ".toml"

    def from_dict(self, data: dict) -> Scene:
        """
        딕셔너리(TOML 테이블)를 Scene으로 변환

        ground_z가 없으면 0.0, 명시적으로 false이면 지면이 없는 장면입니다.

        Args:
            data: 장면 딕셔너리

        Returns:
            Scene
        """
        unknown = set(data) - SCENE_KEYS
        if unknown:
            raise ConfigurationError("알 수 없는 키입니다", key=f"scene.{sorted(unknown)[0]}")

        boxes = []
        for index, item in enumerate(data.get("box", [])):
            extra = set(item) - BOX_KEYS
            if extra:
                raise ConfigurationError("알 수 없는 키입니다", key=f"box[{index}].{sorted(extra)[0]}")
            if "center" not in item or "size" not in item:
                raise ConfigurationError("center와 size가 필요합니다", key=f"box[{index}]")
            boxes.append(Box(center=tuple(item["center"]), size=tuple(item["size"]), yaw=item.get("yaw", 0.0)))

        planes = []
        for index, item in enumerate(data.get("plane", [])):
            extra = set(item) - PLANE_KEYS
            if extra or "z" not in item:
                raise ConfigurationError("z 하나만 허용됩니다", key=f"plane[{index}]")
            planes.append(HorizontalPlane(float(item["z"])))

        ground_z = data.get("ground_z", 0.0)
        if ground_z is False:
            ground_z = None
        elif ground_z is not None:
            ground_z = float(ground_z)
        return Scene(boxes=boxes, planes=planes, ground_z=ground_z)

    def parse(self, file_path: str | Path) -> Scene:
        """장면 TOML 파일 파싱"""
        path = Path(file_path)
        try:
            with path.open("rb") as f:
                data = tomllib.load(f)
        except tomllib.TOMLDecodeError as e:
            raise FormatError(f"{path}: {e}", field="toml") from e
        scene = self.from_dict(data)
        logger.debug("장면 로드: %s (%d boxes)", path, len(scene.boxes))
        return scene

    def dumps(self, scene: Scene) -> str:
        """Scene을 TOML 문자열로 직렬화"""
        lines = []
        lines.append(f"ground_z = {_format_value(scene.ground_z) if scene.ground_z is not None else 'false'}")
        for box in scene.boxes:
            lines.append("")
            lines.append("[[box]]")
            for key, value in box.to_dict().items():
                lines.append(f"{key} = {_format_value(value)}")
        for plane in scene.planes:
            lines.append("")
            lines.append("[[plane]]")
            lines.append(f"z = {_format_value(plane.z)}")
        return "\n".join(lines) + "\n"

    def save(self, scene: Scene, file_path: str | Path) -> Path:
        path = Path(file_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.dumps(scene), encoding="utf-8")
        return path


class SensorParser:
    """센서 TOML 읽기/쓰기 클래스 (최상위 또는 [sensor] 테이블)"""

    def parse(self, file_path: str | Path) -> SensorModel:
        path = Path(file_path)
        try:
            with path.open("rb") as f:
                data = tomllib.load(f)
        except tomllib.TOMLDecodeError as e:
            raise FormatError(f"{path}: {e}", field="toml") from e
        return SensorModel.from_dict(data.get("sensor", data))

    def dumps(self, sensor: SensorModel) -> str:
        lines = ["[sensor]"]
        for key, value in sensor.to_dict().items():
            lines.append(f"{key} = {_format_value(value)}")
        return "\n".join(lines) + "\n"

    def save(self, sensor: SensorModel, file_path: str | Path) -> Path:
        path = Path(file_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.dumps(sensor), encoding="utf-8")
        return path
