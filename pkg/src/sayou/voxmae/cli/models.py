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
cli 데이터 모델 정의

실행 설정(RunConfig), 장면 지정(SceneSpec), 시뮬레이션 manifest 항목(FrameRecord)을 정의합니다.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..errors import ConfigurationError
from ..geometry import GridConfig
from ..lidar import Scene, SceneParser, SensorModel, random_scene
from ..model import DecoderConfig, EncoderConfig, SafetyLimits, VoxelReconstructionNetwork
from ..training import TrainConfig, config_digest
from .utils import PATH_KEYS, RUN_KEYS, SCENE_SPEC_KEYS


@dataclass
class SceneSpec:
    """
    장면 지정

    path가 있으면 TOML 파일, random이면 프레임마다 무작위 장면, 둘 다 아니면 inline 장면입니다.
    """
    path: Optional[Path] = None
    random: bool = False
    inline: Optional[Scene] = None
    n_boxes: tuple[int, int] = (2, 5)
    size_range: tuple[float, float] = (0.3, 0.9)
    height_range: tuple[float, float] = (0.2, 0.8)
    ground_z: float = 0.0
    snap: bool = True
    margin: float = 0.3

    def resolve(self, rng: Optional[np.random.Generator], grid: GridConfig, sensor: SensorModel) -> Scene:
        """
        프레임의 장면

        Args:
            rng: 무작위 장면용 난수 생성기
            grid: 그리드 설정
            sensor: 센서 (무작위 박스는 센서 +x 쪽)
        """
        if self.random:
            return random_scene(
                rng if rng is not None else np.random.default_rng(0),
                grid,
                sensor.translation,
                n_boxes=self.n_boxes,
                size_range=self.size_range,
                height_range=self.height_range,
                ground_z=self.ground_z,
                snap=self.snap,
                margin=self.margin,
            )
        if self.path is not None:
            if not self.path.exists():
                raise FileNotFoundError(f"장면 파일이 없습니다: {self.path}")
            return SceneParser().parse(self.path)
        if self.inline is not None:
            return self.inline
        raise ConfigurationError("장면이 지정되지 않았습니다 (path, random, 또는 inline)", key="scene")

    @classmethod
    def from_dict(cls, data: dict, base_dir: Optional[Path] = None) -> "SceneSpec":
        unknown = set(data) - SCENE_SPEC_KEYS
        if unknown:
            raise ConfigurationError("알 수 없는 키입니다", key=f"scene.{sorted(unknown)[0]}")

        if "path" in data:
            path = Path(data["path"])
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            return cls(path=path)

        if data.get("random", False):
            defaults = cls()
            return cls(
                random=True,
                n_boxes=tuple(int(v) for v in data.get("n_boxes", defaults.n_boxes)),
                size_range=tuple(float(v) for v in data.get("size_range", defaults.size_range)),
                height_range=tuple(float(v) for v in data.get("height_range", defaults.height_range)),
                ground_z=float(data.get("ground_z", defaults.ground_z)),
                snap=bool(data.get("snap", defaults.snap)),
                margin=float(data.get("margin", defaults.margin)),
            )

        inline = {key: value for key, value in data.items() if key in ("ground_z", "box", "plane")}
        extra = set(data) - set(inline) - {"random"}
        if extra:
            raise ConfigurationError("inline 장면에는 사용할 수 없는 키입니다", key=f"scene.{sorted(extra)[0]}")
        return cls(inline=SceneParser().from_dict(inline) if inline else None)


@dataclass
class RunConfig:
    """
    실행 설정 (TOML 한 파일)

    Attributes:
        seed: 전체 시드 (VOXMAE_SEED로 덮어쓰기)
        grid: 그리드 설정
        sensor: 센서 모델
        scene: 장면 지정
        encoder: 인코더 구성
        decoder: 디코더 구성
        limits: 안전 한도
        train: 학습 설정 ([train], [masking], [loss])
        paths: [paths] 섹션 (설정 파일 기준 상대 경로 해석)
        source: 설정 파일 경로
    """
    seed: int = 0
    grid: GridConfig = field(default_factory=GridConfig)
    sensor: SensorModel = field(default_factory=SensorModel)
    scene: SceneSpec = field(default_factory=SceneSpec)
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    decoder: DecoderConfig = field(default_factory=DecoderConfig)
    limits: SafetyLimits = field(default_factory=SafetyLimits)
    train: TrainConfig = field(default_factory=TrainConfig)
    paths: dict[str, Path] = field(default_factory=dict)
    source: Optional[Path] = None

    @property
    def digest(self) -> int:
        return config_digest(self.grid, self.encoder, self.decoder)

    def path(self, key: str) -> Path:
        """[paths] 항목 (없으면 ConfigurationError)"""
        if key not in self.paths:
            raise ConfigurationError("경로가 지정되지 않았습니다", key=f"paths.{key}")
        return self.paths[key]

    def network(self, dtype=np.float32) -> VoxelReconstructionNetwork:
        return VoxelReconstructionNetwork(
            self.grid,
            encoder=self.encoder,
            decoder=self.decoder,
            limits=self.limits,
            seed=self.seed,
            dtype=dtype,
        )

    @classmethod
    def from_dict(cls, data: dict, base_dir: Optional[Path] = None, seed: Optional[int] = None) -> "RunConfig":
        """
        TOML 딕셔너리에서 RunConfig 생성

        Args:
            data: 설정 딕셔너리
            base_dir: 상대 경로 기준 디렉토리
            seed: seed 덮어쓰기 (환경 변수)

        Raises:
            ConfigurationError: 알 수 없는 섹션/키 또는 잘못된 값
        """
        unknown = set(data) - RUN_KEYS
        if unknown:
            raise ConfigurationError("알 수 없는 섹션입니다", key=sorted(unknown)[0])
        for section in RUN_KEYS - {"seed"}:
            if section in data and not isinstance(data[section], dict):
                raise ConfigurationError("테이블이어야 합니다", key=section)

        if seed is None:
            seed = data.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
            raise ConfigurationError(f"0 이상의 정수가 아닙니다: {seed}", key="seed")

        paths = data.get("paths", {})
        extra = set(paths) - PATH_KEYS
        if extra:
            raise ConfigurationError("알 수 없는 키입니다", key=f"paths.{sorted(extra)[0]}")
        resolved = {}
        for key, value in paths.items():
            path = Path(value)
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            resolved[key] = path

        return cls(
            seed=seed,
            grid=GridConfig.from_dict(data.get("grid", {})),
            sensor=SensorModel.from_dict(data.get("sensor", {})),
            scene=SceneSpec.from_dict(data.get("scene", {}), base_dir),
            encoder=EncoderConfig.from_dict(data.get("encoder", {})),
            decoder=DecoderConfig.from_dict(data.get("decoder", {})),
            limits=SafetyLimits.from_dict(data.get("limits", {})),
            train=TrainConfig.from_sections(
                data.get("train", {}), data.get("masking", {}), data.get("loss", {}), seed=seed
            ),
            paths=resolved,
        )


@dataclass(frozen=True)
class FrameRecord:
    """
    시뮬레이션 manifest 항목

    Attributes:
        frame: 프레임 이름 (파일 stem)
        image: VRIM 파일 이름
        scene: 장면 TOML 파일 이름 (없으면 빈 문자열)
        seed: 프레임 시뮬레이션 시드
        ground_z: 지면 높이 (없으면 None)
        n_returns: 반사 픽셀 수
    """
    frame: str
    image: str
    scene: str = ""
    seed: int = 0
    ground_z: Optional[float] = None
    n_returns: int = 0

    def to_dict(self) -> dict:
        return {
            "frame": self.frame,
            "image": self.image,
            "scene": self.scene,
            "seed": self.seed,
            "ground_z": self.ground_z,
            "n_returns": self.n_returns,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FrameRecord":
        ground_z = data.get("ground_z")
        if ground_z is not None and ground_z == ground_z:
            ground_z = float(ground_z)
        else:
            ground_z = None
        return cls(
            frame=str(data["frame"]),
            image=str(data["image"]),
            scene=str(data.get("scene") or ""),
            seed=int(data.get("seed", 0)),
            ground_z=ground_z,
            n_returns=int(data.get("n_returns", 0)),
        )
