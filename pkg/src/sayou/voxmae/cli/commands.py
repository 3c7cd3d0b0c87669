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
CLI 명령 구현

각 명령은 argparse.Namespace를 받아 종료 코드를 반환합니다.
예외는 main에서 종료 코드로 변환합니다.
"""

import dataclasses
import logging
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from ..errors import ConfigurationError, FormatError
from ..evalsuite import ReconstructionEvaluator, ReportWriter
from ..geometry import world_to_voxel_batch
from ..lidar import RangeImageParser, SceneParser, SensorParser, simulate, to_points
from ..model import VoxelReconstructionNetwork, reconstruct, reconstruction_points
from ..supervision import Categorizer, LabelParser
from ..training import CheckpointParser, Pretrainer, TrainingFrame, load_checkpoint, network_digest
from .models import FrameRecord, RunConfig, SceneSpec
from .parsers import ConfigParser, ManifestParser, PlyWriter
from .utils import EXIT_OK, MANIFEST_NAME, frame_name

logger = logging.getLogger(__name__)


def frame_seed(seed: int, index: int) -> int:
    """(seed, index)에서 유도한 프레임별 32비트 시드"""
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1)[0])


def load_config(path: Optional[str | Path]) -> RunConfig:
    """설정 파일 (없으면 기본값, VOXMAE_SEED는 항상 적용)"""
    parser = ConfigParser()
    if path is None:
        return parser.loads("")
    return parser.parse(path)


def load_frames(directory: str | Path) -> list[tuple[str, TrainingFrame]]:
    """
    디렉토리의 학습/평가 프레임

    manifest.json이 있으면 그 순서와 장면을, 없으면 *.vrim 파일과 같은 이름의 장면 TOML을 사용합니다.
    읽을 수 없는 파일은 경고 후 건너뜁니다.

    Returns:
        [(프레임 이름, TrainingFrame)]
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"프레임 디렉토리가 없습니다: {directory}")

    image_parser = RangeImageParser()
    scene_parser = SceneParser()
    frames: list[tuple[str, TrainingFrame]] = []

    records = ManifestParser().parse_or_none(directory) if (directory / MANIFEST_NAME).exists() else None
    if records is not None:
        for record in records:
            try:
                image = image_parser.parse(directory / record.image)
                scene = scene_parser.parse(directory / record.scene) if record.scene else None
            except (OSError, FormatError, ConfigurationError) as e:
                logger.warning("프레임 로드 실패 (건너뜀): %s - %s", record.frame, e)
                continue
            frames.append((record.frame, TrainingFrame([image], scene, frame_id=len(frames))))
        return frames

    for path, image in image_parser.parse_dir(directory):
        scene_path = path.with_suffix(".toml")
        scene = scene_parser.parse(scene_path) if scene_path.exists() else None
        frames.append((path.stem, TrainingFrame([image], scene, frame_id=len(frames))))
    return frames


def _restored_network(config: RunConfig, checkpoint: str | Path) -> VoxelReconstructionNetwork:
    """설정으로 네트워크를 만들고 체크포인트 적용 (digest 불일치면 CheckpointError)"""
    network = config.network()
    load_checkpoint(checkpoint, network)
    return network


def cmd_simulate(args) -> int:
    """
    range image 시뮬레이션

    프레임마다 VRIM 파일과 (무작위 장면이면) 장면 TOML을 쓰고 manifest.json을 남깁니다.
    """
    if args.frames < 1:
        raise ConfigurationError(f"1 이상이어야 합니다: {args.frames}", key="frames")
    config = load_config(args.config)
    seed = args.seed if args.seed is not None else config.seed

    if args.sensor:
        if not Path(args.sensor).exists():
            raise FileNotFoundError(f"센서 파일이 없습니다: {args.sensor}")
        sensor = SensorParser().parse(args.sensor)
    else:
        sensor = config.sensor

    if args.random_scenes:
        spec = config.scene if config.scene.random else SceneSpec(random=True)
    elif args.scene:
        spec = SceneSpec(path=Path(args.scene))
    else:
        spec = config.scene

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    scene_parser = SceneParser()
    image_parser = RangeImageParser()

    fixed_scene = None
    if not spec.random:
        fixed_scene = spec.resolve(None, config.grid, sensor)
        scene_parser.save(fixed_scene, out / "scene.toml")

    records = []
    for index in range(args.frames):
        name = frame_name(index)
        seed_i = frame_seed(seed, index)
        if spec.random:
            scene = spec.resolve(np.random.default_rng(seed_i), config.grid, sensor)
            scene_file = f"{name}.toml"
            scene_parser.save(scene, out / scene_file)
        else:
            scene, scene_file = fixed_scene, "scene.toml"

        image = simulate(scene, sensor, seed=seed_i)
        image_parser.save(image, out / f"{name}.vrim")
        records.append(FrameRecord(
            frame=name,
            image=f"{name}.vrim",
            scene=scene_file,
            seed=seed_i,
            ground_z=scene.ground_z,
            n_returns=image.n_returns,
        ))
        logger.debug("%s: %d returns", name, image.n_returns)

    ManifestParser().save(records, out)
    logger.info("시뮬레이션 완료: %d frames → %s", len(records), out)
    return EXIT_OK


def cmd_labelgen(args) -> int:
    """VRIM 프레임마다 라벨 피라미드(VLBL) 생성"""
    config = load_config(args.grid)
    grid = config.grid
    strides = config.decoder.supervision_strides(config.encoder.total_stride)
    categorizer = Categorizer(grid, strides, include_misses=config.train.include_misses)
    if not Path(args.frames).is_dir():
        raise FileNotFoundError(f"프레임 디렉토리가 없습니다: {args.frames}")

    out = Path(args.out)
    parser = LabelParser()
    images = RangeImageParser().parse_dir(args.frames)
    if not images:
        logger.warning("VRIM 파일이 없습니다: %s", args.frames)

    for path, image in images:
        frame = to_points(image, include_misses=config.train.include_misses)
        _, inside = world_to_voxel_batch(frame.points, grid)
        clipped = frame.n_points - int(np.count_nonzero(inside))
        if clipped:
            logger.warning("%s: 그리드 밖 점 %d개 제외 (그리드가 작습니다)", path.name, clipped)
        pyramid = categorizer.pyramid(frame)
        parser.save(pyramid, out / f"{path.stem}.vlbl")
        logger.debug("%s: %s", path.stem, pyramid.summary())

    logger.info("라벨 생성 완료: %d frames → %s", len(images), out)
    return EXIT_OK


def cmd_pretrain(args) -> int:
    """설정과 프레임 디렉토리로 사전 학습, 체크포인트 저장"""
    config = load_config(args.config)
    frames_dir = Path(args.frames) if args.frames else config.path("frames")
    out = Path(args.out) if args.out else config.path("checkpoint")

    train = config.train
    if args.steps is not None:
        train = dataclasses.replace(train, max_steps=args.steps)

    frames = [frame for _, frame in load_frames(frames_dir)]
    if not frames:
        raise ConfigurationError(f"학습 프레임이 없습니다: {frames_dir}", key="paths.frames")

    network = config.network()
    trainer = Pretrainer(network, train)
    if args.resume:
        trainer.resume(CheckpointParser().parse(args.resume, digest=network_digest(network)))
        logger.info("체크포인트에서 재개: %s (step %d)", args.resume, trainer.step)

    results = trainer.fit(frames, checkpoint_path=out)
    valid = [result for result in results if not result.skipped]
    if valid:
        logger.info(
            "학습 완료: %d steps, 첫 loss %.6f → 마지막 loss %.6f", trainer.step, valid[0].loss, valid[-1].loss
        )
    else:
        logger.warning("유효한 학습 step이 없습니다")
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    """체크포인트로 프레임 하나를 재구성해 PLY로 저장"""
    config = load_config(args.config)
    network = _restored_network(config, args.ckpt)

    image = RangeImageParser().parse(args.frame)
    scene_path = Path(args.scene) if args.scene else Path(args.frame).with_suffix(".toml")
    scene = SceneParser().parse(scene_path) if scene_path.exists() else None

    frame = to_points(image)
    coords = reconstruct(frame, network, keep_fraction=args.keep_fraction, seed=config.seed, scene=scene)
    PlyWriter().save(reconstruction_points(coords, config.grid), args.out)
    return EXIT_OK


def cmd_eval(args) -> int:
    """
    프레임별 재구성 평가와 집계

    --baseline untrained이면 같은 설정의 학습되지 않은 네트워크도 평가해 비교합니다.
    """
    config = load_config(args.config)
    network = _restored_network(config, args.ckpt)

    loaded = load_frames(args.frames)
    named = [(name, frame) for name, frame in loaded if frame.scene is not None]
    if len(named) < len(loaded):
        logger.warning("장면이 없는 프레임 %d개 제외", len(loaded) - len(named))
    names = [name for name, _ in named]
    frames = [frame for _, frame in named]

    writer = ReportWriter()
    runs = [("trained", network)]
    if args.baseline == "untrained":
        runs.append(("untrained", config.network()))

    summaries = {}
    for label, model in runs:
        evaluator = ReconstructionEvaluator(
            model,
            keep_fraction=args.keep_fraction,
            seed=config.seed,
            include_misses=config.train.include_misses,
        )
        metrics = evaluator.evaluate_all(frames, names)
        summaries[label] = writer.summary(metrics)

        if args.report:
            report = Path(args.report)
            if label != "trained":
                report = report.with_name(f"{report.stem}.{label}{report.suffix}")
            writer.save(metrics, report)
        else:
            sys.stdout.write(writer.dumps_jsonl(metrics))

    for label, summary in summaries.items():
        logger.info(
            "%s: occupied_recall=%s empty_fp=%s completion=%s",
            label,
            summary["occupied_recall"],
            summary["empty_false_positive_rate"],
            summary["unknown_completion_recall"],
        )
    return EXIT_OK
