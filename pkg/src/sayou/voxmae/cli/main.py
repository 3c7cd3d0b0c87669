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
voxmae 명령줄 진입점

    voxmae simulate --scene scene.toml --sensor sensor.toml --frames 10 --seed 0 --out data/
    voxmae labelgen --frames data/ --grid run.toml --out labels/
    voxmae pretrain --config run.toml --out model.vckp
    voxmae reconstruct --ckpt model.vckp --frame data/frame_000000.vrim --out recon.ply
    voxmae eval --ckpt model.vckp --frames data/ --report report.xlsx

종료 코드: 0 성공, 1 실행 오류, 2 설정 오류 (설정 키 또는 파일 없음)
"""

import argparse
import importlib
import logging
import os
import sys
from typing import Optional, Sequence

from ..errors import ConfigurationError, VoxmaeError
from .utils import EXIT_CONFIG, EXIT_RUNTIME, THREAD_ENV_VARS

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="voxmae", description="masked 복셀 재구성 사전 학습 도구")
    parser.add_argument("--log-level", default="INFO", choices=("DEBUG", "INFO", "WARNING", "ERROR"))
    parser.add_argument("--threads", type=int, default=None, help="BLAS/OpenMP 스레드 수 (기본: 머신 병렬도)")
    commands = parser.add_subparsers(dest="command", required=True)

    simulate = commands.add_parser("simulate", help="range image 시뮬레이션")
    simulate.add_argument("--config", default=None, help="실행 설정 TOML")
    simulate.add_argument("--scene", default=None, help="장면 TOML")
    simulate.add_argument("--sensor", default=None, help="센서 TOML")
    simulate.add_argument("--frames", type=int, default=1, help="프레임 수")
    simulate.add_argument("--seed", type=int, default=None)
    simulate.add_argument("--random-scenes", action="store_true", help="프레임마다 무작위 장면")
    simulate.add_argument("--out", required=True, help="출력 디렉토리")

    labelgen = commands.add_parser("labelgen", help="라벨 피라미드 생성")
    labelgen.add_argument("--frames", required=True, help="VRIM 디렉토리")
    labelgen.add_argument("--grid", "--config", dest="grid", default=None, help="그리드를 담은 실행 설정 TOML")
    labelgen.add_argument("--out", required=True, help="출력 디렉토리")

    pretrain = commands.add_parser("pretrain", help="사전 학습")
    pretrain.add_argument("--config", required=True, help="실행 설정 TOML")
    pretrain.add_argument("--frames", default=None, help="프레임 디렉토리 (기본: paths.frames)")
    pretrain.add_argument("--out", default=None, help="체크포인트 경로 (기본: paths.checkpoint)")
    pretrain.add_argument("--steps", type=int, default=None, help="train.max_steps 덮어쓰기")
    pretrain.add_argument("--resume", default=None, help="이어서 학습할 체크포인트")

    recon = commands.add_parser("reconstruct", help="프레임 재구성 PLY 저장")
    recon.add_argument("--ckpt", required=True)
    recon.add_argument("--frame", required=True, help="VRIM 파일")
    recon.add_argument("--config", default=None, help="체크포인트와 같은 구성의 실행 설정 TOML")
    recon.add_argument("--scene", default=None, help="장면 TOML (기본: 프레임과 같은 이름)")
    recon.add_argument("--keep-fraction", type=float, default=1.0)
    recon.add_argument("--out", required=True, help="PLY 경로")

    evaluate = commands.add_parser("eval", help="재구성 평가")
    evaluate.add_argument("--ckpt", required=True)
    evaluate.add_argument("--frames", required=True, help="프레임 디렉토리 (장면 포함)")
    evaluate.add_argument("--config", default=None)
    evaluate.add_argument("--report", default=None, help=".jsonl/.json/.csv/.xlsx (기본: 표준 출력 JSONL)")
    evaluate.add_argument("--baseline", choices=("untrained",), default=None)
    evaluate.add_argument("--keep-fraction", type=float, default=1.0)
    return parser


def _limit_threads(threads: Optional[int]):
    """numpy를 불러오기 전에 BLAS/OpenMP 스레드 수를 고정"""
    if threads is None:
        return
    if threads < 1:
        raise ConfigurationError(f"1 이상이어야 합니다: {threads}", key="threads")
    for name in THREAD_ENV_VARS:
        os.environ[name] = str(threads)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        _limit_threads(args.threads)
        commands = importlib.import_module(f"{__package__}.commands")
        return getattr(commands, f"cmd_{args.command}")(args)
    except (ConfigurationError, FileNotFoundError) as e:
        print(f"voxmae {args.command}: 설정 오류: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (VoxmaeError, RuntimeError, OSError, ValueError) as e:
        logger.debug("실행 오류", exc_info=True)
        print(f"voxmae {args.command}: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
