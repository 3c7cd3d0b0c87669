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
CLI
===========================

simulate / labelgen / pretrain / reconstruct / eval 명령, TOML 실행 설정, PLY 출력

Quick Start:
    $ voxmae simulate --random-scenes --frames 100 --seed 0 --out data/
    $ voxmae pretrain --config run.toml --frames data/ --out model.vckp
    $ voxmae eval --ckpt model.vckp --config run.toml --frames data/ --report report.csv

    >>> from sayou.voxmae.cli import main
    >>> main(["simulate", "--scene", "scene.toml", "--frames", "1", "--out", "data/"])
    0

Note:
    명령 모듈은 --threads 적용 후에 불러오므로, 이 패키지는 main만 내보냅니다.
"""

__version__ = "0.1.0"
__author__ = "SeongJung Kim"

from .main import build_parser, main

__all__ = [
    "build_parser",
    "main",
]
