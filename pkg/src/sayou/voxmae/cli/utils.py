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

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2

# seed 덮어쓰기 환경 변수
_ENV_SEED_ = "VOXMAE_SEED"

MANIFEST_NAME = "manifest.json"
FRAME_PREFIX = "frame_"

RUN_KEYS = {
    "seed",
    "grid",
    "sensor",
    "scene",
    "encoder",
    "decoder",
    "limits",
    "train",
    "masking",
    "loss",
    "paths",
}
SCENE_SPEC_KEYS = {
    "path",
    "random",
    "n_boxes",
    "size_range",
    "height_range",
    "ground_z",
    "snap",
    "margin",
    "box",
    "plane",
}
PATH_KEYS = {"frames", "labels", "checkpoint", "output", "report"}

# ASCII PLY z 컬러맵
PLY_COLORMAP = "viridis"


def frame_name(index: int) -> str:
    return f"{FRAME_PREFIX}{index:06d}"

# --threads로 제한하는 BLAS/OpenMP 스레드 수 환경 변수
THREAD_ENV_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")
