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
voxmae 예외 정의

라이브러리 연산은 아래 예외를 발생시키고, CLI는 이를 종료 코드로 변환합니다.
"""


class VoxmaeError(Exception):
    """voxmae 공통 예외"""


class ConfigurationError(VoxmaeError, ValueError):
    """잘못된 설정 (그리드, 센서, stride, 설정 키 등)"""

    def __init__(self, message: str, key: str | None = None):
        self.key = key
        if key is not None:
            message = f"{key}: {message}"
        super().__init__(message)


class FormatError(VoxmaeError):
    """파일 포맷 오류 (magic, version, shape, 잘린 payload)"""

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        if field is not None:
            message = f"[{field}] {message}"
        super().__init__(message)


class CheckpointError(FormatError):
    """체크포인트 digest/shape 불일치"""


class TapeError(VoxmaeError, RuntimeError):
    """Tape 사용 오류 (forward 없이 backward 호출 등)"""


class EmptyFrameError(VoxmaeError):
    """마스킹 후 입력 복셀이 없는 프레임 (호출자가 건너뜀)"""
