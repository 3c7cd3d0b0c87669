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

import logging
import os
import tomllib
from pathlib import Path
from typing import Optional

from ...errors import ConfigurationError, FormatError
from ..models import RunConfig
from ..utils import _ENV_SEED_

logger = logging.getLogger(__name__)


class ConfigParser:
    """실행 설정 TOML 파서 (VOXMAE_SEED 환경 변수로 seed 덮어쓰기)"""

    def env_seed(self) -> Optional[int]:
        value = os.environ.get(_ENV_SEED_)
        if value is None or value == "":
            return None
        try:
            seed = int(value)
        except ValueError as e:
            raise ConfigurationError(f"정수가 아닙니다: {value!r}", key=_ENV_SEED_) from e
        logger.info("%s=%d 로 seed를 덮어씁니다", _ENV_SEED_, seed)
        return seed

    def loads(self, text: str, base_dir: Optional[Path] = None) -> RunConfig:
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as e:
            raise FormatError(f"TOML 파싱 실패: {e}", field="toml") from e
        return RunConfig.from_dict(data, base_dir=base_dir, seed=self.env_seed())

    def parse(self, file_path: str | Path) -> RunConfig:
        """
        설정 파일 파싱

        상대 경로는 설정 파일이 있는 디렉토리 기준으로 해석합니다.

        Raises:
            FileNotFoundError: 파일 없음
            ConfigurationError: 알 수 없는 키 또는 잘못된 값
            FormatError: TOML 문법 오류
        """
        path = Path(file_path)
        if not path.exists():
            raise FileNotFoundError(f"설정 파일이 없습니다: {path}")
        config = self.loads(path.read_text(encoding="utf-8"), base_dir=path.parent)
        config.source = path
        logger.debug("설정 로드: %s (seed=%d, digest=%016x)", path, config.seed, config.digest)
        return config
