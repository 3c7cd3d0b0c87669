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
체크포인트 파일 파싱 모듈

VCKP 바이너리 포맷 (little-endian):
    magic "VCKP", version u16, config digest u64,
    텐서 수 u32, 텐서마다 (이름 길이 u16, UTF-8 이름, rank u8, dims u32×rank, f32 데이터),
    moment 수 u32, moment마다 같은 형식,
    schedule step u64, seed u64
"""

import logging
import struct

from pathlib import Path

import numpy as np

from ...errors import CheckpointError, FormatError
from ..models import ModelCheckpoint
from ..utils import _VCKP_MAGIC_, _VCKP_VERSION_

logger = logging.getLogger(__name__)

_HEADER_ = struct.Struct("<4sHQ")
_COUNT_ = struct.Struct("<I")
_NAME_LEN_ = struct.Struct("<H")
_RANK_ = struct.Struct("<B")
_TRAILER_ = struct.Struct("<QQ")


class _Reader:
    """경계 검사를 하는 바이트 커서"""

    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def take(self, size: int, field: str) -> bytes:
        if self.offset + size > len(self.data):
            raise FormatError(f"{self.offset}에서 {size}바이트가 필요합니다", field=field)
        chunk = self.data[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: struct.Struct, field: str) -> tuple:
        return fmt.unpack(self.take(fmt.size, field))


class CheckpointParser:
    """VCKP 체크포인트 읽기/쓰기 클래스"""

    SUFFIX = ".vckp"

    @staticmethod
    def _pack_tensors(tensors: dict[str, np.ndarray]) -> list[bytes]:
        chunks = [_COUNT_.pack(len(tensors))]
        for name, array in tensors.items():
            encoded = name.encode("utf-8")
            array = np.asarray(array)
            chunks.append(_NAME_LEN_.pack(len(encoded)))
            chunks.append(encoded)
            chunks.append(_RANK_.pack(array.ndim))
            chunks.append(struct.pack(f"<{array.ndim}I", *array.shape))
            chunks.append(np.ascontiguousarray(array, dtype="<f4").tobytes())
        return chunks

    @staticmethod
    def _read_tensors(reader: _Reader, field: str) -> dict[str, np.ndarray]:
        (count,) = reader.unpack(_COUNT_, f"{field}.count")
        tensors = {}
        for _ in range(count):
            (name_len,) = reader.unpack(_NAME_LEN_, f"{field}.name")
            try:
                name = reader.take(name_len, f"{field}.name").decode("utf-8")
            except UnicodeDecodeError as e:
                raise FormatError(f"이름 디코딩 실패: {e}", field=f"{field}.name") from e
            (rank,) = reader.unpack(_RANK_, f"{field}.rank")
            dims = struct.unpack(f"<{rank}I", reader.take(4 * rank, f"{field}.shape"))
            size = int(np.prod(dims)) if rank else 1
            data = reader.take(4 * size, f"{field}.data")
            tensors[name] = np.frombuffer(data, dtype="<f4").reshape(dims).copy()
        return tensors

    def to_bytes(self, checkpoint: ModelCheckpoint) -> bytes:
        """ModelCheckpoint를 VCKP 바이트로 직렬화"""
        chunks = [_HEADER_.pack(_VCKP_MAGIC_, checkpoint.version, checkpoint.digest)]
        chunks += self._pack_tensors(checkpoint.tensors)
        chunks += self._pack_tensors(checkpoint.moments)
        chunks.append(_TRAILER_.pack(checkpoint.step, checkpoint.seed))
        return b"".join(chunks)

    def from_bytes(self, data: bytes) -> ModelCheckpoint:
        """
        VCKP 바이트를 ModelCheckpoint로 파싱

        Raises:
            FormatError: magic, version, 잘린 payload
        """
        reader = _Reader(data)
        magic, version, digest = reader.unpack(_HEADER_, "header")
        if magic != _VCKP_MAGIC_:
            raise FormatError(f"잘못된 magic: {magic!r}", field="magic")
        if version != _VCKP_VERSION_:
            raise FormatError(f"지원하지 않는 버전: {version}", field="version")

        tensors = self._read_tensors(reader, "tensors")
        moments = self._read_tensors(reader, "moments")
        step, seed = reader.unpack(_TRAILER_, "trailer")
        if reader.offset != len(data):
            raise FormatError(f"남는 바이트 {len(data) - reader.offset}", field="payload")
        return ModelCheckpoint(digest=digest, tensors=tensors, moments=moments, step=step, seed=seed, version=version)

    def save(self, checkpoint: ModelCheckpoint, file_path: str | Path) -> Path:
        path = Path(file_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(self.to_bytes(checkpoint))
        logger.info("체크포인트 저장: %s (step %d)", path, checkpoint.step)
        return path

    def parse(self, file_path: str | Path, digest: int | None = None) -> ModelCheckpoint:
        """
        체크포인트 파일 파싱

        Args:
            file_path: 파일 경로
            digest: 기대하는 구성 digest (주어지면 불일치 시 CheckpointError)
        """
        checkpoint = self.from_bytes(Path(file_path).read_bytes())
        if digest is not None and checkpoint.digest != digest:
            raise CheckpointError(
                f"구성 digest 불일치: {checkpoint.digest:016x} != {digest:016x}", field="digest"
            )
        return checkpoint
